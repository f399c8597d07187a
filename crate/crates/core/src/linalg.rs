//! Small dense linear algebra: row-major square matrices, pivoted elimination
//! and spectral norms. Systems here never exceed a few dozen unknowns.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    row.len(),
                    n
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `uᵀ M v`.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        let mv = self.mul_vec(v);
        u.iter().zip(&mv).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn is_strictly_lower(&self) -> bool {
        (0..self.n).all(|i| (i..self.n).all(|j| self[(i, j)] == 0.0))
    }

    /// Largest singular value, by power iteration on `MᵀM`.
    pub fn spectral_norm(&self) -> f64 {
        spectral_norm(self)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn spectral_norm(m: &Matrix) -> f64 {
    let n = m.size();
    if n == 0 || m.max_abs() == 0.0 {
        return 0.0;
    }
    let mt = m.transpose();
    // Start off-axis so no singular direction is missed by symmetry.
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * i as f64).collect();
    let mut sigma2 = 0.0;
    for _ in 0..1000 {
        let w = mt.mul_vec(&m.mul_vec(&v));
        let nw = norm2(&w);
        if nw == 0.0 {
            return 0.0;
        }
        let nv = norm2(&v);
        let next = nw / nv;
        v = w.iter().map(|x| x / nw).collect();
        if (next - sigma2).abs() <= 1e-15 * next {
            sigma2 = next;
            break;
        }
        sigma2 = next;
    }
    sigma2.sqrt()
}

/// Solve `M x = b` by Gaussian elimination with row pivoting.
///
/// A pivot smaller than `rel_pivot_tol * max|M|` is reported as singular.
pub fn solve(m: &Matrix, b: &[f64], rel_pivot_tol: f64) -> Result<Vec<f64>> {
    let n = m.size();
    if b.len() != n {
        return Err(Error::Dimension(format!(
            "right-hand side has length {}, matrix side {}",
            b.len(),
            n
        )));
    }
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let threshold = rel_pivot_tol * scale;
    let mut a = m.clone();
    let mut x = b.to_vec();
    for col in 0..n {
        let (piv, pmax) = (col..n)
            .map(|r| (r, a[(r, col)].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(pmax >= threshold) || pmax == 0.0 {
            return Err(Error::Singular {
                pivot: pmax,
                threshold,
            });
        }
        if piv != col {
            for j in 0..n {
                a.data.swap(col * n + j, piv * n + j);
            }
            x.swap(col, piv);
        }
        let d = a[(col, col)];
        for r in col + 1..n {
            let f = a[(r, col)] / d;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                let v = a[(col, j)];
                a[(r, j)] -= f * v;
            }
            x[r] -= f * x[col];
        }
    }
    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in i + 1..n {
            acc -= a[(i, j)] * x[j];
        }
        x[i] = acc / a[(i, i)];
    }
    Ok(x)
}
