//! Stochastic Runge-Kutta tableaux `(A, B, α, β)` and their conservation
//! defect matrices.
//!
//! For a one-channel Stratonovich SRK method
//!
//! ```text
//! Yᵢ    = yₙ + h Σⱼ aᵢⱼ f(Yⱼ) + ΔW Σⱼ bᵢⱼ g(Yⱼ)
//! yₙ₊₁  = yₙ + h Σᵢ αᵢ f(Yᵢ) + ΔW Σᵢ βᵢ g(Yᵢ)
//! ```
//!
//! the change of a quadratic invariant over one step is a bilinear form in
//! the stage increments weighted by
//!
//! ```text
//! M⁰ᵢⱼ = αᵢaᵢⱼ + αⱼaⱼᵢ − αᵢαⱼ
//! M¹ᵢⱼ = βᵢbᵢⱼ + βⱼbⱼᵢ − βᵢβⱼ
//! M*ᵢⱼ = αᵢbᵢⱼ + aⱼᵢβⱼ − αᵢβⱼ
//! ```
//!
//! A method with all three matrices zero preserves every quadratic invariant.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Absolute tolerance used by the boolean coefficient checks.
pub const DEFAULT_TOL: f64 = 1e-12;

/// An s-stage SRK method with drift coefficients `A, α` and diffusion
/// coefficients `B, β`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tableau {
    name: String,
    a: Matrix,
    b: Matrix,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl Tableau {
    pub fn new(
        name: impl Into<String>,
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        alpha: Vec<f64>,
        beta: Vec<f64>,
    ) -> Result<Self> {
        let s = alpha.len();
        if s == 0 {
            return Err(Error::InvalidTableau("stage count must be positive".into()));
        }
        if a.len() != s || b.len() != s || beta.len() != s {
            return Err(Error::InvalidTableau(format!(
                "inconsistent sizes: A has {} rows, B has {} rows, alpha {} entries, beta {} entries",
                a.len(),
                b.len(),
                s,
                beta.len()
            )));
        }
        let a = Matrix::from_rows(&a).map_err(|e| Error::InvalidTableau(format!("A: {e}")))?;
        let b = Matrix::from_rows(&b).map_err(|e| Error::InvalidTableau(format!("B: {e}")))?;
        let all_finite = a
            .entries()
            .iter()
            .chain(b.entries())
            .chain(&alpha)
            .chain(&beta)
            .all(|x| x.is_finite());
        if !all_finite {
            return Err(Error::InvalidTableau("non-finite coefficient".into()));
        }
        Ok(Self {
            name: name.into(),
            a,
            b,
            alpha,
            beta,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn stages(&self) -> usize {
        self.alpha.len()
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// True iff both `A` and `B` are strictly lower triangular.
    pub fn is_explicit(&self) -> bool {
        self.a.is_strictly_lower() && self.b.is_strictly_lower()
    }

    pub fn defect_matrices(&self) -> DefectMatrices {
        DefectMatrices::of(self)
    }

    /// All three conservation defect matrices vanish to within `tol`.
    pub fn is_exactly_conservative(&self, tol: f64) -> bool {
        self.defect_matrices().max_abs <= tol
    }

    /// `αᵀe = 1`, `βᵀe = 1`, `βᵀBe = 1/2`: strong global order one.
    pub fn satisfies_order_one(&self, tol: f64) -> bool {
        let sum_alpha: f64 = self.alpha.iter().sum();
        let sum_beta: f64 = self.beta.iter().sum();
        let be = self.b.mul_vec(&vec![1.0; self.stages()]);
        let beta_be: f64 = self.beta.iter().zip(&be).map(|(x, y)| x * y).sum();
        (sum_alpha - 1.0).abs() <= tol
            && (sum_beta - 1.0).abs() <= tol
            && (beta_be - 0.5).abs() <= tol
    }

    /// Parse the plain-text tableau format:
    ///
    /// ```text
    /// s=<stages>
    /// <s rows of A>
    /// B
    /// <s rows of B>
    /// alpha
    /// <s entries>
    /// beta
    /// <s entries>
    /// ```
    ///
    /// Entries are decimals or `p/q` rationals; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        parse_text(text)
    }

    /// Inverse of [`Tableau::parse`]. Values are printed in shortest
    /// round-trip form so parsing the output restores identical bits.
    pub fn to_text(&self) -> String {
        let s = self.stages();
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.name);
        let _ = writeln!(out, "s={s}");
        let row = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
        for i in 0..s {
            let _ = writeln!(out, "{}", row(self.a.row(i)));
        }
        let _ = writeln!(out, "B");
        for i in 0..s {
            let _ = writeln!(out, "{}", row(self.b.row(i)));
        }
        let _ = writeln!(out, "alpha\n{}", row(&self.alpha));
        let _ = writeln!(out, "beta\n{}", row(&self.beta));
        out
    }
}

/// Built-in methods.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builtin {
    /// Explicit three-stage method with QI-preservation conditions through
    /// the order-2.0 level claimed for it.
    Scheme21,
    /// Explicit three-stage method, claimed QI order 2.5.
    Scheme22,
    /// One-stage stochastic midpoint rule; exactly conservative.
    Midpoint,
}

impl Builtin {
    pub const ALL: [Builtin; 3] = [Builtin::Scheme21, Builtin::Scheme22, Builtin::Midpoint];

    pub fn label(self) -> &'static str {
        match self {
            Builtin::Scheme21 => "scheme_2_1",
            Builtin::Scheme22 => "scheme_2_2",
            Builtin::Midpoint => "midpoint",
        }
    }

    pub fn tableau(self) -> Tableau {
        let q = |p: i32, d: i32| f64::from(p) / f64::from(d);
        let (a, w) = match self {
            Builtin::Scheme21 => (
                vec![
                    vec![0.0, 0.0, 0.0],
                    vec![q(1, 4), 0.0, 0.0],
                    vec![q(-1, 2), q(3, 2), 0.0],
                ],
                vec![0.0, q(2, 3), q(1, 3)],
            ),
            Builtin::Scheme22 => (
                vec![
                    vec![0.0, 0.0, 0.0],
                    vec![q(1, 2), 0.0, 0.0],
                    vec![0.0, 1.0, 0.0],
                ],
                vec![q(1, 4), q(1, 2), q(1, 4)],
            ),
            Builtin::Midpoint => (vec![vec![q(1, 2)]], vec![1.0]),
        };
        Tableau::new(self.label(), a.clone(), a, w.clone(), w).expect("built-in tableau is valid")
    }

    pub fn valid_names() -> String {
        Self::ALL.iter().map(|b| b.label()).collect::<Vec<_>>().join(", ")
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|b| b.label() == lower)
            .ok_or_else(|| Error::UnknownTableau {
                name: s.to_string(),
                valid: Self::valid_names(),
            })
    }
}

/// Look up a built-in tableau by (case-insensitive) name.
pub fn builtin_tableau(name: &str) -> Result<Tableau> {
    Ok(name.parse::<Builtin>()?.tableau())
}

/// Conservation defect matrices `M⁰`, `M¹`, `M*`.
#[derive(Clone, Debug, PartialEq)]
pub struct DefectMatrices {
    pub m0: Matrix,
    pub m1: Matrix,
    pub mstar: Matrix,
    pub max_abs: f64,
}

impl DefectMatrices {
    pub fn of(t: &Tableau) -> Self {
        let s = t.stages();
        let (a, b, al, be) = (&t.a, &t.b, &t.alpha, &t.beta);
        let mut m0 = Matrix::zeros(s);
        let mut m1 = Matrix::zeros(s);
        let mut mstar = Matrix::zeros(s);
        for i in 0..s {
            for j in 0..s {
                m0[(i, j)] = al[i] * a[(i, j)] + al[j] * a[(j, i)] - al[i] * al[j];
                m1[(i, j)] = be[i] * b[(i, j)] + be[j] * b[(j, i)] - be[i] * be[j];
                mstar[(i, j)] = al[i] * b[(i, j)] + a[(j, i)] * be[j] - al[i] * be[j];
            }
        }
        let max_abs = m0.max_abs().max(m1.max_abs()).max(mstar.max_abs());
        Self {
            m0,
            m1,
            mstar,
            max_abs,
        }
    }
}

fn parse_entry(tok: &str, line: usize) -> Result<f64> {
    let err = |msg: String| Error::Parse { line, msg };
    let value = match tok.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| err(format!("bad numerator in `{tok}`")))?;
            let q: f64 = q.trim().parse().map_err(|_| err(format!("bad denominator in `{tok}`")))?;
            if q == 0.0 {
                return Err(err(format!("zero denominator in `{tok}`")));
            }
            p / q
        }
        None => tok.parse().map_err(|_| err(format!("non-numeric token `{tok}`")))?,
    };
    if !value.is_finite() {
        return Err(err(format!("non-finite entry `{tok}`")));
    }
    Ok(value)
}

struct Cursor<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
    eof_line: usize,
    stages: usize,
}

impl<'a> Cursor<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let item = self.lines.get(self.pos).copied().ok_or_else(|| Error::Parse {
            line: self.eof_line,
            msg: format!("unexpected end of input, missing {what}"),
        })?;
        self.pos += 1;
        Ok(item)
    }

    fn row(&mut self, what: &str) -> Result<Vec<f64>> {
        let (ln, l) = self.next(what)?;
        let row = l
            .split_whitespace()
            .map(|t| parse_entry(t, ln))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != self.stages {
            return Err(Error::Parse {
                line: ln,
                msg: format!("{what} has {} entries, expected s={}", row.len(), self.stages),
            });
        }
        Ok(row)
    }

    fn marker(&mut self, marker: &str) -> Result<()> {
        let (ln, l) = self.next(&format!("section `{marker}`"))?;
        if l.eq_ignore_ascii_case(marker) {
            Ok(())
        } else {
            Err(Error::Parse {
                line: ln,
                msg: format!("expected section `{marker}`, found `{l}`"),
            })
        }
    }
}

fn parse_text(text: &str) -> Result<Tableau> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let mut cur = Cursor {
        lines,
        pos: 0,
        eof_line: text.lines().count().max(1),
        stages: 0,
    };
    let (ln, header) = cur.next("`s=<stages>` header")?;
    cur.stages = header
        .strip_prefix("s")
        .map(str::trim_start)
        .and_then(|v| v.strip_prefix('='))
        .and_then(|v| v.trim().parse().ok())
        .filter(|&s: &usize| s > 0)
        .ok_or_else(|| Error::Parse {
            line: ln,
            msg: format!("expected `s=<positive integer>`, found `{header}`"),
        })?;
    let s = cur.stages;

    let a = (1..=s)
        .map(|i| cur.row(&format!("row {i} of A")))
        .collect::<Result<Vec<_>>>()?;
    cur.marker("B")?;
    let b = (1..=s)
        .map(|i| cur.row(&format!("row {i} of B")))
        .collect::<Result<Vec<_>>>()?;
    cur.marker("alpha")?;
    let alpha = cur.row("alpha")?;
    cur.marker("beta")?;
    let beta = cur.row("beta")?;
    if let Some((ln, l)) = cur.lines.get(cur.pos) {
        return Err(Error::Parse {
            line: *ln,
            msg: format!("trailing content `{l}`"),
        });
    }
    Tableau::new("custom", a, b, alpha, beta)
}
