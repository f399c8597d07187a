//! Seeded Wiener increments, the `√(2k|ln h|)` truncation used by implicit
//! stepping, and dyadic coarsening of fine paths.
//!
//! Increments come from a counter-based stream: ChaCha8 keyed by the base
//! seed, with the path index selecting the stream and the step index the
//! block position. Any increment can be regenerated on its own, so Monte
//! Carlo output does not depend on scheduling or worker count.
//!
//! Paths also keep the running sum `W(tᵢ)`. Coarsening subsamples it, so
//! `W(T)` is bit-identical on every level of a dyadic grid and coarsening
//! composes exactly.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// 32-bit words consumed per normal draw (two `u64`s for Box-Muller).
const WORDS_PER_DRAW: u128 = 4;

/// A sampled Brownian path on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BrownianPath {
    h: f64,
    increments: Vec<f64>,
    /// `W(tᵢ)` for `i = 0..=n`, starting at 0.
    cumulative: Vec<f64>,
    seed: u64,
    path_index: u64,
}

fn running_sum(increments: &[f64]) -> Vec<f64> {
    let mut w = Vec::with_capacity(increments.len() + 1);
    let mut acc = 0.0;
    w.push(acc);
    for dw in increments {
        acc += dw;
        w.push(acc);
    }
    w
}

impl BrownianPath {
    pub fn from_increments(h: f64, increments: Vec<f64>) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Domain(format!("step size must be positive, got {h}")));
        }
        if increments.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("non-finite Wiener increment".into()));
        }
        Ok(Self {
            h,
            cumulative: running_sum(&increments),
            increments,
            seed: 0,
            path_index: 0,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path_index(&self) -> u64 {
        self.path_index
    }

    /// `W(T) − W(0)`.
    pub fn total(&self) -> f64 {
        *self.cumulative.last().expect("running sum starts at W(0)")
    }

    /// `W(tᵢ)` for `i = 0..=n`.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Increments over blocks of `m` fine steps; the step becomes `m·h`.
    pub fn coarsen(&self, m: usize) -> Result<BrownianPath> {
        if m == 0 || !self.len().is_multiple_of(m) {
            return Err(Error::Config(format!(
                "coarsening factor {m} does not divide path length {}",
                self.len()
            )));
        }
        if m == 1 {
            return Ok(self.clone());
        }
        let cumulative: Vec<f64> = self.cumulative.iter().step_by(m).copied().collect();
        Ok(BrownianPath {
            h: self.h * m as f64,
            increments: cumulative.windows(2).map(|w| w[1] - w[0]).collect(),
            cumulative,
            seed: self.seed,
            path_index: self.path_index,
        })
    }

    /// CSV dump: `# seed=…, h=…, n=…` header, then `index,dW` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# seed={}, path={}, h={:?}, n={}",
            self.seed,
            self.path_index,
            self.h,
            self.len()
        );
        out.push_str("index,dW\n");
        for (i, dw) in self.increments.iter().enumerate() {
            let _ = writeln!(out, "{i},{dw:?}");
        }
        out
    }
}

/// Standard normal draw number `index` of stream `path_index`.
pub fn standard_normal_at(seed: u64, path_index: u64, index: u64) -> f64 {
    let mut rng = stream(seed, path_index);
    rng.set_word_pos(WORDS_PER_DRAW * u128::from(index));
    box_muller(&mut rng)
}

fn stream(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

fn box_muller(rng: &mut ChaCha8Rng) -> f64 {
    // u1 ∈ (0, 1] keeps the logarithm finite.
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
    let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// `n` increments `√h·ξ` of path `path_index` under `seed`.
pub fn sample_path(seed: u64, path_index: u64, n: usize, h: f64) -> Result<BrownianPath> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Domain(format!("step size must be positive, got {h}")));
    }
    let mut rng = stream(seed, path_index);
    let sqrt_h = h.sqrt();
    // Sequential reads walk the same word positions as `standard_normal_at`.
    let increments: Vec<f64> = (0..n).map(|_| sqrt_h * box_muller(&mut rng)).collect();
    Ok(BrownianPath {
        h,
        cumulative: running_sum(&increments),
        increments,
        seed,
        path_index,
    })
}

/// Path 0 of `seed`.
pub fn sample_increments(seed: u64, n: usize, h: f64) -> Result<BrownianPath> {
    sample_path(seed, 0, n, h)
}

/// `A_h = √(2k|ln h|)`.
pub fn truncation_level(h: f64, k: u32) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Domain(format!("truncation defined for h<1 (and h>0), got h={h}")));
    }
    if k == 0 {
        return Err(Error::Domain("truncation parameter k must be at least 1".into()));
    }
    Ok((2.0 * f64::from(k) * h.ln().abs()).sqrt())
}

/// Clamp `dW/√h` to `[−A_h, A_h]` and rescale.
pub fn truncate(dw: f64, h: f64, k: u32) -> Result<f64> {
    let bound = h.sqrt() * truncation_level(h, k)?;
    Ok(dw.clamp(-bound, bound))
}
