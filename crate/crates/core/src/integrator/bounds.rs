//! A priori bounds on the quadratic-invariant drift per step of an iterated
//! implicit SRK method.

use crate::error::{Error, Result};
use crate::tableau::Tableau;
use crate::wiener::truncation_level;

/// `√(2kh|ln h|)`, the size of the largest truncated increment.
pub fn sqrt_h_log_h(h: f64, k: u32) -> Result<f64> {
    Ok(h.sqrt() * truncation_level(h, k)?)
}

/// `δ = C₁√(2kh|ln h|)` with `C₁ = max(‖A‖L, ‖B‖M)` in spectral norms.
///
/// `l` and `m` are Lipschitz constants of `f` and `g`. The fixed-point
/// iteration contracts when `δ < 1`.
pub fn contraction_factor(l: f64, m: f64, tab: &Tableau, h: f64, k: u32) -> Result<f64> {
    if !(l >= 0.0 && m >= 0.0) {
        return Err(Error::Domain(format!(
            "Lipschitz constants must be nonnegative, got L={l}, M={m}"
        )));
    }
    let c1 = (tab.a().spectral_norm() * l).max(tab.b().spectral_norm() * m);
    Ok(c1 * sqrt_h_log_h(h, k)?)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Domain(format!("bound requires 0 <= delta < 1, got {delta}")));
    }
    Ok(())
}

/// Per-step drift bound after `n` fixed-point iterations:
/// `‖C‖[C₂²D₁²/C₁⁴·δ^(2N+4) + 2C₂D₀D₁/C₁²·δ^(N+2)]`.
pub fn fixed_point_qi_bound(norm_c: f64, c1: f64, c2: f64, d0: f64, d1: f64, delta: f64, n: u32) -> Result<f64> {
    check_delta(delta)?;
    if !(c1 > 0.0) {
        return Err(Error::Domain(format!("C1 must be positive, got {c1}")));
    }
    let n = i32::try_from(n).map_err(|_| Error::Domain("iteration count too large".into()))?;
    let quad = c2 * c2 * d1 * d1 / c1.powi(4) * delta.powi(2 * n + 4);
    let cross = 2.0 * c2 * d0 * d1 / (c1 * c1) * delta.powi(n + 2);
    Ok(norm_c * (quad + cross))
}

/// Per-step drift bound after `n` Newton iterations:
/// `‖C‖[C₂²/(D₁²γ⁴)·δ̂^(2^(N+1)+2) + 2C₂D₀/(D₁γ²)·δ̂^(2^N+1)]`.
pub fn newton_qi_bound(norm_c: f64, c2: f64, d0: f64, d1: f64, gamma: f64, delta_hat: f64, n: u32) -> Result<f64> {
    check_delta(delta_hat)?;
    if !(d1 > 0.0 && gamma > 0.0) {
        return Err(Error::Domain(format!("D1 and gamma must be positive, got {d1}, {gamma}")));
    }
    if n > 20 {
        // δ̂^(2^21) underflows for every δ̂ < 1.
        return Ok(0.0);
    }
    let e1 = 2f64.powi(n as i32 + 1) + 2.0;
    let e2 = 2f64.powi(n as i32) + 1.0;
    let quad = c2 * c2 / (d1 * d1 * gamma.powi(4)) * delta_hat.powf(e1);
    let cross = 2.0 * c2 * d0 / (d1 * gamma * gamma) * delta_hat.powf(e2);
    Ok(norm_c * (quad + cross))
}
