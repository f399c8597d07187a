//! Midpoint rule with a fixed number of fixed-point iterations on the Kubo
//! oscillator: sweeps over `N`, `h` or `T`, and rate fits against
//! `√(h|ln h|)` with the a priori bound alongside.

use std::str::FromStr;

use super::{fmt_list, loglog_fit, max, mean, run_indexed, spearman, step_count, MonteCarlo, StudyResult};
use crate::error::{Error, Result};
use crate::integrator::{contraction_factor, fixed_point_qi_bound, integrate, IterationPolicy};
use crate::linalg::norm2;
use crate::problems::{invariant_value, kubo_system, SdeSystem};
use crate::tableau::Builtin;
use crate::wiener::sample_path;

/// Drifts below this are treated as round-off.
pub const NOISE_FLOOR: f64 = 1e-14;

/// Kubo oscillator and iteration settings shared by the sweeps.
#[derive(Clone, Debug, PartialEq)]
pub struct KuboSweepParams {
    pub a: f64,
    pub sigma: f64,
    pub h: f64,
    pub t_end: f64,
    /// Fixed-point iterations per step.
    pub iterations: usize,
    /// Wiener truncation parameter.
    pub k: u32,
    pub y0: Vec<f64>,
}

impl Default for KuboSweepParams {
    fn default() -> Self {
        Self {
            a: 2.0,
            sigma: 0.3,
            h: 0.05,
            t_end: 800.0,
            iterations: 2,
            k: 2,
            y0: vec![1.0, 0.0],
        }
    }
}

impl KuboSweepParams {
    fn policy(&self) -> IterationPolicy {
        IterationPolicy::fixed_point(self.iterations).with_truncation(Some(self.k))
    }

    fn echo(&self) -> Vec<(String, String)> {
        vec![
            ("scheme".into(), "midpoint".into()),
            ("problem".into(), "kubo".into()),
            ("a".into(), self.a.to_string()),
            ("sigma".into(), self.sigma.to_string()),
            ("k".into(), self.k.to_string()),
            ("y0".into(), fmt_list(&self.y0)),
        ]
    }

    /// `(|I(y_V) − I(y₀)|, max ‖yₙ‖)` along path `p`.
    fn run_path(&self, seed: u64, p: usize) -> Result<(f64, f64)> {
        let sys = kubo_system(self.a, self.sigma);
        let n = step_count(self.t_end, self.h)?;
        let path = sample_path(seed, p as u64, n, self.h)?;
        let traj = integrate(&Builtin::Midpoint.tableau(), &sys, &self.y0, self.h, n, &self.policy(), &path)?;
        let c = &sys.invariants()[0];
        let drift = (invariant_value(c, traj.final_state())? - invariant_value(c, &self.y0)?).abs();
        let radius = traj.states.iter().map(|y| norm2(y)).fold(0.0, f64::max);
        Ok((drift, radius))
    }
}

/// Which parameter an iteration sweep varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    Iterations,
    StepSize,
    Horizon,
}

impl SweepAxis {
    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::Iterations => "N",
            SweepAxis::StepSize => "h",
            SweepAxis::Horizon => "T",
        }
    }

    /// Direction the drift should move as the value grows.
    fn expected_sign(self) -> f64 {
        match self {
            SweepAxis::Iterations => -1.0,
            _ => 1.0,
        }
    }

    fn apply(self, base: &KuboSweepParams, value: f64) -> Result<KuboSweepParams> {
        let mut p = base.clone();
        match self {
            SweepAxis::Iterations => {
                if !(value >= 0.0) || value.fract() != 0.0 {
                    return Err(Error::Config(format!("iteration count must be a nonnegative integer, got {value}")));
                }
                p.iterations = value as usize;
            }
            SweepAxis::StepSize => {
                if !(value > 0.0 && value < 1.0) {
                    return Err(Error::Config(format!("step size must lie in (0, 1), got {value}")));
                }
                p.h = value;
            }
            SweepAxis::Horizon => p.t_end = value,
        }
        step_count(p.t_end, p.h)?;
        Ok(p)
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "N" | "n" => Ok(SweepAxis::Iterations),
            "h" | "H" => Ok(SweepAxis::StepSize),
            "T" | "t" => Ok(SweepAxis::Horizon),
            _ => Err(Error::Config(format!("unknown sweep axis `{s}`; valid axes: N, h, T"))),
        }
    }
}

/// Per value: mean over paths of `ln|I(y_V) − I(y₀)|`, the log of the mean
/// drift, and the maximum drift.
pub fn iteration_sweep(
    axis: SweepAxis,
    values: &[f64],
    base: &KuboSweepParams,
    mc: &MonteCarlo,
) -> Result<StudyResult> {
    mc.validate()?;
    if values.is_empty() {
        return Err(Error::Config("sweep values are empty".into()));
    }
    let params: Vec<KuboSweepParams> = values.iter().map(|&v| axis.apply(base, v)).collect::<Result<_>>()?;
    let per_path = run_indexed(mc.n_paths, mc.workers, |p| {
        params.iter().map(|q| q.run_path(mc.seed, p).map(|r| r.0)).collect::<Result<Vec<f64>>>()
    })?;

    let mut config = base.echo();
    config.push(("axis".into(), axis.label().into()));
    config.push(("values".into(), fmt_list(values)));
    if axis != SweepAxis::Iterations {
        config.push(("N".into(), base.iterations.to_string()));
    }
    if axis != SweepAxis::StepSize {
        config.push(("h".into(), base.h.to_string()));
    }
    if axis != SweepAxis::Horizon {
        config.push(("T".into(), base.t_end.to_string()));
    }
    mc.echo(&mut config);
    let mut out = StudyResult::new(
        "iteration-sweep",
        config,
        &[axis.label(), "mean_log_drift", "log_mean_drift", "max_drift"],
    );
    for (i, &v) in values.iter().enumerate() {
        let d: Vec<f64> = per_path.iter().map(|row| row[i]).collect();
        let logs: Vec<f64> = d.iter().map(|x| x.max(f64::MIN_POSITIVE).ln()).collect();
        out.rows.push(vec![v, mean(&logs), mean(&d).max(f64::MIN_POSITIVE).ln(), max(&d)]);
    }

    // Monotonicity is judged on rows above the noise floor.
    let live: Vec<&Vec<f64>> = out.rows.iter().filter(|r| r[2] > NOISE_FLOOR.ln()).collect();
    if live.len() >= 2 {
        let xs: Vec<f64> = live.iter().map(|r| r[0]).collect();
        let ys: Vec<f64> = live.iter().map(|r| r[1]).collect();
        let rho = spearman(&xs, &ys)?;
        out.metrics.push(("spearman".into(), rho));
        let sign = axis.expected_sign();
        let strict = ys.windows(2).all(|w| sign * (w[1] - w[0]) > 0.0);
        let word = if sign < 0.0 { "decreasing" } else { "increasing" };
        if strict {
            out.findings.push(format!("mean log-drift strictly {word} in {} above the noise floor", axis.label()));
        } else {
            let breaks: Vec<String> = ys
                .windows(2)
                .zip(xs.windows(2))
                .filter(|(w, _)| !(sign * (w[1] - w[0]) > 0.0))
                .map(|(w, x)| format!("{}->{} ({:.4} -> {:.4})", x[0], x[1], w[0], w[1]))
                .collect();
            out.findings.push(format!(
                "mean log-drift not strictly {word} in {}; breaks at {}",
                axis.label(),
                breaks.join(", ")
            ));
        }
    }
    let floored = out.rows.len() - live.len();
    if floored > 0 {
        out.findings.push(format!("{floored} row(s) at the {NOISE_FLOOR:e} noise floor"));
    }
    Ok(out)
}

/// Fit of `ln(mean drift)` against `ln √(h|ln h|)` for a fixed iteration
/// count, with the a priori global bound `V·bound_per_step` per row.
///
/// Bound constants come from the Kubo fields on a ball of radius `R`, the
/// largest state norm seen: `L = a`, `M = σ`, `C₀ = aR`, `C̃₀ = σR`,
/// `D₀ = ‖y₀‖ + 2R`.
pub fn fixed_point_rate_study(base: &KuboSweepParams, h_list: &[f64], mc: &MonteCarlo) -> Result<StudyResult> {
    mc.validate()?;
    if h_list.len() < 2 {
        return Err(Error::Domain("rate fit needs at least 2 step sizes".into()));
    }
    let params: Vec<KuboSweepParams> = h_list
        .iter()
        .map(|&h| SweepAxis::StepSize.apply(base, h))
        .collect::<Result<_>>()?;
    let per_path = run_indexed(mc.n_paths, mc.workers, |p| {
        params.iter().map(|q| q.run_path(mc.seed, p)).collect::<Result<Vec<(f64, f64)>>>()
    })?;

    let n_iter = base.iterations;
    let mut config = base.echo();
    config.push(("N".into(), n_iter.to_string()));
    config.push(("T".into(), base.t_end.to_string()));
    config.push(("h_grid".into(), fmt_list(h_list)));
    mc.echo(&mut config);
    let mut out = StudyResult::new(
        "rate",
        config,
        &["h", "sqrt_h_log_h", "mean_drift", "max_drift", "delta", "bound"],
    );

    let tab = Builtin::Midpoint.tableau();
    let (norm_a, norm_b) = (tab.a().spectral_norm(), tab.b().spectral_norm());
    let norm_alpha = norm2(tab.alpha());
    let norm_beta = norm2(tab.beta());
    let (a, sigma) = (base.a, base.sigma);
    let c1 = (norm_a * a).max(norm_b * sigma);
    let c2 = norm_alpha * a + norm_beta * sigma;
    let y0_norm = norm2(&base.y0);
    let mut flagged = Vec::new();
    let mut exceed = Vec::new();
    for (i, q) in params.iter().enumerate() {
        let drifts: Vec<f64> = per_path.iter().map(|r| r[i].0).collect();
        let radius = per_path.iter().map(|r| r[i].1).fold(y0_norm, f64::max);
        let x = (q.h * q.h.ln().abs()).sqrt();
        let delta = contraction_factor(a, sigma, &tab, q.h, q.k)?;
        let bound = if delta < 1.0 {
            let d1 = norm_a * a * radius + norm_b * sigma * radius;
            let d0 = y0_norm + 2.0 * radius;
            let per_step = fixed_point_qi_bound(1.0, c1, c2, d0, d1, delta, n_iter as u32)?;
            per_step * step_count(q.t_end, q.h)? as f64
        } else {
            flagged.push(q.h);
            f64::NAN
        };
        let (m, mx) = (mean(&drifts), max(&drifts));
        if bound.is_finite() && mx > bound {
            exceed.push(q.h);
        }
        out.rows.push(vec![q.h, x, m, mx, delta, bound]);
    }

    let lower = n_iter as f64 + 2.0;
    let upper = 2.0 * n_iter as f64 + 4.0;
    out.metrics.push(("reference_slope_low".into(), lower));
    out.metrics.push(("reference_slope_high".into(), upper));
    let floor = 1e-15 * step_count(base.t_end, h_list.iter().copied().fold(f64::INFINITY, f64::min))? as f64;
    let pts: Vec<(f64, f64)> = out.rows.iter().map(|r| (r[1], r[2])).collect();
    let at_floor = pts.iter().any(|&(_, y)| y <= floor);
    match loglog_fit(&pts) {
        Ok(fit) => {
            out.fit = Some(fit);
            let inside = fit.slope >= lower - 1.0 && fit.slope <= upper + 1.0;
            out.findings.push(format!(
                "slope {:.3} {} [{}, {}] (references {lower} and {upper})",
                fit.slope,
                if inside { "inside" } else { "outside" },
                lower - 1.0,
                upper + 1.0
            ));
            if at_floor || fit.max_residual > 1.0 {
                out.findings.push("floor-limited fit: drift near round-off level".into());
            }
        }
        Err(_) => out.findings.push("floor-limited fit: zero drift at some h; slope not fitted".into()),
    }
    if !flagged.is_empty() {
        out.findings.push(format!("bound not evaluated where delta >= 1: h = {}", fmt_list(&flagged)));
    }
    if exceed.is_empty() {
        out.findings.push("measured drift within the a priori bound at every evaluated h".into());
    } else {
        out.findings.push(format!("measured drift exceeds the a priori bound at h = {}", fmt_list(&exceed)));
    }
    out.metrics.push(("bound_exceedances".into(), exceed.len() as f64));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> KuboSweepParams {
        KuboSweepParams {
            t_end: 5.0,
            ..KuboSweepParams::default()
        }
    }

    #[test]
    fn axis_parsing_and_validation() {
        assert_eq!("N".parse::<SweepAxis>().unwrap(), SweepAxis::Iterations);
        assert_eq!("h".parse::<SweepAxis>().unwrap(), SweepAxis::StepSize);
        assert!("x".parse::<SweepAxis>().is_err());
        assert!(SweepAxis::Iterations.apply(&small(), 1.5).is_err());
        assert!(SweepAxis::StepSize.apply(&small(), 1.0).is_err());
        assert!(SweepAxis::Horizon.apply(&small(), 0.123).is_err());
    }

    #[test]
    fn drift_grows_with_horizon() {
        let res = iteration_sweep(SweepAxis::Horizon, &[5.0, 10.0, 20.0], &small(), &MonteCarlo::new(20, 42)).unwrap();
        let logs = res.column("mean_log_drift").unwrap();
        assert!(logs[0] < logs[2], "{logs:?}");
        assert_eq!(res.columns[0], "T");
    }

    #[test]
    fn more_iterations_reduce_drift_coarsely() {
        let res = iteration_sweep(SweepAxis::Iterations, &[1.0, 3.0, 6.0], &small(), &MonteCarlo::new(20, 42)).unwrap();
        let logs = res.column("mean_log_drift").unwrap();
        assert!(logs[0] > logs[1] && logs[1] > logs[2], "{logs:?}");
    }

    #[test]
    fn rate_study_reports_bound() {
        let res = fixed_point_rate_study(&small(), &[0.01, 0.04], &MonteCarlo::new(10, 1)).unwrap();
        assert!(res.fit.is_some());
        assert_eq!(res.metric("bound_exceedances"), Some(0.0));
        let bounds = res.column("bound").unwrap();
        assert!(bounds.iter().all(|b| b.is_finite()));
        assert!(fixed_point_rate_study(&small(), &[0.01], &MonteCarlo::new(1, 1)).is_err());
    }
}
