//! Seeded Monte Carlo studies: invariant-drift and strong-order fits,
//! long-time runs, fixed-point iteration sweeps, rate checks against
//! `√(h|ln h|)`, and circle evolution under a single Brownian path.
//!
//! Every study returns a [`StudyResult`] whose rows depend only on the
//! configuration and seed. Per-path work runs on a rayon pool and lands in
//! index-addressed slots, so the worker count never changes the output.

mod circle;
mod drift;
mod long_time;
mod sweeps;

use std::fmt::Write as _;

use rayon::prelude::*;

pub use circle::{circle_evolution, polygon_baseline, shoelace_area, CircleConfig};
pub use drift::{drift_order_study, reference_drift_slope, strong_order_study, GridConfig};
pub use long_time::{long_time_trajectory, Method};
pub use sweeps::{
    fixed_point_rate_study, iteration_sweep, KuboSweepParams, SweepAxis, NOISE_FLOOR,
};

use crate::error::{Error, Result};
use crate::problems::SdeSystem;

pub const DEFAULT_PATHS: usize = 200;
pub const DEFAULT_SEED: u64 = 42;

/// Path count, base seed and optional worker count shared by the studies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MonteCarlo {
    pub n_paths: usize,
    pub seed: u64,
    /// `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl Default for MonteCarlo {
    fn default() -> Self {
        Self {
            n_paths: DEFAULT_PATHS,
            seed: DEFAULT_SEED,
            workers: None,
        }
    }
}

impl MonteCarlo {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        Self {
            n_paths,
            seed,
            workers: None,
        }
    }

    pub fn with_workers(mut self, workers: Option<usize>) -> Self {
        self.workers = workers;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::Config("path count must be positive".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("worker count must be positive".into()));
        }
        Ok(())
    }

    fn echo(&self, config: &mut Vec<(String, String)>) {
        config.push(("paths".into(), self.n_paths.to_string()));
        config.push(("seed".into(), self.seed.to_string()));
    }
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute deviation of `ln y` from the fitted line.
    pub max_residual: f64,
}

pub fn loglog_fit(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.len() < 2 {
        return Err(Error::Domain(format!(
            "a log-log fit needs at least 2 points, got {}",
            points.len()
        )));
    }
    if let Some(&(x, y)) = points.iter().find(|&&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::Domain(format!("log-log fit needs positive coordinates, got ({x}, {y})")));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("log-log fit needs distinct x values".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = logs
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).abs())
        .fold(0.0, f64::max);
    Ok(LogLogFit {
        slope,
        intercept,
        max_residual,
    })
}

/// Spearman rank correlation, with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Domain("rank correlation needs two equal-length series of length >= 2".into()));
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = rx.len() as f64;
    let m = (n + 1.0) / 2.0;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - m) * (b - m)).sum();
    let vx: f64 = rx.iter().map(|a| (a - m).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - m).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return Ok(0.0);
    }
    Ok(cov / (vx * vy).sqrt())
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Output of one study.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyResult {
    pub study: String,
    /// Effective configuration, defaults included.
    pub config: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub fit: Option<LogLogFit>,
    /// Scalar outcomes such as the maximum drift or the final area.
    pub metrics: Vec<(String, f64)>,
    /// Audit notes; these never fail a run.
    pub findings: Vec<String>,
}

impl StudyResult {
    fn new(study: &str, config: Vec<(String, String)>, columns: &[&str]) -> Self {
        Self {
            study: study.to_string(),
            config,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            fit: None,
            metrics: Vec::new(),
            findings: Vec::new(),
        }
    }

    pub fn fitted_slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(k, _)| k == name).map(|&(_, v)| v)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// `#`-prefixed configuration, fit, metrics and findings, then the table.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# study={}", self.study);
        for (k, v) in &self.config {
            let _ = writeln!(out, "# {k}={v}");
        }
        if let Some(fit) = &self.fit {
            let _ = writeln!(out, "# fitted_slope={:.6}", fit.slope);
            let _ = writeln!(out, "# fit_intercept={:.6}", fit.intercept);
            let _ = writeln!(out, "# fit_max_residual={:.3e}", fit.max_residual);
        }
        for (k, v) in &self.metrics {
            let _ = writeln!(out, "# {k}={v:?}");
        }
        for f in &self.findings {
            let _ = writeln!(out, "# finding: {f}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Run `f(0..n)` on the pool, returning results in index order. The error
/// reported is the one with the lowest index.
fn run_indexed<T, F>(n: usize, workers: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let job = || (0..n).into_par_iter().map(&f).collect::<Vec<Result<T>>>();
    let slots = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?
            .install(job),
        None => job(),
    };
    slots.into_iter().collect()
}

/// Number of steps `T/h`, required to be an integer.
fn step_count(t_end: f64, h: f64) -> Result<usize> {
    if !(h > 0.0) || !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::Config(format!("need h > 0 and T >= 0, got h={h}, T={t_end}")));
    }
    let ratio = t_end / h;
    let n = ratio.round();
    if (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::Config(format!("T={t_end} is not an integer multiple of h={h}")));
    }
    Ok(n as usize)
}

/// The first quadratic invariant of `sys`, or a configuration error.
fn quadratic_invariant(sys: &dyn SdeSystem) -> Result<&crate::linalg::Matrix> {
    sys.invariants()
        .first()
        .ok_or_else(|| Error::Config(format!("system `{}` has no quadratic invariant", sys.name())))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn max(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(";")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fit_examples() {
        let f = loglog_fit(&[(1.0, 1.0), (2.0, 4.0), (4.0, 16.0)]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && f.max_residual < 1e-14);
        let f = loglog_fit(&[(1.0, 3.0), (2.0, 3.0), (5.0, 3.0)]).unwrap();
        assert!(f.slope.abs() < 1e-14);
        let pts: Vec<(f64, f64)> = [0.1, 0.2, 0.4, 0.8].iter().map(|&x: &f64| (x, 7.0 * x.powf(1.5))).collect();
        let f = loglog_fit(&pts).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-12);
        assert!((f.intercept - 7f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn fit_errors() {
        assert!(loglog_fit(&[(1.0, 1.0)]).is_err());
        assert!(loglog_fit(&[(1.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(loglog_fit(&[(1.0, -1.0), (2.0, 2.0)]).is_err());
        assert!(loglog_fit(&[(2.0, 1.0), (2.0, 3.0)]).is_err());
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        let r = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
    }

    #[test]
    fn step_count_checks() {
        assert_eq!(step_count(1.0, 0.0625).unwrap(), 16);
        assert_eq!(step_count(500.0, 0.01).unwrap(), 50_000);
        assert!(step_count(1.0, 0.3).is_err());
        assert_eq!(step_count(0.0, 0.1).unwrap(), 0);
    }

    #[test]
    fn indexed_results_keep_order() {
        let v = run_indexed(50, Some(3), |i| Ok(i * i)).unwrap();
        assert_eq!(v, (0..50).map(|i| i * i).collect::<Vec<_>>());
        let err = run_indexed(10, None, |i| {
            if i >= 4 {
                Err(Error::Config(format!("{i}")))
            } else {
                Ok(i)
            }
        });
        assert!(matches!(err, Err(Error::Config(m)) if m == "4"));
    }

    proptest! {
        #[test]
        fn fit_recovers_power_laws(slope in -4.0f64..4.0, c in 0.1f64..10.0) {
            let pts: Vec<(f64, f64)> = [0.01, 0.03, 0.1, 0.5].iter().map(|&x: &f64| (x, c * x.powf(slope))).collect();
            let f = loglog_fit(&pts).unwrap();
            prop_assert!((f.slope - slope).abs() < 1e-10);
            prop_assert!(f.max_residual < 1e-10);
        }
    }
}
