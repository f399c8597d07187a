//! One-step and trajectory integration with SRK tableaux.
//!
//! Implicit stages are approximated iteratively, starting from `Y⁽⁰⁾ = e⊗yₙ`,
//! either by fixed-point sweeps or by Newton's method on the stage residual
//! `Y − e⊗yₙ − h(A⊗I)F(Y) − ΔW̄(B⊗I)G(Y)`. After `N` iterations the update
//! `yₙ₊₁ = yₙ + h(αᵀ⊗I)F(Y⁽ᴺ⁾) + ΔW̄(βᵀ⊗I)G(Y⁽ᴺ⁾)` is formed with the same
//! (possibly truncated) increment used in the stage equation.

mod bounds;
mod milstein;
mod stages;

use std::fmt::Write as _;

pub use bounds::{contraction_factor, fixed_point_qi_bound, newton_qi_bound, sqrt_h_log_h};
pub use milstein::kubo_milstein_step;
pub use stages::{fixed_point_solve, newton_solve, stage_residual};

use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::problems::SdeSystem;
use crate::tableau::Tableau;
use crate::wiener::{truncate, BrownianPath};

/// States with norm above this abort the run.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Default truncation parameter `k` for iterative stepping.
pub const DEFAULT_TRUNCATION_K: u32 = 2;

pub const DEFAULT_MAX_ITERATIONS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    /// Stage-by-stage sweep; requires an explicit tableau.
    Explicit,
    FixedPoint,
    Newton,
}

/// When an iterative stage solve stops.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stopping {
    /// Exactly `N` iterations.
    Count(usize),
    /// Until the norm of the last update is at most the tolerance.
    Tolerance(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum JacobianMode {
    /// Use the system's Jacobians, falling back to finite differences when
    /// the system does not provide them.
    #[default]
    Analytic,
    FiniteDifference,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationPolicy {
    pub kind: SolverKind,
    pub stopping: Option<Stopping>,
    pub max_iterations: usize,
    pub truncation_k: Option<u32>,
    pub jacobian_mode: JacobianMode,
}

impl IterationPolicy {
    pub fn explicit() -> Self {
        Self {
            kind: SolverKind::Explicit,
            stopping: None,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            truncation_k: None,
            jacobian_mode: JacobianMode::Analytic,
        }
    }

    fn iterative(kind: SolverKind, stopping: Stopping) -> Self {
        let max_iterations = match stopping {
            Stopping::Count(n) => n.max(DEFAULT_MAX_ITERATIONS),
            Stopping::Tolerance(_) => DEFAULT_MAX_ITERATIONS,
        };
        Self {
            kind,
            stopping: Some(stopping),
            max_iterations,
            truncation_k: Some(DEFAULT_TRUNCATION_K),
            jacobian_mode: JacobianMode::Analytic,
        }
    }

    pub fn fixed_point(iterations: usize) -> Self {
        Self::iterative(SolverKind::FixedPoint, Stopping::Count(iterations))
    }

    pub fn fixed_point_tol(tol: f64) -> Self {
        Self::iterative(SolverKind::FixedPoint, Stopping::Tolerance(tol))
    }

    pub fn newton(iterations: usize) -> Self {
        Self::iterative(SolverKind::Newton, Stopping::Count(iterations))
    }

    pub fn newton_tol(tol: f64) -> Self {
        Self::iterative(SolverKind::Newton, Stopping::Tolerance(tol))
    }

    pub fn with_truncation(mut self, k: Option<u32>) -> Self {
        self.truncation_k = k;
        self
    }

    pub fn with_max_iterations(mut self, max: usize) -> Self {
        self.max_iterations = max;
        self
    }

    pub fn with_jacobian_mode(mut self, mode: JacobianMode) -> Self {
        self.jacobian_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, self.stopping) {
            (SolverKind::Explicit, Some(_)) => {
                Err(Error::Config("explicit policy takes no iteration count or tolerance".into()))
            }
            (SolverKind::FixedPoint | SolverKind::Newton, None) => Err(Error::Config(
                "iterative policy needs an iteration count or a tolerance".into(),
            )),
            (_, Some(Stopping::Count(n))) if n > self.max_iterations => Err(Error::Config(format!(
                "iteration count {n} exceeds max_iterations {}",
                self.max_iterations
            ))),
            (_, Some(Stopping::Tolerance(t))) if !(t >= 0.0) => {
                Err(Error::Config(format!("residual tolerance must be nonnegative, got {t}")))
            }
            _ if self.truncation_k == Some(0) => {
                Err(Error::Config("truncation parameter k must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// One-line description for configuration echoes.
    pub fn describe(&self) -> String {
        let kind = match self.kind {
            SolverKind::Explicit => "explicit",
            SolverKind::FixedPoint => "fixed-point",
            SolverKind::Newton => "newton",
        };
        let stop = match self.stopping {
            None => String::new(),
            Some(Stopping::Count(n)) => format!(" iterations={n}"),
            Some(Stopping::Tolerance(t)) => format!(" tol={t:e}"),
        };
        let trunc = match self.truncation_k {
            Some(k) => format!(" truncation_k={k}"),
            None => " truncation=off".to_string(),
        };
        format!("{kind}{stop}{trunc} max_iterations={}", self.max_iterations)
    }
}

/// Per-step solver diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct StepStats {
    pub iterations_used: usize,
    /// Norm of `Y − D(Y)` at the accepted stage vector.
    pub final_stage_residual: f64,
    /// Whether the increment was clamped by the truncation.
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub per_step_stats: Vec<StepStats>,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// `# key=value` header lines, then `n,t,y_1..y_d,iterations,residual`.
    pub fn to_csv(&self, config: &[(String, String)]) -> String {
        let mut out = String::new();
        for (k, v) in config {
            let _ = writeln!(out, "# {k}={v}");
        }
        let d = self.states.first().map_or(0, Vec::len);
        out.push_str("n,t");
        for i in 1..=d {
            let _ = write!(out, ",y_{i}");
        }
        out.push_str(",iterations,residual\n");
        for (n, (t, y)) in self.times.iter().zip(&self.states).enumerate() {
            let _ = write!(out, "{n},{t:?}");
            for v in y {
                let _ = write!(out, ",{v:?}");
            }
            let stats = n.checked_sub(1).map(|i| self.per_step_stats[i]).unwrap_or_default();
            let _ = writeln!(out, ",{},{:e}", stats.iterations_used, stats.final_stage_residual);
        }
        out
    }
}

pub(crate) fn check_finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Divergence(format!("non-finite {what}")));
    }
    let n = norm2(v);
    if n > DIVERGENCE_LIMIT {
        return Err(Error::Divergence(format!("{what} norm {n:e} exceeds {DIVERGENCE_LIMIT:e}")));
    }
    Ok(())
}

fn check_dims(tab: &Tableau, sys: &dyn SdeSystem, y: &[f64], h: f64) -> Result<()> {
    let _ = tab;
    if y.len() != sys.dim() {
        return Err(Error::Dimension(format!(
            "state has length {}, system `{}` has dimension {}",
            y.len(),
            sys.name(),
            sys.dim()
        )));
    }
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::Domain(format!("step size must be nonnegative, got {h}")));
    }
    Ok(())
}

/// `y + h Σ αᵢ f(Yᵢ) + ΔW Σ βᵢ g(Yᵢ)` from stage field values.
fn combine(tab: &Tableau, y: &[f64], h: f64, dw: f64, f: &[Vec<f64>], g: &[Vec<f64>]) -> Vec<f64> {
    let mut out = y.to_vec();
    for i in 0..tab.stages() {
        let (al, be) = (tab.alpha()[i], tab.beta()[i]);
        for (k, o) in out.iter_mut().enumerate() {
            *o += h * al * f[i][k] + dw * be * g[i][k];
        }
    }
    out
}

/// Drift and diffusion values at each stage.
type StageFields = (Vec<Vec<f64>>, Vec<Vec<f64>>);

/// One step of an explicit tableau, stages in increasing order.
pub fn explicit_step(tab: &Tableau, sys: &dyn SdeSystem, y: &[f64], h: f64, dw: f64) -> Result<Vec<f64>> {
    if !tab.is_explicit() {
        return Err(Error::Contract(format!(
            "tableau `{}` is not explicit; use a fixed-point or Newton policy",
            tab.name()
        )));
    }
    check_dims(tab, sys, y, h)?;
    let (f, g) = explicit_stage_fields(tab, sys, y, h, dw)?;
    let out = combine(tab, y, h, dw, &f, &g);
    check_finite(&out, "state")?;
    Ok(out)
}

fn explicit_stage_fields(
    tab: &Tableau,
    sys: &dyn SdeSystem,
    y: &[f64],
    h: f64,
    dw: f64,
) -> Result<StageFields> {
    let s = tab.stages();
    let mut f: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut g: Vec<Vec<f64>> = Vec::with_capacity(s);
    for i in 0..s {
        let mut stage = y.to_vec();
        for j in 0..i {
            let (a, b) = (tab.a()[(i, j)], tab.b()[(i, j)]);
            for (k, v) in stage.iter_mut().enumerate() {
                *v += h * a * f[j][k] + dw * b * g[j][k];
            }
        }
        check_finite(&stage, "stage")?;
        f.push(sys.drift(&stage));
        g.push(sys.diffusion(&stage));
    }
    Ok((f, g))
}

/// The increment actually used by a policy: truncated iff `truncation_k` is set.
pub fn effective_increment(dw: f64, h: f64, policy: &IterationPolicy) -> Result<(f64, bool)> {
    match policy.truncation_k {
        Some(k) => {
            let t = truncate(dw, h, k)?;
            Ok((t, t != dw))
        }
        None => Ok((dw, false)),
    }
}

/// Advance one step under `policy`.
pub fn step(
    tab: &Tableau,
    sys: &dyn SdeSystem,
    y: &[f64],
    h: f64,
    dw: f64,
    policy: &IterationPolicy,
) -> Result<(Vec<f64>, StepStats)> {
    policy.validate()?;
    check_dims(tab, sys, y, h)?;
    let (dw, truncated) = effective_increment(dw, h, policy)?;
    let (f, g, mut stats) = match policy.kind {
        SolverKind::Explicit => {
            if !tab.is_explicit() {
                return Err(Error::Contract(format!(
                    "explicit policy requires an explicit tableau, `{}` is implicit",
                    tab.name()
                )));
            }
            let (f, g) = explicit_stage_fields(tab, sys, y, h, dw)?;
            (f, g, StepStats::default())
        }
        SolverKind::FixedPoint => {
            let sol = stages::solve_fixed_point(tab, sys, y, h, dw, policy)?;
            (sol.f, sol.g, sol.stats)
        }
        SolverKind::Newton => {
            let sol = stages::solve_newton(tab, sys, y, h, dw, policy)?;
            (sol.f, sol.g, sol.stats)
        }
    };
    stats.truncated = truncated;
    let out = combine(tab, y, h, dw, &f, &g);
    check_finite(&out, "state")?;
    Ok((out, stats))
}

/// Fold [`step`] over the first `n_steps` increments of `path`.
pub fn integrate(
    tab: &Tableau,
    sys: &dyn SdeSystem,
    y0: &[f64],
    h: f64,
    n_steps: usize,
    policy: &IterationPolicy,
    path: &BrownianPath,
) -> Result<Trajectory> {
    policy.validate()?;
    if path.len() < n_steps {
        return Err(Error::Config(format!(
            "path has {} increments, {n_steps} steps requested",
            path.len()
        )));
    }
    if (path.h() - h).abs() > 1e-12 * h.max(path.h()) {
        return Err(Error::Config(format!("path step {} differs from h={h}", path.h())));
    }
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut per_step_stats = Vec::with_capacity(n_steps);
    times.push(0.0);
    states.push(y0.to_vec());
    for (n, &dw) in path.increments()[..n_steps].iter().enumerate() {
        let current = states.last().expect("nonempty");
        let (next, stats) = step(tab, sys, current, h, dw, policy).map_err(|e| Error::StepFailed {
            step: n,
            last_state: current.clone(),
            source: Box::new(e),
        })?;
        times.push((n + 1) as f64 * h);
        states.push(next);
        per_step_stats.push(stats);
    }
    Ok(Trajectory {
        times,
        states,
        per_step_stats,
    })
}
