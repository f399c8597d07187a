//! A single long trajectory with the invariant recorded at every step.

use super::{quadratic_invariant, step_count, StudyResult};
use crate::error::{Error, Result};
use crate::integrator::{integrate, kubo_milstein_step, IterationPolicy, DIVERGENCE_LIMIT};
use crate::problems::{invariant_value, SdeSystem};
use crate::tableau::Tableau;
use crate::wiener::sample_path;

/// What advances the state.
#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    Srk { tableau: Tableau, policy: IterationPolicy },
    /// Kubo-specific Milstein comparator on raw increments.
    KuboMilstein { a: f64, sigma: f64 },
}

impl Method {
    pub fn label(&self) -> String {
        match self {
            Method::Srk { tableau, .. } => tableau.name().to_string(),
            Method::KuboMilstein { .. } => "milstein".to_string(),
        }
    }
}

/// Rows `n, t, y_1..y_d, invariant, drift` along path 0 of `seed`; the
/// metric `max_drift` is `max |I(yₙ) − I(y₀)|`.
pub fn long_time_trajectory(
    method: &Method,
    sys: &dyn SdeSystem,
    y0: &[f64],
    t_end: f64,
    h: f64,
    seed: u64,
) -> Result<StudyResult> {
    let c = quadratic_invariant(sys)?;
    let n = step_count(t_end, h)?;
    let path = sample_path(seed, 0, n, h)?;
    let states: Vec<Vec<f64>> = match method {
        Method::Srk { tableau, policy } => integrate(tableau, sys, y0, h, n, policy, &path)?.states,
        Method::KuboMilstein { a, sigma } => {
            if y0.len() != 2 || sys.dim() != 2 {
                return Err(Error::Dimension("the Milstein comparator needs a 2-dimensional Kubo state".into()));
            }
            let mut y = [y0[0], y0[1]];
            let mut states = vec![y.to_vec()];
            for (i, &dw) in path.increments().iter().enumerate() {
                let next = kubo_milstein_step(y, *a, *sigma, h, dw);
                if !next.iter().all(|v| v.is_finite() && v.abs() <= DIVERGENCE_LIMIT) {
                    return Err(Error::StepFailed {
                        step: i,
                        last_state: y.to_vec(),
                        source: Box::new(Error::Divergence("Milstein state left the finite range".into())),
                    });
                }
                y = next;
                states.push(y.to_vec());
            }
            states
        }
    };

    let mut config = vec![
        ("method".to_string(), method.label()),
        ("problem".to_string(), sys.name().to_string()),
        ("T".to_string(), t_end.to_string()),
        ("h".to_string(), h.to_string()),
        ("y0".to_string(), super::fmt_list(y0)),
        ("seed".to_string(), seed.to_string()),
    ];
    match method {
        Method::Srk { policy, .. } => config.push(("policy".into(), policy.describe())),
        Method::KuboMilstein { a, sigma } => {
            config.push(("a".into(), a.to_string()));
            config.push(("sigma".into(), sigma.to_string()));
        }
    }
    let mut columns: Vec<String> = vec!["n".into(), "t".into()];
    columns.extend((1..=y0.len()).map(|i| format!("y_{i}")));
    columns.push("invariant".into());
    columns.push("drift".into());
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut out = StudyResult::new("long-time", config, &cols);

    let i0 = invariant_value(c, y0)?;
    let mut max_drift: f64 = 0.0;
    for (k, y) in states.iter().enumerate() {
        let inv = invariant_value(c, y)?;
        let drift = (inv - i0).abs();
        max_drift = max_drift.max(drift);
        let mut row = vec![k as f64, k as f64 * h];
        row.extend_from_slice(y);
        row.push(inv);
        row.push(drift);
        out.rows.push(row);
    }
    out.metrics.push(("max_drift".into(), max_drift));
    Ok(out)
}
