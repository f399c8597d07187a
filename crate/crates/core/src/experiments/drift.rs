//! Invariant-drift and strong-error fits over a grid of step sizes.

use super::{fmt_list, loglog_fit, max, mean, run_indexed, step_count, MonteCarlo, StudyResult};
use crate::error::{Error, Result};
use crate::integrator::{integrate, IterationPolicy};
use crate::linalg::Matrix;
use crate::problems::{invariant_value, kubo_exact, kubo_system, SdeSystem};
use crate::tableau::Tableau;
use crate::trees::{format_order2, qi_order};
use crate::wiener::{sample_path, BrownianPath};

/// Mean drift below this at every `h` counts as exact conservation.
const CONSERVED_LEVEL: f64 = 1e-10;

/// Order cap (doubled) for the tree audit attached to drift studies.
const AUDIT_CAP_ORDER2: u32 = 8;

/// Horizon, step sizes and initial state for a grid study.
#[derive(Clone, Debug, PartialEq)]
pub struct GridConfig {
    pub t_end: f64,
    /// Each step size must be an integer multiple of the smallest one.
    pub h_list: Vec<f64>,
    pub y0: Vec<f64>,
}

struct Grid {
    h_fine: f64,
    n_fine: usize,
    /// `(h, steps, coarsening factor)` per requested step size.
    levels: Vec<(f64, usize, usize)>,
}

fn build_grid(cfg: &GridConfig) -> Result<Grid> {
    if cfg.h_list.is_empty() {
        return Err(Error::Config("step-size list is empty".into()));
    }
    let h_fine = cfg.h_list.iter().copied().fold(f64::INFINITY, f64::min);
    let n_fine = step_count(cfg.t_end, h_fine)?;
    let mut levels = Vec::with_capacity(cfg.h_list.len());
    for &h in &cfg.h_list {
        let n = step_count(cfg.t_end, h)?;
        let ratio = h / h_fine;
        let m = ratio.round() as usize;
        if (ratio - m as f64).abs() > 1e-9 * ratio || n * m != n_fine {
            return Err(Error::Config(format!(
                "h={h} is not an integer multiple of the finest step {h_fine}"
            )));
        }
        levels.push((h, n, m));
    }
    Ok(Grid {
        h_fine,
        n_fine,
        levels,
    })
}

/// Evaluate `metric(level, coarse path)` for every path and level. The
/// result is indexed `[level][path]`.
fn over_grid<F>(grid: &Grid, mc: &MonteCarlo, metric: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(usize, &BrownianPath) -> Result<f64> + Sync + Send,
{
    let per_path = run_indexed(mc.n_paths, mc.workers, |p| {
        let fine = sample_path(mc.seed, p as u64, grid.n_fine, grid.h_fine)?;
        grid.levels
            .iter()
            .enumerate()
            .map(|(l, &(_, _, m))| {
                let coarse = fine.coarsen(m)?;
                if coarse.total() != fine.total() {
                    return Err(Error::Contract(format!(
                        "coarsened path {p} changes W(T) at level {l}"
                    )));
                }
                metric(l, &coarse)
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    Ok((0..grid.levels.len())
        .map(|l| per_path.iter().map(|v| v[l]).collect())
        .collect())
}

fn grid_echo(tab: &Tableau, sys_name: &str, cfg: &GridConfig, policy: &IterationPolicy, mc: &MonteCarlo) -> Vec<(String, String)> {
    let mut config = vec![
        ("scheme".to_string(), tab.name().to_string()),
        ("problem".to_string(), sys_name.to_string()),
        ("T".to_string(), cfg.t_end.to_string()),
        ("h_grid".to_string(), fmt_list(&cfg.h_list)),
        ("y0".to_string(), fmt_list(&cfg.y0)),
        ("policy".to_string(), policy.describe()),
    ];
    mc.echo(&mut config);
    config
}

/// Slope claimed for the built-in explicit schemes' invariant drift.
pub fn reference_drift_slope(scheme: &str) -> Option<f64> {
    match scheme {
        "scheme_2_1" => Some(2.0),
        "scheme_2_2" => Some(2.5),
        _ => None,
    }
}

/// Mean and maximum `|I(y_T) − I(y₀)|` over paths for each step size, with
/// a log-log fit of the mean against `h`.
pub fn drift_order_study(
    tab: &Tableau,
    sys: &dyn SdeSystem,
    c: &Matrix,
    cfg: &GridConfig,
    policy: &IterationPolicy,
    mc: &MonteCarlo,
) -> Result<StudyResult> {
    mc.validate()?;
    policy.validate()?;
    let grid = build_grid(cfg)?;
    let i0 = invariant_value(c, &cfg.y0)?;
    let drifts = over_grid(&grid, mc, |l, path| {
        let (h, n, _) = grid.levels[l];
        let traj = integrate(tab, sys, &cfg.y0, h, n, policy, path)?;
        Ok((invariant_value(c, traj.final_state())? - i0).abs())
    })?;

    let mut out = StudyResult::new(
        "drift-order",
        grid_echo(tab, sys.name(), cfg, policy, mc),
        &["h", "mean_drift", "max_drift"],
    );
    for (&(h, _, _), d) in grid.levels.iter().zip(&drifts) {
        out.rows.push(vec![h, mean(d), max(d)]);
    }
    let means: Vec<(f64, f64)> = out.rows.iter().map(|r| (r[0], r[1])).collect();
    if means.iter().all(|&(_, m)| m < CONSERVED_LEVEL) {
        out.findings.push(format!(
            "conserved: mean drift below {CONSERVED_LEVEL:e} at every h; fit skipped"
        ));
        return Ok(out);
    }
    let fit = loglog_fit(&means)?;
    out.fit = Some(fit);

    let audit = qi_order(tab, AUDIT_CAP_ORDER2, 1e-12)?;
    let audit_order = f64::from(audit) / 2.0;
    out.metrics.push(("tree_audit_qi_order".into(), audit_order));
    let mut note = format!(
        "measured drift slope {:.3}; tree-audit QI order {}",
        fit.slope,
        format_order2(audit)
    );
    if let Some(reference) = reference_drift_slope(tab.name()) {
        note.push_str(&format!("; claimed reference slope {reference}"));
        if (fit.slope - reference).abs() > 0.25 {
            out.findings.push(format!(
                "measured slope {:.3} disagrees with the claimed reference {reference}",
                fit.slope
            ));
        }
        if audit_order + 0.5 < reference {
            out.findings.push(format!(
                "tree audit bounds the guaranteed QI order by {}, below the claimed {reference}",
                format_order2(audit)
            ));
        }
    }
    out.findings.insert(0, note);
    Ok(out)
}

/// Root-mean-square error at `T` against the exact Kubo flow, per step size.
pub fn strong_order_study(
    tab: &Tableau,
    a: f64,
    sigma: f64,
    cfg: &GridConfig,
    policy: &IterationPolicy,
    mc: &MonteCarlo,
) -> Result<StudyResult> {
    mc.validate()?;
    policy.validate()?;
    if cfg.h_list.len() < 2 {
        return Err(Error::Domain("strong-order fit needs at least 2 step sizes".into()));
    }
    let y0: [f64; 2] = cfg
        .y0
        .as_slice()
        .try_into()
        .map_err(|_| Error::Dimension(format!("Kubo state has length 2, got {}", cfg.y0.len())))?;
    let sys = kubo_system(a, sigma);
    let grid = build_grid(cfg)?;
    let errors = over_grid(&grid, mc, |l, path| {
        let (h, n, _) = grid.levels[l];
        let traj = integrate(tab, &sys, &y0, h, n, policy, path)?;
        let exact = kubo_exact(y0, a, sigma, cfg.t_end, path.total());
        let y = traj.final_state();
        Ok(((y[0] - exact[0]).powi(2) + (y[1] - exact[1]).powi(2)).sqrt())
    })?;

    let mut config = grid_echo(tab, "kubo", cfg, policy, mc);
    config.insert(2, ("a".into(), a.to_string()));
    config.insert(3, ("sigma".into(), sigma.to_string()));
    let mut out = StudyResult::new("strong-order", config, &["h", "rms_error", "max_error"]);
    for (&(h, _, _), e) in grid.levels.iter().zip(&errors) {
        let rms = (e.iter().map(|x| x * x).sum::<f64>() / e.len() as f64).sqrt();
        out.rows.push(vec![h, rms, max(e)]);
    }
    let pts: Vec<(f64, f64)> = out.rows.iter().map(|r| (r[0], r[1])).collect();
    let fit = loglog_fit(&pts)?;
    out.fit = Some(fit);
    out.findings.push(format!("measured strong order {:.3}", fit.slope));
    Ok(out)
}
