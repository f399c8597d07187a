//! Transport of a polygonal unit circle through one Brownian path.

use std::f64::consts::TAU;

use super::{run_indexed, step_count, StudyResult};
use crate::error::{Error, Result};
use crate::integrator::{integrate, IterationPolicy};
use crate::problems::SdeSystem;
use crate::tableau::Tableau;
use crate::wiener::sample_path;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircleConfig {
    pub n_points: usize,
    pub h: f64,
    pub t_end: f64,
    pub seed: u64,
    pub workers: Option<usize>,
}

/// `½|Σ (xᵢyᵢ₊₁ − xᵢ₊₁yᵢ)|` with cyclic indexing.
pub fn shoelace_area(points: &[[f64; 2]]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::Domain(format!("a polygon needs at least 3 points, got {}", points.len())));
    }
    let n = points.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (p, q) = (points[i], points[(i + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum();
    Ok(0.5 * twice.abs())
}

/// Area `(n/2)·sin(2π/n)` of the regular polygon inscribed in the unit circle.
pub fn polygon_baseline(n_points: usize) -> f64 {
    let n = n_points as f64;
    0.5 * n * (TAU / n).sin()
}

/// Map `n_points` equally spaced points of the unit circle through the same
/// path (path 0 of `seed`) and measure the enclosed area.
pub fn circle_evolution(
    tab: &Tableau,
    sys: &dyn SdeSystem,
    policy: &IterationPolicy,
    cfg: &CircleConfig,
) -> Result<StudyResult> {
    if cfg.n_points < 3 {
        return Err(Error::Config(format!("need at least 3 points, got {}", cfg.n_points)));
    }
    if sys.dim() != 2 {
        return Err(Error::Dimension(format!("circle evolution needs a planar system, `{}` has dimension {}", sys.name(), sys.dim())));
    }
    policy.validate()?;
    let n = step_count(cfg.t_end, cfg.h)?;
    let path = sample_path(cfg.seed, 0, n, cfg.h)?;
    let finals = run_indexed(cfg.n_points, cfg.workers, |i| {
        let theta = TAU * i as f64 / cfg.n_points as f64;
        let y0 = [theta.cos(), theta.sin()];
        let traj = integrate(tab, sys, &y0, cfg.h, n, policy, &path).map_err(|e| Error::PointFailed {
            point: i,
            source: Box::new(e),
        })?;
        let y = traj.final_state();
        Ok([y0[0], y0[1], y[0], y[1]])
    })?;

    let config = vec![
        ("scheme".to_string(), tab.name().to_string()),
        ("problem".to_string(), sys.name().to_string()),
        ("policy".to_string(), policy.describe()),
        ("points".to_string(), cfg.n_points.to_string()),
        ("h".to_string(), cfg.h.to_string()),
        ("T".to_string(), cfg.t_end.to_string()),
        ("seed".to_string(), cfg.seed.to_string()),
    ];
    let mut out = StudyResult::new("circle", config, &["index", "p0", "q0", "p", "q"]);
    for (i, r) in finals.iter().enumerate() {
        out.rows.push(vec![i as f64, r[0], r[1], r[2], r[3]]);
    }
    let cloud: Vec<[f64; 2]> = finals.iter().map(|r| [r[2], r[3]]).collect();
    let area = shoelace_area(&cloud)?;
    let baseline = polygon_baseline(cfg.n_points);
    out.metrics.push(("area".into(), area));
    out.metrics.push(("baseline_area".into(), baseline));
    out.metrics.push(("area_error".into(), area - baseline));
    out.findings.push(format!(
        "final polygon area {area:.6} vs inscribed baseline {baseline:.6} (difference {:.3e})",
        area - baseline
    ));
    Ok(out)
}
