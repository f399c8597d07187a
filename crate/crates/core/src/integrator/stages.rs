//! Iterative solvers for the stacked stage vector `Y ∈ ℝ^{s·d}`.

use super::{check_finite, IterationPolicy, JacobianMode, StepStats, Stopping};
use crate::error::{Error, Result};
use crate::linalg::{norm2, solve, Matrix};
use crate::problems::{finite_difference_jacobian, SdeSystem};
use crate::tableau::Tableau;

/// Relative pivot threshold for the Newton linear solve.
const NEWTON_PIVOT_TOL: f64 = 1e-13;

pub(super) struct StageSolution {
    pub stages: Vec<f64>,
    pub f: Vec<Vec<f64>>,
    pub g: Vec<Vec<f64>>,
    pub stats: StepStats,
}

fn fields(sys: &dyn SdeSystem, stages: &[f64], d: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    stages
        .chunks(d)
        .map(|yi| (sys.drift(yi), sys.diffusion(yi)))
        .unzip()
}

/// `e⊗y + h(A⊗I)F + ΔW(B⊗I)G`.
fn stage_map(tab: &Tableau, y: &[f64], h: f64, dw: f64, f: &[Vec<f64>], g: &[Vec<f64>]) -> Vec<f64> {
    let (s, d) = (tab.stages(), y.len());
    let mut out = Vec::with_capacity(s * d);
    for i in 0..s {
        for k in 0..d {
            let mut v = y[k];
            for j in 0..s {
                v += h * tab.a()[(i, j)] * f[j][k] + dw * tab.b()[(i, j)] * g[j][k];
            }
            out.push(v);
        }
    }
    out
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn check_inputs(tab: &Tableau, sys: &dyn SdeSystem, y: &[f64]) -> Result<()> {
    if y.len() != sys.dim() {
        return Err(Error::Dimension(format!(
            "state has length {}, system `{}` has dimension {}",
            y.len(),
            sys.name(),
            sys.dim()
        )));
    }
    let _ = tab;
    Ok(())
}

fn initial_guess(tab: &Tableau, y: &[f64]) -> Vec<f64> {
    y.repeat(tab.stages())
}

/// `‖Y − e⊗y − h(A⊗I)F(Y) − ΔW(B⊗I)G(Y)‖₂` for a stacked stage vector.
pub fn stage_residual(
    tab: &Tableau,
    sys: &dyn SdeSystem,
    y: &[f64],
    h: f64,
    dw: f64,
    stages: &[f64],
) -> Result<f64> {
    check_inputs(tab, sys, y)?;
    if stages.len() != tab.stages() * y.len() {
        return Err(Error::Dimension(format!(
            "stage vector has length {}, expected {}",
            stages.len(),
            tab.stages() * y.len()
        )));
    }
    let (f, g) = fields(sys, stages, y.len());
    Ok(distance(stages, &stage_map(tab, y, h, dw, &f, &g)))
}

/// Finish a solve: evaluate the fields once more at the accepted stages.
fn accept(
    tab: &Tableau,
    sys: &dyn SdeSystem,
    y: &[f64],
    h: f64,
    dw: f64,
    stages: Vec<f64>,
    iterations: usize,
) -> StageSolution {
    let (f, g) = fields(sys, &stages, y.len());
    let residual = distance(&stages, &stage_map(tab, y, h, dw, &f, &g));
    StageSolution {
        stages,
        f,
        g,
        stats: StepStats {
            iterations_used: iterations,
            final_stage_residual: residual,
            truncated: false,
        },
    }
}

fn stopping(policy: &IterationPolicy) -> Result<Stopping> {
    policy
        .stopping
        .ok_or_else(|| Error::Config("iterative solve needs an iteration count or a tolerance".into()))
}

pub(super) fn solve_fixed_point(
    tab: &Tableau,
    sys: &dyn SdeSystem,
    y: &[f64],
    h: f64,
    dw: f64,
    policy: &IterationPolicy,
) -> Result<StageSolution> {
    check_inputs(tab, sys, y)?;
    let d = y.len();
    let mut stages = initial_guess(tab, y);
    let mut iterations = 0;
    match stopping(policy)? {
        Stopping::Count(n) => {
            for _ in 0..n {
                let (f, g) = fields(sys, &stages, d);
                stages = stage_map(tab, y, h, dw, &f, &g);
                check_finite(&stages, "stage")?;
                iterations += 1;
            }
        }
        Stopping::Tolerance(tol) => loop {
            if iterations == policy.max_iterations {
                let (f, g) = fields(sys, &stages, d);
                return Err(Error::NonConvergence {
                    iterations,
                    residual: distance(&stages, &stage_map(tab, y, h, dw, &f, &g)),
                });
            }
            let (f, g) = fields(sys, &stages, d);
            let next = stage_map(tab, y, h, dw, &f, &g);
            check_finite(&next, "stage")?;
            let update = distance(&next, &stages);
            stages = next;
            iterations += 1;
            if update <= tol {
                break;
            }
        },
    }
    Ok(accept(tab, sys, y, h, dw, stages, iterations))
}

fn jacobians(sys: &dyn SdeSystem, yi: &[f64], mode: JacobianMode) -> (Matrix, Matrix) {
    let fd_f = || finite_difference_jacobian(|z| sys.drift(z), yi);
    let fd_g = || finite_difference_jacobian(|z| sys.diffusion(z), yi);
    match mode {
        JacobianMode::Analytic => (
            sys.drift_jacobian(yi).unwrap_or_else(fd_f),
            sys.diffusion_jacobian(yi).unwrap_or_else(fd_g),
        ),
        JacobianMode::FiniteDifference => (fd_f(), fd_g()),
    }
}

/// One Newton correction `Δ = J⁻¹ R(Y)`.
fn newton_correction(
    tab: &Tableau,
    sys: &dyn SdeSystem,
    y: &[f64],
    h: f64,
    dw: f64,
    stages: &[f64],
    mode: JacobianMode,
) -> Result<Vec<f64>> {
    let (s, d) = (tab.stages(), y.len());
    let (f, g) = fields(sys, stages, d);
    let mapped = stage_map(tab, y, h, dw, &f, &g);
    let residual: Vec<f64> = stages.iter().zip(&mapped).map(|(a, b)| a - b).collect();
    let jac: Vec<(Matrix, Matrix)> = stages.chunks(d).map(|yi| jacobians(sys, yi, mode)).collect();
    let mut big = Matrix::identity(s * d);
    for i in 0..s {
        for j in 0..s {
            let (a, b) = (h * tab.a()[(i, j)], dw * tab.b()[(i, j)]);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let (fj, gj) = &jac[j];
            for r in 0..d {
                for c in 0..d {
                    big[(i * d + r, j * d + c)] -= a * fj[(r, c)] + b * gj[(r, c)];
                }
            }
        }
    }
    solve(&big, &residual, NEWTON_PIVOT_TOL)
}

pub(super) fn solve_newton(
    tab: &Tableau,
    sys: &dyn SdeSystem,
    y: &[f64],
    h: f64,
    dw: f64,
    policy: &IterationPolicy,
) -> Result<StageSolution> {
    check_inputs(tab, sys, y)?;
    let mut stages = initial_guess(tab, y);
    let mut iterations = 0;
    let newton_iter = |stages: &mut Vec<f64>| -> Result<f64> {
        let delta = newton_correction(tab, sys, y, h, dw, stages, policy.jacobian_mode)?;
        for (v, dv) in stages.iter_mut().zip(&delta) {
            *v -= dv;
        }
        check_finite(stages, "stage")?;
        Ok(norm2(&delta))
    };
    match stopping(policy)? {
        Stopping::Count(n) => {
            for _ in 0..n {
                newton_iter(&mut stages)?;
                iterations += 1;
            }
        }
        Stopping::Tolerance(tol) => loop {
            if iterations == policy.max_iterations {
                let residual = stage_residual(tab, sys, y, h, dw, &stages)?;
                return Err(Error::NonConvergence {
                    iterations,
                    residual,
                });
            }
            let update = newton_iter(&mut stages)?;
            iterations += 1;
            if update <= tol {
                break;
            }
        },
    }
    Ok(accept(tab, sys, y, h, dw, stages, iterations))
}

/// Fixed-point stage solve with the increment taken as given (no truncation).
///
/// Returns the stacked stages `Y⁽ᴺ⁾` and the solve statistics.
pub fn fixed_point_solve(
    tab: &Tableau,
    sys: &dyn SdeSystem,
    y: &[f64],
    h: f64,
    dw: f64,
    policy: &IterationPolicy,
) -> Result<(Vec<f64>, StepStats)> {
    policy.validate()?;
    let sol = solve_fixed_point(tab, sys, y, h, dw, policy)?;
    Ok((sol.stages, sol.stats))
}

/// Newton stage solve with the increment taken as given (no truncation).
pub fn newton_solve(
    tab: &Tableau,
    sys: &dyn SdeSystem,
    y: &[f64],
    h: f64,
    dw: f64,
    policy: &IterationPolicy,
) -> Result<(Vec<f64>, StepStats)> {
    policy.validate()?;
    let sol = solve_newton(tab, sys, y, h, dw, policy)?;
    Ok((sol.stages, sol.stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::step;
    use crate::problems::{cubic_hamiltonian_system, kubo_system};
    use crate::tableau::Builtin;

    fn midpoint() -> Tableau {
        Builtin::Midpoint.tableau()
    }

    /// Closed-form midpoint fixed-point map on the cubic system.
    fn midfix(y: [f64; 2], h: f64, dw: f64, n: usize) -> [f64; 2] {
        let (p, q) = (y[0], y[1]);
        let mut z = [p, q];
        for _ in 0..n {
            let (u, v) = ((p + z[0]) / 2.0, (q + z[1]) / 2.0);
            z = [p - h * u * v - dw * u * u / 2.0, q + h * v * v / 2.0 + dw * u * v];
        }
        z
    }

    /// Closed-form Newton on the 2×2 midpoint system for `(P, Q) = y_{n+1}`.
    fn midnewton(y: [f64; 2], h: f64, dw: f64, n: usize) -> [f64; 2] {
        let (p, q) = (y[0], y[1]);
        let (mut pp, mut qq) = (p, q);
        for _ in 0..n {
            let (u, v) = (p + pp, q + qq);
            let r1 = pp - p + h * u * v / 4.0 + dw * u * u / 8.0;
            let r2 = qq - q - h * v * v / 8.0 - dw * u * v / 4.0;
            let j11 = 1.0 + h * v / 4.0 + dw * u / 4.0;
            let j12 = h * u / 4.0;
            let j21 = -dw * v / 4.0;
            let j22 = 1.0 - h * v / 4.0 - dw * u / 4.0;
            let det = j11 * j22 - j12 * j21;
            pp -= (j22 * r1 - j12 * r2) / det;
            qq -= (-j21 * r1 + j11 * r2) / det;
        }
        [pp, qq]
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn midpoint_fixed_point_matches_closed_form() {
        let sys = cubic_hamiltonian_system();
        let (y, h, dw) = ([0.8, -0.3], 0.05, 0.13);
        for n in 1..=6 {
            let policy = IterationPolicy::fixed_point(n).with_truncation(None);
            let (next, _) = step(&midpoint(), &sys, &y, h, dw, &policy).unwrap();
            assert!(close(&next, &midfix(y, h, dw, n + 1), 1e-15), "N={n}");
            let (stages, _) = fixed_point_solve(&midpoint(), &sys, &y, h, dw, &policy).unwrap();
            let extrapolated = [2.0 * stages[0] - y[0], 2.0 * stages[1] - y[1]];
            assert!(close(&extrapolated, &midfix(y, h, dw, n), 1e-15), "N={n}");
        }
    }

    #[test]
    fn midpoint_newton_matches_closed_form() {
        let sys = cubic_hamiltonian_system();
        let (y, h, dw) = ([0.8, -0.3], 0.05, 0.13);
        for n in 1..=4 {
            let policy = IterationPolicy::newton(n).with_truncation(None);
            let (stages, _) = newton_solve(&midpoint(), &sys, &y, h, dw, &policy).unwrap();
            let extrapolated = [2.0 * stages[0] - y[0], 2.0 * stages[1] - y[1]];
            assert!(close(&extrapolated, &midnewton(y, h, dw, n), 1e-14), "N={n}");
        }
    }

    #[test]
    fn newton_is_exact_after_one_iteration_on_linear_fields() {
        let sys = kubo_system(1.0, 1.0);
        let (_, stats) =
            newton_solve(&midpoint(), &sys, &[0.0, 1.0], 0.1, 0.2, &IterationPolicy::newton(1)).unwrap();
        assert!(stats.final_stage_residual <= 1e-12, "{}", stats.final_stage_residual);
    }

    #[test]
    fn newton_converges_quadratically() {
        let sys = cubic_hamiltonian_system();
        let (y, h, dw) = ([1.0, 0.5], 0.1, 0.2);
        let residuals: Vec<f64> = (1..=3)
            .map(|n| {
                let p = IterationPolicy::newton(n).with_truncation(None);
                newton_solve(&midpoint(), &sys, &y, h, dw, &p).unwrap().1.final_stage_residual
            })
            .collect();
        assert!(residuals[0] < 1e-2);
        assert!(residuals[1] <= 10.0 * residuals[0] * residuals[0], "{residuals:?}");
        assert!(residuals[2] <= 1e-14, "{residuals:?}");
    }

    #[test]
    fn finite_difference_jacobian_mode_agrees() {
        let sys = cubic_hamiltonian_system();
        let (y, h, dw) = ([1.0, 0.5], 0.1, 0.2);
        let a = IterationPolicy::newton(4);
        let b = a.with_jacobian_mode(JacobianMode::FiniteDifference);
        let (sa, _) = newton_solve(&midpoint(), &sys, &y, h, dw, &a).unwrap();
        let (sb, _) = newton_solve(&midpoint(), &sys, &y, h, dw, &b).unwrap();
        assert!(close(&sa, &sb, 1e-12));
    }

    #[test]
    fn tolerance_stopping_and_non_convergence() {
        let sys = kubo_system(1.0, 1.0);
        let p = IterationPolicy::fixed_point_tol(1e-13);
        let (_, stats) = fixed_point_solve(&midpoint(), &sys, &[1.0, 0.0], 0.01, 0.05, &p).unwrap();
        assert!(stats.iterations_used > 1 && stats.final_stage_residual <= 1e-12);
        let strict = IterationPolicy::fixed_point_tol(0.0).with_max_iterations(3);
        let err = fixed_point_solve(&midpoint(), &sys, &[1.0, 0.0], 0.3, 0.5, &strict);
        assert!(matches!(err, Err(Error::NonConvergence { iterations: 3, .. })));
    }

    #[test]
    fn residual_shrinks_with_fixed_point_iterations() {
        let sys = kubo_system(1.0, 1.0);
        let mut last = f64::INFINITY;
        for n in 1..8 {
            let p = IterationPolicy::fixed_point(n);
            let (_, s) = fixed_point_solve(&midpoint(), &sys, &[0.0, 1.0], 0.05, 0.1, &p).unwrap();
            assert!(s.final_stage_residual < last);
            last = s.final_stage_residual;
        }
    }

    #[test]
    fn singular_newton_matrix_is_reported() {
        // Stage Jacobian I − (h/2)f′ loses its first row at h = 2 for f = (y₁, 0).
        struct Growth;
        impl SdeSystem for Growth {
            fn name(&self) -> &str {
                "growth"
            }
            fn dim(&self) -> usize {
                2
            }
            fn drift(&self, y: &[f64]) -> Vec<f64> {
                vec![y[0], 0.0]
            }
            fn diffusion(&self, _y: &[f64]) -> Vec<f64> {
                vec![0.0, 0.0]
            }
            fn drift_jacobian(&self, _y: &[f64]) -> Option<Matrix> {
                Some(Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap())
            }
            fn diffusion_jacobian(&self, _y: &[f64]) -> Option<Matrix> {
                Some(Matrix::zeros(2))
            }
        }
        let err = newton_solve(&midpoint(), &Growth, &[1.0, 1.0], 2.0, 0.0, &IterationPolicy::newton(1));
        assert!(matches!(err, Err(Error::Singular { .. })));
    }

    #[test]
    fn stage_residual_checks_length() {
        let sys = kubo_system(1.0, 1.0);
        assert!(stage_residual(&midpoint(), &sys, &[1.0, 0.0], 0.1, 0.0, &[1.0]).is_err());
    }
}
