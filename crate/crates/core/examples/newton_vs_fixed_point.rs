//! One midpoint step on the cubic system: stage residual after each
//! Newton and fixed-point iteration, and the a priori bounds.
//!
//! cargo run --example newton_vs_fixed_point

use srkqi::integrator::{
    contraction_factor, fixed_point_qi_bound, fixed_point_solve, newton_qi_bound, newton_solve, IterationPolicy,
};
use srkqi::problems::cubic_hamiltonian_system;
use srkqi::tableau::Builtin;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sys = cubic_hamiltonian_system();
    let tab = Builtin::Midpoint.tableau();
    let (y, h, dw) = ([1.0, 0.5], 0.1, 0.2);
    println!(" N  fixed-point   newton");
    for n in 1..=5 {
        let (_, fp) = fixed_point_solve(&tab, &sys, &y, h, dw, &IterationPolicy::fixed_point(n))?;
        let (_, nt) = newton_solve(&tab, &sys, &y, h, dw, &IterationPolicy::newton(n))?;
        println!("{n:>2}  {:.3e}   {:.3e}", fp.final_stage_residual, nt.final_stage_residual);
    }

    let delta = contraction_factor(2.0, 0.3, &tab, 0.01, 2)?;
    println!("\ncontraction factor at h=0.01: {delta:.4}");
    for n in 0..4 {
        println!(
            "  N={n} fixed-point bound {:.3e}  newton bound {:.3e}",
            fixed_point_qi_bound(1.0, 1.0, 2.3, 3.0, 1.15, delta, n)?,
            newton_qi_bound(1.0, 2.3, 3.0, 1.15, 1.0, delta, n)?
        );
    }
    Ok(())
}
