//! Invariant drift of the explicit schemes on the Kubo oscillator, fitted
//! against h.
//!
//! cargo run --release --example drift_order

use srkqi::experiments::{drift_order_study, GridConfig, MonteCarlo};
use srkqi::integrator::IterationPolicy;
use srkqi::problems::{kubo_system, SdeSystem};
use srkqi::tableau::Builtin;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sys = kubo_system(1.0, 1.0);
    let cfg = GridConfig {
        t_end: 1.0,
        h_list: (4..=9).map(|e| 2f64.powi(-e)).collect(),
        y0: vec![0.0, 1.0],
    };
    let mc = MonteCarlo::new(200, 42);
    for b in [Builtin::Scheme21, Builtin::Scheme22] {
        let res = drift_order_study(&b.tableau(), &sys, &sys.invariants()[0], &cfg, &IterationPolicy::explicit(), &mc)?;
        println!("{}", res.to_csv());
    }

    // Converged midpoint: conserved to round-off, so no fit.
    let res = drift_order_study(
        &Builtin::Midpoint.tableau(),
        &sys,
        &sys.invariants()[0],
        &cfg,
        &IterationPolicy::newton_tol(1e-14),
        &mc,
    )?;
    println!("{}", res.findings.join("\n"));
    Ok(())
}
