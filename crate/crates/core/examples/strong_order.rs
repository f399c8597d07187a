//! Root-mean-square error against the exact Kubo flow.
//!
//! cargo run --release --example strong_order

use srkqi::experiments::{strong_order_study, GridConfig, MonteCarlo};
use srkqi::integrator::IterationPolicy;
use srkqi::tableau::Builtin;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = GridConfig {
        t_end: 1.0,
        h_list: (4..=9).map(|e| 2f64.powi(-e)).collect(),
        y0: vec![0.0, 1.0],
    };
    let mc = MonteCarlo::new(200, 42);
    let runs = [
        (Builtin::Scheme21, IterationPolicy::explicit()),
        (Builtin::Midpoint, IterationPolicy::newton_tol(1e-13)),
    ];
    for (b, policy) in runs {
        let res = strong_order_study(&b.tableau(), 1.0, 1.0, &cfg, &policy, &mc)?;
        println!("{:<11} slope {:.3}", b.label(), res.fitted_slope().unwrap_or(f64::NAN));
        for r in &res.rows {
            println!("  h={:<12} rms={:.3e}", r[0], r[1]);
        }
    }
    Ok(())
}
