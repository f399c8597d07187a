//! Long Kubo run: converged midpoint, Scheme 2.1 and Milstein on one path.
//!
//! cargo run --release --example long_time [-- out.csv]

use srkqi::experiments::{long_time_trajectory, Method};
use srkqi::integrator::IterationPolicy;
use srkqi::problems::kubo_system;
use srkqi::tableau::Builtin;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sys = kubo_system(1.0, 1.0);
    let methods = [
        Method::Srk {
            tableau: Builtin::Midpoint.tableau(),
            policy: IterationPolicy::fixed_point_tol(1e-12),
        },
        Method::Srk {
            tableau: Builtin::Scheme21.tableau(),
            policy: IterationPolicy::explicit(),
        },
        Method::KuboMilstein { a: 1.0, sigma: 1.0 },
    ];
    for m in &methods {
        let res = long_time_trajectory(m, &sys, &[0.0, 1.0], 500.0, 0.01, 42)?;
        println!("{:<11} max |I - I0| = {:.3e}", m.label(), res.metric("max_drift").unwrap_or(f64::NAN));
        if let Some(path) = std::env::args().nth(1) {
            std::fs::write(format!("{}.{path}", m.label()), res.to_csv())?;
        }
    }
    Ok(())
}
