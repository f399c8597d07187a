//! Unit circle pushed through the cubic Hamiltonian system by one path.
//!
//! cargo run --release --example circle_area

use srkqi::experiments::{circle_evolution, CircleConfig};
use srkqi::integrator::IterationPolicy;
use srkqi::problems::cubic_hamiltonian_system;
use srkqi::tableau::Builtin;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sys = cubic_hamiltonian_system();
    let tab = Builtin::Midpoint.tableau();
    let cfg = CircleConfig {
        n_points: 256,
        h: 0.001,
        t_end: 1.0,
        seed: 42,
        workers: None,
    };
    let policies = [
        ("newton tol 1e-13", IterationPolicy::newton_tol(1e-13)),
        ("newton N=2", IterationPolicy::newton(2)),
        ("newton N=4", IterationPolicy::newton(4)),
        ("fixed-point N=2", IterationPolicy::fixed_point(2)),
        ("fixed-point N=4", IterationPolicy::fixed_point(4)),
    ];
    for (label, policy) in policies {
        let res = circle_evolution(&tab, &sys, &policy, &cfg)?;
        println!(
            "{label:<17} area {:.6}  (inscribed polygon {:.6})",
            res.metric("area").unwrap_or(f64::NAN),
            res.metric("baseline_area").unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
