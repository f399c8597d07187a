//! Midpoint with N fixed-point iterations on Kubo: drift against N, h and T.
//!
//! cargo run --release --example iteration_sweep

use srkqi::experiments::{iteration_sweep, KuboSweepParams, MonteCarlo, SweepAxis};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Horizon shortened from 800 to keep the run short.
    let base = KuboSweepParams {
        t_end: 50.0,
        iterations: 4,
        ..KuboSweepParams::default()
    };
    let mc = MonteCarlo::new(100, 42);
    let sweeps = [
        (SweepAxis::Iterations, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
        (SweepAxis::StepSize, vec![0.01, 0.02, 0.04, 0.08]),
        (SweepAxis::Horizon, vec![10.0, 20.0, 40.0, 80.0]),
    ];
    for (axis, values) in sweeps {
        let res = iteration_sweep(axis, &values, &base, &mc)?;
        println!("axis {}:", axis.label());
        for r in &res.rows {
            println!("  {:>6}  mean ln drift {:>9.4}", r[0], r[1]);
        }
        for f in &res.findings {
            println!("  - {f}");
        }
    }
    Ok(())
}
