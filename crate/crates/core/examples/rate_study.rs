//! Drift of the N-iterated midpoint against sqrt(h|ln h|), next to the
//! a priori per-run bound.
//!
//! cargo run --release --example rate_study

use srkqi::experiments::{fixed_point_rate_study, KuboSweepParams, MonteCarlo};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for n in [2, 4] {
        let base = KuboSweepParams {
            t_end: 50.0,
            iterations: n,
            ..KuboSweepParams::default()
        };
        let res = fixed_point_rate_study(&base, &[0.01, 0.02, 0.04, 0.08], &MonteCarlo::new(100, 42))?;
        println!("{}", res.to_csv());
    }
    Ok(())
}
