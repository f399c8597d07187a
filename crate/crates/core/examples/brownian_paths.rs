//! Seeded Wiener paths, dyadic coarsening and increment truncation.
//!
//! cargo run --example brownian_paths

use srkqi::wiener::{sample_path, standard_normal_at, truncate, truncation_level};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let h = 2f64.powi(-9);
    let fine = sample_path(42, 7, 512, h)?;
    println!("W(1) on the fine grid: {:.12}", fine.total());
    for m in [2, 8, 64, 512] {
        let coarse = fine.coarsen(m)?;
        println!("  coarsened by {m:>3}: h = {:<10} W(1) = {:.12}", coarse.h(), coarse.total());
    }

    // Any increment can be regenerated without replaying the stream.
    let z = standard_normal_at(42, 7, 100);
    println!("increment 100: {} == {}", fine.increments()[100], h.sqrt() * z);

    let h = 0.05;
    println!("\nA_h(k=2) at h={h}: {:.6}", truncation_level(h, 2)?);
    for dw in [0.1, 0.5, 1.0, -3.0] {
        println!("  truncate({dw:>4}) = {:.6}", truncate(dw, h, 2)?);
    }
    println!("\n{}", sample_path(1, 0, 4, 0.25)?.to_csv());
    Ok(())
}
