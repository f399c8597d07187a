//! Inspect the built-in tableaux, a parsed one, and a two-stage Gauss method.
//!
//! cargo run --example check_tableau

use srkqi::tableau::{Builtin, Tableau, DEFAULT_TOL};

const HEUN: &str = "\
# explicit trapezoid (Heun) in both A and B
s=2
0 0
1 0
B
0 0
1 0
alpha
1/2 1/2
beta
1/2 1/2
";

fn report(tab: &Tableau) {
    println!(
        "{:<11} stages={} explicit={:<5} conservative={:<5} order1={:<5} max|defect|={:.4}",
        tab.name(),
        tab.stages(),
        tab.is_explicit(),
        tab.is_exactly_conservative(DEFAULT_TOL),
        tab.satisfies_order_one(DEFAULT_TOL),
        tab.defect_matrices().max_abs
    );
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for b in Builtin::ALL {
        report(&b.tableau());
    }
    report(&Tableau::parse(HEUN)?.with_name("heun"));

    // Gauss-Legendre with s=2 satisfies the conservation conditions.
    let r = 3f64.sqrt() / 6.0;
    let a = vec![vec![0.25, 0.25 - r], vec![0.25 + r, 0.25]];
    let gauss = Tableau::new("gauss2", a.clone(), a, vec![0.5, 0.5], vec![0.5, 0.5])?;
    report(&gauss);

    let d = Builtin::Scheme21.tableau().defect_matrices();
    println!("\nscheme_2_1 M0:");
    for row in d.m0.rows() {
        println!("  {row:?}");
    }
    println!("\n{}", Builtin::Scheme21.tableau().to_text());
    Ok(())
}
