//! Enumerate colored trees and audit the pairwise QI-preservation conditions.
//!
//! cargo run --example tree_audit

use srkqi::tableau::Builtin;
use srkqi::trees::{enumerate_trees, first_violation, format_order2, qi_order_from_table, residual_table};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Orders are handled doubled: 5 means order 2.5.
    let sets = enumerate_trees(5)?;
    println!("order <= 2.5: |gamma0| = {}, |gamma1| = {}", sets.gamma0.len(), sets.gamma1.len());
    for t in &sets.gamma0 {
        print!("{t}  ");
    }
    println!("\n");

    for b in Builtin::ALL {
        let tab = b.tableau();
        let table = residual_table(&tab, 7)?;
        let order = qi_order_from_table(&table, 6, 1e-12);
        print!("{:<11} pairs={:<5} qi_order={}", tab.name(), table.len(), format_order2(order));
        match first_violation(&table, 1e-12) {
            Some(r) => println!(
                "  first nonzero: {} ({}, {}) at order sum {} = {}",
                r.family.label(),
                r.left,
                r.right,
                format_order2(r.order2_sum),
                r.value
            ),
            None => println!("  (capped, nothing nonzero)"),
        }
    }
    Ok(())
}
