//! Decision rules on a fixed set of d-values: the FDR step-up, the
//! loss-optimal decision, and the Benjamini–Hochberg and Storey baselines.
//!
//!     cargo run --release --example selection_rules

use fundsel::selection::{bh_select, decision_loss, optimal_decision, select_fdr_stepup, storey_select};

fn main() -> fundsel::Result<()> {
    let d = [0.01, 0.02, 0.05, 0.08, 0.12, 0.3, 0.3, 0.55, 0.8, 0.95];
    for theta in [0.05, 0.1, 0.15] {
        let s = select_fdr_stepup(&d, theta);
        println!("step-up θ = {theta}: k = {} {:?}", s.k, s.selected().collect::<Vec<_>>());
    }
    for lambda in [0.5, 2.0, 10.0] {
        let s = optimal_decision(&d, lambda);
        println!(
            "optimal λ = {lambda}: k = {}, loss {:.4}",
            s.k,
            decision_loss(&d, &s.decisions, lambda)
        );
    }
    let z = [3.5, 3.1, 2.8, 2.2, 1.9, 1.0, 0.4, -0.3, -1.2, 0.8];
    println!("BH at 0.1: {:?}", bh_select(&z, 0.1).selected().collect::<Vec<_>>());
    println!("Storey at 0.1: {:?}", storey_select(&z, 0.1, 0.5)?.selected().collect::<Vec<_>>());
    Ok(())
}
