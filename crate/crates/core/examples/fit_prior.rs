//! Simulate statistics from a known mixture prior under factor dependence and
//! recover the prior with the grid fit.
//!
//!     cargo run --release --example fit_prior [seed]

use fundsel::dependence::{DependenceModel, DependenceOptions};
use fundsel::mixture::{fit_aeb, simulate_z, FitOptions, GridStatus, MixtureParams};
use fundsel::rng::substream;
use fundsel::simlab::{epsilon_correlation, DependenceKind};

fn main() -> fundsel::Result<()> {
    let seed = std::env::args().nth(1).map_or(1, |s| s.parse().expect("seed"));
    let sigma = epsilon_correlation(DependenceKind::D1, 500, &mut substream(seed, "example", 0))?;
    let dep = DependenceModel::from_correlation(sigma, DependenceOptions::default())?;
    let truth = MixtureParams::s1();
    let z: Vec<f64> = simulate_z(&truth, &dep, seed).iter().copied().collect();

    let (fit, diag) = fit_aeb(&z, &dep, &FitOptions::default(), seed)?;
    let feasible = diag.grid_trace.iter().filter(|g| g.status == GridStatus::Feasible).count();
    println!("grid points: {} evaluated, {feasible} with admissible roots", diag.grid_trace.len());
    println!("accepted m = {}%, TV = {:.4}", diag.m_pct, diag.tv);
    println!("        {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6}", "pi0", "pi1", "pi2", "nu0", "nu1", "nu2", "tau1", "tau2");
    // The two Gaussian components are exchangeable; list the lower mean first.
    let mut fit = fit;
    if fit.nu1 > fit.nu2 {
        std::mem::swap(&mut fit.pi1, &mut fit.pi2);
        std::mem::swap(&mut fit.nu1, &mut fit.nu2);
        std::mem::swap(&mut fit.tau1_sq, &mut fit.tau2_sq);
    }
    for (name, p) in [("truth", truth), ("fit", fit)] {
        println!(
            "{name:>6}  {:>6.3} {:>6.3} {:>6.3} {:>6.2} {:>6.2} {:>6.2} {:>6.2} {:>6.2}",
            p.pi0, p.pi1, p.pi2, p.nu0, p.nu1, p.nu2, p.tau1_sq, p.tau2_sq
        );
    }
    Ok(())
}
