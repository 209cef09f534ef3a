//! Posterior non-skill probabilities (d-values) and their skill mirror (LOS)
//! under factor dependence, next to the independence-based local FDR.
//!
//! The dependence model is estimated from a simulated 120-month panel, as the
//! pipeline does, and the d-values use the true prior.
//!
//!     cargo run --release --example dvalues

use fundsel::dependence::build_dependence;
use fundsel::dvalue::{compute_dvalues, local_fdr, DValueOptions, Proposal};
use fundsel::panel::carhart_fit;
use fundsel::simlab::{gen_sim_panel, DependenceKind, SimOptions, SimSetting, Sparsity};

fn main() -> fundsel::Result<()> {
    let setting = SimSetting::desk(Sparsity::S1, DependenceKind::D1, 4);
    let sim = gen_sim_panel(&setting, &SimOptions::new(Default::default()), 0)?;
    let est = carhart_fit(&sim.panel, &sim.factors)?;
    let dep = build_dependence(&est, &sim.panel, &sim.factors, Default::default(), None)?;
    let prior = setting.sparsity.prior();
    let z = est.z.as_slice();
    println!("p = {}, {} factors, strict floor λ_p = {:.3}", z.len(), dep.l, dep.lambda_p);

    for proposal in [Proposal::Laplace, Proposal::Prior] {
        let opts = DValueOptions {
            proposal,
            ..Default::default()
        };
        let dv = compute_dvalues(z, &dep, &prior, &opts, 4)?;
        println!("{proposal:?}: ESS {:.1} from {} draws", dv.ess, dv.n_samples);
        if proposal == Proposal::Laplace {
            let mut order: Vec<usize> = (0..z.len()).collect();
            order.sort_by(|&a, &b| dv.d[a].total_cmp(&dv.d[b]));
            println!("{:>5} {:>7} {:>7} {:>8} {:>8} {:>9}", "unit", "true μ", "z", "d", "los", "local fdr");
            for &i in order.iter().take(10) {
                println!(
                    "{i:>5} {:>7.2} {:>7.3} {:>8.4} {:>8.4} {:>9.4}",
                    sim.mu[i],
                    z[i],
                    dv.d[i],
                    dv.los[i],
                    local_fdr(z[i], &prior)?
                );
            }
        }
    }
    Ok(())
}
