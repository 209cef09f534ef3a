//! Replicated simulation of one dependence × sparsity setting, comparing
//! false discovery and false non-discovery proportions of the three rules.
//!
//!     cargo run --release --example simulation_study -- [d1|d2|d3] [s1|s2] [reps] [p]

use fundsel::pipeline::PipelineOptions;
use fundsel::simlab::{run_sim_study, DependenceKind, Method, SimOptions, SimSetting, Sparsity};

fn main() -> fundsel::Result<()> {
    let mut args = std::env::args().skip(1);
    let dep: DependenceKind = args.next().unwrap_or_else(|| "d1".into()).parse()?;
    let sp: Sparsity = args.next().unwrap_or_else(|| "s1".into()).parse()?;
    let mut setting = SimSetting::desk(sp, dep, 7);
    setting.reps = args.next().map_or(4, |s| s.parse().expect("reps"));
    setting.p = args.next().map_or(500, |s| s.parse().expect("p"));

    let report = run_sim_study(&setting, &SimOptions::new(PipelineOptions::default()))?;
    println!("{} × {}, p = {}, {} reps, θ = {}", dep.label(), sp.label(), setting.p, setting.reps, setting.theta);
    for m in Method::ALL {
        let s = report.summary_for(m);
        println!("{:>7}: FDP {:.3}  FNP {:.3}  selected {:.1}", m.label(), s.mean_fdp, s.mean_fnp, s.mean_selected);
    }
    report.write_csv(std::io::stdout(), true)?;
    Ok(())
}
