//! Rolling ten-year-window backtest on a synthetic universe with planted
//! skilled funds: yearly selection, equal-weight holding, value tracks.
//!
//!     cargo run --release --example backtest [seed]

use fundsel::backtest::{planted_panel, run_backtest, BacktestConfig, PlantedSpec, Strategy};
use fundsel::pipeline::PipelineOptions;

fn main() -> fundsel::Result<()> {
    let seed = std::env::args().nth(1).map_or(1, |s| s.parse().expect("seed"));
    let data = planted_panel(&PlantedSpec::default(), seed)?;
    let cfg = BacktestConfig::new(2011, 2015);
    let track = run_backtest(&data.returns, &data.factors, Some(&data.benchmark), &cfg, &PipelineOptions::default(), seed)?;
    for e in track.entries.iter().filter(|e| e.strategy == Strategy::Ours) {
        let hits = e.selected.iter().filter(|id| data.planted.contains(id)).count();
        println!("{}: {} funds selected ({hits} planted), return {:+.2}%", e.year, e.selected.len(), 100.0 * e.annual_return);
    }
    for s in track.strategies() {
        println!(
            "{:>9}: final value {:.3}, annualized {:+.2}%",
            s.label(),
            track.final_value(s).unwrap(),
            100.0 * track.annualized_return(s).unwrap()
        );
    }
    track.write_csv(std::io::stdout())?;
    Ok(())
}
