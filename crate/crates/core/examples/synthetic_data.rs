//! Write a synthetic fund universe with planted skilled funds as CSV files
//! that the `fundsel` binary can read.
//!
//!     cargo run --release --example synthetic_data -- out_dir [n_funds] [years] [seed]

use std::fs::File;
use std::path::PathBuf;

use fundsel::backtest::{planted_panel, PlantedSpec};

fn main() -> fundsel::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "synthetic".into()));
    let n_funds = args.next().map_or(500, |s| s.parse().expect("n_funds"));
    let years = args.next().map_or(15, |s| s.parse().expect("years"));
    let seed = args.next().map_or(1, |s| s.parse().expect("seed"));

    let spec = PlantedSpec {
        n_funds,
        years,
        n_planted: (n_funds / 25).max(1),
        ..Default::default()
    };
    let data = planted_panel(&spec, seed)?;
    std::fs::create_dir_all(&dir).expect("create output dir");
    let open = |name: &str| File::create(dir.join(name)).expect("create file");
    data.returns.write_csv(open("returns.csv"))?;
    data.factors.write_csv(open("factors.csv"))?;
    data.benchmark.write_csv(open("benchmark.csv"))?;
    println!(
        "{} funds over {} years ({} planted: {} .. {}) written to {}",
        n_funds,
        years,
        data.planted.len(),
        data.planted.first().unwrap(),
        data.planted.last().unwrap(),
        dir.display()
    );
    Ok(())
}
