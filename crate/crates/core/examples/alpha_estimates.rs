//! Four-factor OLS on every fund of a synthetic panel: intercepts, their
//! standard deviations and the standardized statistics.
//!
//!     cargo run --release --example alpha_estimates

use fundsel::backtest::{planted_panel, PlantedSpec};
use fundsel::month::MonthWindow;
use fundsel::panel::{assemble_window, carhart_fit};

fn main() -> fundsel::Result<()> {
    let data = planted_panel(&PlantedSpec::default(), 1)?;
    let loaded = assemble_window(&data.returns, &data.factors, MonthWindow::years(2001, 2010))?;
    println!(
        "window 2001-2010: {} funds kept, {} incomplete, {} all-zero",
        loaded.log.retained,
        loaded.log.dropped_incomplete.len(),
        loaded.log.dropped_zero.len()
    );
    let est = carhart_fit(&loaded.panel, &loaded.factors)?;
    println!("‖h‖ = {:.4}", est.h.norm());
    println!("{:>6} {:>10} {:>9} {:>7}  betas", "fund", "alpha", "sigma", "z");
    for i in [0, 1, 2, 100, 200, 300] {
        let b = est.beta_hat[i];
        println!(
            "{:>6} {:>10.5} {:>9.5} {:>7.3}  [{:.2}, {:.2}, {:.2}, {:.2}]",
            est.fund_ids[i], est.alpha_hat[i], est.sigma[i], est.z[i], b[0], b[1], b[2], b[3]
        );
    }
    let planted: Vec<f64> = (0..est.len()).filter(|&i| data.planted.contains(&est.fund_ids[i])).map(|i| est.z[i]).collect();
    let rest: Vec<f64> = (0..est.len()).filter(|&i| !data.planted.contains(&est.fund_ids[i])).map(|i| est.z[i]).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    println!("mean z: planted {:.3}, others {:.3}", mean(&planted), mean(&rest));
    Ok(())
}
