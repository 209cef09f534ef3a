//! Which funds enter the top 50 by d-value but not by p-value, and the
//! reverse, on one synthetic window.
//!
//!     cargo run --release --example rank_compare

use fundsel::backtest::{planted_panel, rank_compare, PlantedSpec};
use fundsel::month::MonthWindow;
use fundsel::panel::assemble_window;
use fundsel::pipeline::{run_window, PipelineOptions};
use fundsel::selection::p_values;

fn main() -> fundsel::Result<()> {
    let data = planted_panel(&PlantedSpec::default(), 2)?;
    let loaded = assemble_window(&data.returns, &data.factors, MonthWindow::years(2001, 2010))?;
    let out = run_window(&loaded.panel, &loaded.factors, &PipelineOptions::default(), 2, None)?;
    let pv = p_values(out.z());
    let report = rank_compare(&out.dvalues.d, &pv, 50)?;
    println!("top {}: {} funds shared", report.top_n, report.overlap);
    for (name, st) in [("d-group", &report.d_group_stats), ("p-group", &report.p_group_stats)] {
        let f = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        println!(
            "{name}: {} funds, median d {}, median p {}, p range {}..{}",
            st.size,
            f(st.median_d),
            f(st.median_p),
            f(st.min_p),
            f(st.max_p)
        );
    }
    Ok(())
}
