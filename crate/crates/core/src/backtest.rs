//! Rolling-window trading backtest and the d-value versus p-value ranking
//! report.
//!
//! For each holding year y the pipeline runs on the trailing window of
//! `window_years` full years ending December y−1; the selected funds are
//! then held equal-weighted through year y. Funds that stop reporting during
//! the holding year drop out and the remaining weight re-normalizes.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::month::{MonthWindow, YearMonth};
use crate::panel::{
    assemble_window, carhart_fit, csv_parse_error, csv_reader, expect_header, fmt_f64, line_of, parse_f64, FactorSeries,
    FactorTable, ReturnsTable,
};
use crate::pipeline::{run_window, PipelineOptions};
use crate::rng::{child_seed, substream};
use crate::selection::{
    bh_from_pvalues, p_values, select_fdr_stepup, storey_from_pvalues, SelectionResult, DEFAULT_STOREY_LAMBDA,
};
use crate::stats::median;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fallback {
    HoldCash,
    HoldIndex,
}

impl FromStr for Fallback {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hold-cash" => Ok(Fallback::HoldCash),
            "hold-index" => Ok(Fallback::HoldIndex),
            _ => Err(Error::Config(format!(
                "unknown fallback `{s}` (expected hold-cash or hold-index)"
            ))),
        }
    }
}

/// How weights evolve inside the holding year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rebalance {
    /// Equal weights restored every month.
    Monthly,
    /// Equal weights at the start of the year, then buy and hold.
    Annual,
}

impl FromStr for Rebalance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monthly" => Ok(Rebalance::Monthly),
            "annual" => Ok(Rebalance::Annual),
            _ => Err(Error::Config(format!(
                "unknown rebalance `{s}` (expected monthly or annual)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BacktestConfig {
    pub window_years: u32,
    pub theta: f64,
    pub start_year: i32,
    pub end_year: i32,
    pub initial_value: f64,
    pub fallback: Fallback,
    pub rebalance: Rebalance,
}

impl BacktestConfig {
    pub fn new(start_year: i32, end_year: i32) -> Self {
        Self {
            window_years: 10,
            theta: 0.15,
            start_year,
            end_year,
            initial_value: 1.0,
            fallback: Fallback::HoldCash,
            rebalance: Rebalance::Monthly,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_years == 0 {
            return Err(Error::Config("window_years must be at least 1".into()));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::Config(format!("theta must lie in (0, 1), got {}", self.theta)));
        }
        if self.end_year < self.start_year {
            return Err(Error::Config(format!(
                "end year {} precedes start year {}",
                self.end_year, self.start_year
            )));
        }
        if !(self.initial_value > 0.0 && self.initial_value.is_finite()) {
            return Err(Error::Config("initial_value must be positive".into()));
        }
        Ok(())
    }
}

/// Monthly benchmark returns, read from `date,ret`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Benchmark {
    pub returns: BTreeMap<YearMonth, f64>,
}

impl Benchmark {
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv_reader(file);
        expect_header(&mut rdr, &["date", "ret"], path)?;
        let mut returns = BTreeMap::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_parse_error(e, path))?;
            let line = line_of(&rec);
            let bad = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line,
                message,
            };
            if rec.len() != 2 {
                return Err(bad(format!("expected 2 fields, found {}", rec.len())));
            }
            let date: YearMonth = rec[0].parse().map_err(|e: crate::month::ParseMonthError| bad(e.to_string()))?;
            let r = parse_f64(&rec[1]).ok_or_else(|| bad(format!("invalid return `{}`", &rec[1])))?;
            returns.insert(date, r);
        }
        Ok(Self { returns })
    }

    /// Market return mkt_rf + rf from a factor table.
    pub fn market_from(factors: &FactorTable, window: MonthWindow) -> Result<Self> {
        let f = factors.window(window)?;
        Ok(Self {
            returns: f.dates.iter().enumerate().map(|(t, d)| (*d, f.mkt[t] + f.rf[t])).collect(),
        })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["date", "ret"])?;
        for (d, r) in &self.returns {
            wtr.write_record([d.to_string(), fmt_f64(*r)])?;
        }
        wtr.flush().map_err(|e| Error::io("<benchmark csv>", e))?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Ours,
    Bh,
    Storey,
    AllFunds,
    Index,
}

impl Strategy {
    pub fn label(self) -> &'static str {
        match self {
            Strategy::Ours => "ours",
            Strategy::Bh => "bh",
            Strategy::Storey => "storey",
            Strategy::AllFunds => "all_funds",
            Strategy::Index => "index",
        }
    }
}

/// One strategy's holdings and outcome for one year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearEntry {
    pub year: i32,
    pub strategy: Strategy,
    pub selected: Vec<String>,
    /// Value at the end of the year.
    pub value: f64,
    pub annual_return: f64,
    /// Whether the zero-selection fallback was used.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioTrack {
    pub config: BacktestConfig,
    pub entries: Vec<YearEntry>,
    /// Fitted prior per formation year.
    pub params: Vec<(i32, crate::mixture::MixtureParams)>,
    /// Formation years whose prior fit failed; our track held the fallback.
    pub fit_failed: Vec<i32>,
}

impl PortfolioTrack {
    pub fn strategies(&self) -> Vec<Strategy> {
        let mut s: Vec<Strategy> = self.entries.iter().map(|e| e.strategy).collect();
        s.sort();
        s.dedup();
        s
    }

    pub fn final_value(&self, s: Strategy) -> Option<f64> {
        self.entries.iter().rev().find(|e| e.strategy == s).map(|e| e.value)
    }

    /// (V_end / V_0)^{1/years} − 1
    pub fn annualized_return(&self, s: Strategy) -> Option<f64> {
        let years = (self.config.end_year - self.config.start_year + 1) as f64;
        self.final_value(s)
            .map(|v| (v / self.config.initial_value).powf(1.0 / years) - 1.0)
    }

    /// `year,strategy,value,selected_count`; the first row per strategy is
    /// the initial value at the end of the year before trading starts.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["year", "strategy", "value", "selected_count"])?;
        for s in self.strategies() {
            wtr.write_record([
                (self.config.start_year - 1).to_string(),
                s.label().to_string(),
                fmt_f64(self.config.initial_value),
                "0".to_string(),
            ])?;
        }
        for e in &self.entries {
            wtr.write_record([
                e.year.to_string(),
                e.strategy.label().to_string(),
                fmt_f64(e.value),
                e.selected.len().to_string(),
            ])?;
        }
        wtr.flush().map_err(|e| Error::io("<track csv>", e))?;
        Ok(())
    }

    /// Per-year selections archive: `{year: {strategy: [fund ids]}}`.
    pub fn selections_json(&self) -> serde_json::Value {
        let mut by_year: BTreeMap<String, BTreeMap<&'static str, &Vec<String>>> = BTreeMap::new();
        for e in &self.entries {
            if matches!(e.strategy, Strategy::Ours | Strategy::Bh | Strategy::Storey) {
                by_year.entry(e.year.to_string()).or_default().insert(e.strategy.label(), &e.selected);
            }
        }
        serde_json::json!({ "selections": by_year, "fit_failed": self.fit_failed })
    }
}

/// Growth factor of holding `funds` through `months`.
///
/// Monthly rebalancing: each month's return is the mean over funds that
/// report that month. Annual: buy and hold from equal weights, with a
/// non-reporting fund's value spread over the others. Months where nobody
/// reports earn `fallback_month` (cash or index).
fn hold_growth(
    funds: &[String],
    months: &[YearMonth],
    returns: &ReturnsTable,
    rebalance: Rebalance,
    fallback_month: &dyn Fn(YearMonth) -> f64,
) -> f64 {
    match rebalance {
        Rebalance::Monthly => months
            .iter()
            .map(|&m| {
                let rs: Vec<f64> = funds.iter().filter_map(|f| returns.get(f, m)).collect();
                if rs.is_empty() {
                    1.0 + fallback_month(m)
                } else {
                    1.0 + rs.iter().sum::<f64>() / rs.len() as f64
                }
            })
            .product(),
        Rebalance::Annual => {
            let mut values: Vec<Option<f64>> = vec![Some(1.0 / funds.len().max(1) as f64); funds.len()];
            let mut cash = if funds.is_empty() { 1.0 } else { 0.0 };
            for &m in months {
                // Non-reporting funds leave the portfolio at the start of the
                // month; their value moves to the funds still reporting.
                for (f, v) in funds.iter().zip(values.iter_mut()) {
                    if let Some(val) = *v {
                        if returns.get(f, m).is_none() {
                            cash += val;
                            *v = None;
                        }
                    }
                }
                let alive = values.iter().filter(|v| v.is_some()).count();
                if alive == 0 {
                    cash *= 1.0 + fallback_month(m);
                    continue;
                }
                let share = cash / alive as f64;
                cash = 0.0;
                for (f, v) in funds.iter().zip(values.iter_mut()) {
                    if let Some(val) = v {
                        let r = returns.get(f, m).expect("alive funds report");
                        *val = (*val + share) * (1.0 + r);
                    }
                }
            }
            cash + values.iter().flatten().sum::<f64>()
        }
    }
}

/// Run the rolling backtest over [start_year, end_year].
pub fn run_backtest(
    returns: &ReturnsTable,
    factors: &FactorTable,
    benchmark: Option<&Benchmark>,
    config: &BacktestConfig,
    pipeline: &PipelineOptions,
    seed: u64,
) -> Result<PortfolioTrack> {
    config.validate()?;
    if config.fallback == Fallback::HoldIndex && benchmark.is_none() {
        return Err(Error::Config("fallback hold-index needs a benchmark series".into()));
    }
    let index_month = |m: YearMonth| -> Result<f64> {
        let b = benchmark.expect("checked above");
        b.returns
            .get(&m)
            .copied()
            .ok_or_else(|| Error::Alignment(format!("benchmark has no return for {m}")))
    };

    let mut values: BTreeMap<Strategy, f64> = BTreeMap::new();
    let mut entries = Vec::new();
    let mut params = Vec::new();
    let mut fit_failed = Vec::new();
    for year in config.start_year..=config.end_year {
        let window = MonthWindow::years(year - config.window_years as i32, year - 1);
        let loaded = assemble_window(returns, factors, window)?;
        if !loaded.log.dropped_incomplete.is_empty() || !loaded.log.dropped_zero.is_empty() {
            log::info!(
                "{year}: {} funds retained, {} incomplete, {} with zero returns",
                loaded.log.retained,
                loaded.log.dropped_incomplete.len(),
                loaded.log.dropped_zero.len()
            );
        }
        let year_seed = child_seed(seed, "backtest-year", year as u64);
        let ids = loaded.panel.fund_ids();
        // A prior fit with no feasible grid point means the moments admit no
        // non-null component: our strategy selects nothing for that year.
        let (z, ours) = match run_window(&loaded.panel, &loaded.factors, pipeline, year_seed, None) {
            Ok(out) => {
                params.push((year, out.params));
                let sel = select_fdr_stepup(&out.dvalues.d, config.theta);
                let ours: Vec<String> = sel.selected().map(|i| ids[i].clone()).collect();
                (out.estimates.z.as_slice().to_vec(), ours)
            }
            Err(Error::FitFailed { .. }) => {
                log::warn!("{year}: prior fit failed, no selection for this year");
                fit_failed.push(year);
                (carhart_fit(&loaded.panel, &loaded.factors)?.z.as_slice().to_vec(), Vec::new())
            }
            Err(e) => return Err(e),
        };
        let pv = p_values(&z);
        let picks = |r: &SelectionResult| -> Vec<String> { r.selected().map(|i| ids[i].clone()).collect() };

        let mut holdings: Vec<(Strategy, Vec<String>)> = vec![
            (Strategy::Ours, ours),
            (Strategy::Bh, picks(&bh_from_pvalues(&pv, config.theta))),
            (
                Strategy::Storey,
                picks(&storey_from_pvalues(&pv, config.theta, DEFAULT_STOREY_LAMBDA)?),
            ),
            (Strategy::AllFunds, ids.to_vec()),
        ];
        if benchmark.is_some() {
            holdings.push((Strategy::Index, Vec::new()));
        }

        let months: Vec<YearMonth> = MonthWindow::years(year, year).months().collect();
        for (strategy, selected) in holdings {
            let (growth, used_fallback) = if strategy == Strategy::Index {
                let g = months.iter().map(|&m| index_month(m).map(|r| 1.0 + r)).product::<Result<f64>>()?;
                (g, false)
            } else if selected.is_empty() {
                let g = match config.fallback {
                    Fallback::HoldCash => 1.0,
                    Fallback::HoldIndex => months.iter().map(|&m| index_month(m).map(|r| 1.0 + r)).product::<Result<f64>>()?,
                };
                (g, true)
            } else {
                let cash_or_index = |m: YearMonth| match config.fallback {
                    Fallback::HoldCash => 0.0,
                    Fallback::HoldIndex => index_month(m).unwrap_or(0.0),
                };
                (hold_growth(&selected, &months, returns, config.rebalance, &cash_or_index), false)
            };
            let v = values.entry(strategy).or_insert(config.initial_value);
            *v *= growth;
            entries.push(YearEntry {
                year,
                strategy,
                selected,
                value: *v,
                annual_return: growth - 1.0,
                fallback: used_fallback,
            });
        }
    }
    Ok(PortfolioTrack {
        config: *config,
        entries,
        params,
        fit_failed,
    })
}

/// Summary of one ranking group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub size: usize,
    pub median_d: Option<f64>,
    pub median_p: Option<f64>,
    pub min_p: Option<f64>,
    pub max_p: Option<f64>,
    pub min_d: Option<f64>,
    pub max_d: Option<f64>,
}

impl GroupStats {
    fn of(members: &[usize], d: &[f64], p: &[f64]) -> Self {
        let ds: Vec<f64> = members.iter().map(|&i| d[i]).collect();
        let ps: Vec<f64> = members.iter().map(|&i| p[i]).collect();
        let min = |v: &[f64]| v.iter().copied().reduce(f64::min);
        let max = |v: &[f64]| v.iter().copied().reduce(f64::max);
        Self {
            size: members.len(),
            median_d: median(&ds),
            median_p: median(&ps),
            min_p: min(&ps),
            max_p: max(&ps),
            min_d: min(&ds),
            max_d: max(&ds),
        }
    }
}

/// Funds in the top-n by d-value but not by p-value, and vice versa.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub top_n: usize,
    pub overlap: usize,
    /// Indices in the d-value top-n only, by ascending d.
    pub d_group: Vec<usize>,
    /// Indices in the p-value top-n only, by ascending p.
    pub p_group: Vec<usize>,
    pub d_group_stats: GroupStats,
    pub p_group_stats: GroupStats,
}

fn top_n(v: &[f64], n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
    order.truncate(n);
    order
}

pub fn rank_compare(dvalues: &[f64], pvalues: &[f64], top: usize) -> Result<RankReport> {
    let p = dvalues.len();
    if pvalues.len() != p {
        return Err(Error::DimensionMismatch {
            context: "rank compare: p-values vs d-values",
            expected: p,
            actual: pvalues.len(),
        });
    }
    if top > p {
        return Err(Error::Config(format!("top_n = {top} exceeds the {p} funds")));
    }
    let by_d = top_n(dvalues, top);
    let by_p = top_n(pvalues, top);
    let in_p: std::collections::HashSet<usize> = by_p.iter().copied().collect();
    let in_d: std::collections::HashSet<usize> = by_d.iter().copied().collect();
    let d_group: Vec<usize> = by_d.iter().copied().filter(|i| !in_p.contains(i)).collect();
    let p_group: Vec<usize> = by_p.iter().copied().filter(|i| !in_d.contains(i)).collect();
    Ok(RankReport {
        top_n: top,
        overlap: top - d_group.len(),
        d_group_stats: GroupStats::of(&d_group, dvalues, pvalues),
        p_group_stats: GroupStats::of(&p_group, dvalues, pvalues),
        d_group,
        p_group,
    })
}

impl RankReport {
    /// `group,fund_id,d_value,p_value`
    pub fn write_csv<W: Write>(&self, w: W, fund_ids: &[String], d: &[f64], p: &[f64]) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["group", "fund_id", "d_value", "p_value"])?;
        for (name, g) in [("d_group", &self.d_group), ("p_group", &self.p_group)] {
            for &i in g {
                wtr.write_record([name.to_string(), fund_ids[i].clone(), fmt_f64(d[i]), fmt_f64(p[i])])?;
            }
        }
        wtr.flush().map_err(|e| Error::io("<rank csv>", e))?;
        Ok(())
    }
}

/// Synthetic fund universe with a few planted skilled funds, for exercising
/// the backtest end to end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedSpec {
    pub n_funds: usize,
    pub start_year: i32,
    pub years: u32,
    pub n_planted: usize,
    /// Monthly alpha of each planted fund.
    pub alpha: f64,
    /// Mean and spread of the monthly alpha of every other fund. A slightly
    /// negative center mimics fees; exact zeros would make the unskilled
    /// cross-section a point mass.
    pub background_alpha: (f64, f64),
    /// Idiosyncratic monthly volatility is uniform on this range.
    pub resid_sd: (f64, f64),
    /// Weight of a shared residual factor in the idiosyncratic variance.
    pub resid_common: f64,
    /// Loadings on (mkt, smb, hml, mom) are normal around these means.
    pub beta_mean: [f64; 4],
    pub beta_sd: f64,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        Self {
            n_funds: 500,
            start_year: 2001,
            years: 15,
            n_planted: 20,
            alpha: 0.005,
            background_alpha: (-0.001, 0.001),
            resid_sd: (0.01, 0.03),
            resid_common: 0.2,
            // Low-beta funds: with the alpha scale taken from total return
            // variance, heavy factor exposure would shrink every z toward 0.
            beta_mean: [0.0; 4],
            beta_sd: 0.05,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedData {
    pub returns: ReturnsTable,
    pub factors: FactorTable,
    pub benchmark: Benchmark,
    /// Fund ids carrying the planted alpha.
    pub planted: Vec<String>,
}

pub fn planted_panel(spec: &PlantedSpec, seed: u64) -> Result<PlantedData> {
    if spec.n_planted > spec.n_funds {
        return Err(Error::Config("more planted funds than funds".into()));
    }
    let t = spec.years as usize * 12;
    let start = YearMonth::new(spec.start_year, 1).ok_or_else(|| Error::Config("invalid start year".into()))?;
    let series: FactorSeries =
        crate::simlab::synthetic_factors(t, start, &mut substream(seed, "planted-factors", 0));
    let factors = FactorTable::from_series(&series);
    let design = series.design();

    let mut rng = substream(seed, "planted-funds", 0);
    let nb = Normal::new(0.0, spec.beta_sd).map_err(|e| Error::Config(e.to_string()))?;
    let bg = Normal::new(spec.background_alpha.0, spec.background_alpha.1).map_err(|e| Error::Config(e.to_string()))?;
    let sd = Uniform::new(spec.resid_sd.0, spec.resid_sd.1).map_err(|e| Error::Config(e.to_string()))?;
    let common: Vec<f64> = (0..t).map(|_| rng.sample(StandardNormal)).collect();
    let w_common = spec.resid_common.clamp(0.0, 1.0);

    let mut returns = ReturnsTable::default();
    let mut planted = Vec::new();
    for i in 0..spec.n_funds {
        let id = format!("P{i:04}");
        let alpha = if i < spec.n_planted {
            planted.push(id.clone());
            spec.alpha
        } else {
            bg.sample(&mut rng)
        };
        let beta = spec.beta_mean.map(|m| m + nb.sample(&mut rng));
        let s = sd.sample(&mut rng);
        for (k, &m) in series.dates.iter().enumerate() {
            let e: f64 = rng.sample(StandardNormal);
            let eps = s * (w_common.sqrt() * common[k] + (1.0 - w_common).sqrt() * e);
            let sys: f64 = (0..4).map(|j| beta[j] * design[(k, j)]).sum();
            returns.insert(&id, m, series.rf[k] + alpha + sys + eps);
        }
    }
    let all = MonthWindow::new(start, start.offset(t as i64 - 1));
    let benchmark = Benchmark::market_from(&factors, all)?;
    Ok(PlantedData {
        returns,
        factors,
        benchmark,
        planted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(funds: &[(&str, &[f64])], start: YearMonth) -> ReturnsTable {
        let mut t = ReturnsTable::default();
        for (f, rs) in funds {
            for (k, r) in rs.iter().enumerate() {
                t.insert(f, start.offset(k as i64), *r);
            }
        }
        t
    }

    #[test]
    fn zero_returns_keep_value_flat() {
        let start = YearMonth::new(2020, 1).unwrap();
        let months: Vec<YearMonth> = (0..12).map(|k| start.offset(k)).collect();
        let t = table(&[("A", &[0.0; 12]), ("B", &[0.0; 12])], start);
        let funds = vec!["A".to_string(), "B".to_string()];
        for reb in [Rebalance::Monthly, Rebalance::Annual] {
            assert_eq!(hold_growth(&funds, &months, &t, reb, &|_| 0.0), 1.0);
        }
    }

    #[test]
    fn monthly_rebalance_renormalizes_after_dropout() {
        let start = YearMonth::new(2020, 1).unwrap();
        let months: Vec<YearMonth> = (0..3).map(|k| start.offset(k)).collect();
        // B stops after the first month.
        let t = table(&[("A", &[0.1, 0.1, 0.1]), ("B", &[-0.1])], start);
        let funds = vec!["A".to_string(), "B".to_string()];
        let g = hold_growth(&funds, &months, &t, Rebalance::Monthly, &|_| 0.0);
        assert!((g - 1.0 * 1.1 * 1.1).abs() < 1e-15);
        let g = hold_growth(&funds, &months, &t, Rebalance::Annual, &|_| 0.0);
        // 0.5·1.1 + 0.5·0.9 after month one, all in A afterwards.
        assert!((g - 1.0 * 1.1 * 1.1).abs() < 1e-15);
    }

    #[test]
    fn rank_compare_overlap_cases() {
        let d: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        let r = rank_compare(&d, &d, 50).unwrap();
        assert!(r.d_group.is_empty() && r.p_group.is_empty());
        assert_eq!(r.overlap, 50);
        let p: Vec<f64> = d.iter().map(|x| 1.0 - x).collect();
        let r = rank_compare(&d, &p, 50).unwrap();
        assert_eq!(r.d_group.len(), 50);
        assert_eq!(r.p_group.len(), 50);
        assert!(r.d_group.iter().all(|i| !r.p_group.contains(i)));
        assert!(rank_compare(&d, &p, 101).is_err());
    }

    #[test]
    fn hold_index_needs_benchmark() {
        let data = planted_panel(
            &PlantedSpec {
                n_funds: 60,
                years: 3,
                ..Default::default()
            },
            1,
        )
        .unwrap();
        let mut cfg = BacktestConfig::new(2003, 2003);
        cfg.window_years = 2;
        cfg.fallback = Fallback::HoldIndex;
        let err = run_backtest(&data.returns, &data.factors, None, &cfg, &PipelineOptions::default(), 1).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
