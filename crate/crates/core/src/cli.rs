//! Command-line front end.
//!
//! Every subcommand resolves its settings from an optional TOML file (one
//! table per subcommand, keys named like the long flags with underscores)
//! overlaid by command-line flags, then writes its artifacts plus a
//! `manifest.json` into `--out`. CSV artifacts start with a
//! `# manifest: manifest.json` comment line; JSON artifacts carry a
//! `manifest` field.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::backtest::{rank_compare, run_backtest, BacktestConfig, Benchmark, Fallback, Rebalance};
use crate::dependence::{EigenCache, RankPolicy};
use crate::dvalue::{DValueReport, Proposal};
use crate::error::{Error, Result};
use crate::mixture::{FitGrids, FitReport};
use crate::month::MonthWindow;
use crate::panel::{load_panel, EstimateSummary, FactorTable, ReturnsTable};
use crate::pipeline::{run_window, PipelineOptions};
use crate::selection::{p_values, SelectionReport};
use crate::simlab::{run_sim_study, DependenceKind, SimOptions, SimSetting, Sparsity};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(name = "fundsel", version, about = "Select skilled funds from dependent test statistics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the mixture prior on a panel window and write params.json.
    Fit(FitArgs),
    /// Fit and compute d-values; writes dvalues.csv and params.json.
    Dvalues(DvaluesArgs),
    /// Apply the selection rules to a d-value file; writes selection.csv.
    Select(SelectArgs),
    /// Run a simulation study; writes sim_summary.csv and sim_reps.csv.
    Simulate(SimulateArgs),
    /// Rolling-window backtest; writes track.csv and selections.json.
    Backtest(BacktestArgs),
    /// Compare top-n rankings by d-value and p-value; writes rank.csv.
    RankCompare(RankArgs),
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct CommonArgs {
    /// Master seed; every random stream derives from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML file with a table per subcommand.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct PipelineArgs {
    /// LAD subset percentages: `10:50:5` or `10,20,30`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid_m: Option<String>,
    /// Null-component means, all <= 0: `-0.5:0:0.1`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid_nu0: Option<String>,
    /// Shared τ² grid: `0.05:0.30:0.01`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid_tau: Option<String>,
    /// Simulated samples per TV score.
    #[arg(long)]
    pub tv_draws: Option<usize>,
    /// Importance samples for the d-values.
    #[arg(long)]
    pub mc_samples: Option<usize>,
    /// `laplace` or `prior`.
    #[arg(long)]
    pub proposal: Option<String>,
    /// `pool_tail` or `floor`.
    #[arg(long)]
    pub rank_policy: Option<String>,
    /// Directory for cached eigendecompositions.
    #[arg(long)]
    pub eigen_cache: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct PanelArgs {
    /// Long-format returns CSV `date,fund_id,ret`.
    #[arg(long)]
    pub returns: Option<PathBuf>,
    /// Factor CSV `date,mkt_rf,smb,hml,mom,rf`.
    #[arg(long)]
    pub factors: Option<PathBuf>,
    /// Estimation window `YYYY-MM:YYYY-MM`.
    #[arg(long)]
    pub window: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct FitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub panel: PanelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub pipeline: PipelineArgs,
    /// Include the full grid trace in params.json.
    #[arg(long)]
    #[serde(default)]
    pub trace: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct DvaluesArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub panel: PanelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct SelectArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// d-value CSV as written by `dvalues`.
    #[arg(long)]
    pub dvalues: Option<PathBuf>,
    /// Target FDR level (default 0.1).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Use the loss-optimal rule with this FDR weight instead of step-up.
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub pipeline: PipelineArgs,
    /// d1, d2 or d3.
    #[arg(long)]
    pub dep: Option<String>,
    /// s1 or s2.
    #[arg(long)]
    pub sparsity: Option<String>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Months per simulated panel (default 120).
    #[arg(long)]
    pub t_months: Option<usize>,
    /// Estimates CSV whose betas and scales are resampled.
    #[arg(long)]
    pub betas: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct BacktestArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long)]
    pub returns: Option<PathBuf>,
    #[arg(long)]
    pub factors: Option<PathBuf>,
    /// Benchmark CSV `date,ret` for the index track.
    #[arg(long)]
    pub benchmark: Option<PathBuf>,
    /// Trailing window length in years (default 10).
    #[arg(long)]
    pub window: Option<u32>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub start_year: Option<i32>,
    #[arg(long)]
    pub end_year: Option<i32>,
    #[arg(long)]
    pub initial_value: Option<f64>,
    /// hold-cash or hold-index.
    #[arg(long)]
    pub fallback: Option<String>,
    /// monthly or annual.
    #[arg(long)]
    pub rebalance: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct RankArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// d-value CSV as written by `dvalues`.
    #[arg(long)]
    pub dvalues: Option<PathBuf>,
    #[arg(long)]
    pub top_n: Option<usize>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fit(_) => "fit",
            Command::Dvalues(_) => "dvalues",
            Command::Select(_) => "select",
            Command::Simulate(_) => "simulate",
            Command::Backtest(_) => "backtest",
            Command::RankCompare(_) => "rank-compare",
        }
    }

    fn common(&self) -> &CommonArgs {
        match self {
            Command::Fit(a) => &a.common,
            Command::Dvalues(a) => &a.common,
            Command::Select(a) => &a.common,
            Command::Simulate(a) => &a.common,
            Command::Backtest(a) => &a.common,
            Command::RankCompare(a) => &a.common,
        }
    }
}

/// Overlay non-null flag values on the file's table for this subcommand.
fn resolve<T: Serialize + DeserializeOwned>(flags: &T, config: Option<&Path>, section: &str) -> Result<T> {
    let flags = serde_json::to_value(flags)?;
    let allowed = flags.as_object().expect("args serialize to an object");
    let mut merged = serde_json::Map::new();
    if let Some(path) = config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let doc: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(format!("{}: {}", path.display(), e.message())))?;
        if let Some(table) = doc.get(section) {
            let table = serde_json::to_value(table)?;
            for (k, v) in table.as_object().into_iter().flatten() {
                if !allowed.contains_key(k) {
                    return Err(Error::Config(format!("{}: unknown key `{k}` in [{section}]", path.display())));
                }
                merged.insert(k.clone(), v.clone());
            }
        }
    }
    for (k, v) in allowed {
        if !(v.is_null() || *v == serde_json::Value::Bool(false)) {
            merged.insert(k.clone(), v.clone());
        }
    }
    serde_json::from_value(serde_json::Value::Object(merged)).map_err(|e| Error::Config(format!("[{section}]: {e}")))
}

fn required<T: Clone>(v: &Option<T>, name: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::Config(format!("missing required setting `--{}`", name.replace('_', "-"))))
}

/// Parse `a:b:step` (inclusive) or a comma list.
pub fn parse_grid(s: &str, name: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::Config(format!("invalid --{name} `{s}`: {why}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) || b < a {
                return Err(bad("need start <= stop and step > 0"));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize + 1;
            // Round so 0.1-type steps print cleanly.
            (0..n).map(|k| ((a + k as f64 * step) * 1e12).round() / 1e12).collect()
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<f64>>>()?,
        _ => return Err(bad("expected start:stop:step or a comma list")),
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(bad("empty or non-finite grid"));
    }
    Ok(values)
}

impl PipelineArgs {
    pub fn options(&self) -> Result<PipelineOptions> {
        let mut o = PipelineOptions::default();
        let mut grids = FitGrids::default();
        if let Some(s) = &self.grid_m {
            grids.m_pct = parse_grid(s, "grid-m")?
                .into_iter()
                .map(|v| {
                    if v.fract() == 0.0 && v >= 0.0 {
                        Ok(v as u32)
                    } else {
                        Err(Error::Config(format!("grid-m value {v} is not a whole percentage")))
                    }
                })
                .collect::<Result<_>>()?;
        }
        if let Some(s) = &self.grid_nu0 {
            grids.nu0 = parse_grid(s, "grid-nu0")?;
        }
        if let Some(s) = &self.grid_tau {
            grids.tau_sq = parse_grid(s, "grid-tau")?;
        }
        grids.validate()?;
        o.fit.grids = grids;
        if let Some(n) = self.tv_draws {
            if n == 0 {
                return Err(Error::Config("tv-draws must be positive".into()));
            }
            o.fit.tv_draws = n;
        }
        if let Some(n) = self.mc_samples {
            if n == 0 {
                return Err(Error::Config("mc-samples must be positive".into()));
            }
            o.dvalue.n_samples = n;
        }
        if let Some(p) = &self.proposal {
            o.dvalue.proposal = p.parse::<Proposal>()?;
        }
        if let Some(r) = &self.rank_policy {
            o.dependence.rank_policy = r.parse::<RankPolicy>()?;
        }
        Ok(o)
    }

    fn cache(&self) -> Option<EigenCache> {
        self.eigen_cache.as_ref().map(EigenCache::new)
    }
}

/// Written next to every artifact; contains everything that determines the
/// outputs and nothing else (no timestamps, no worker count).
#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    rng: &'static str,
    subcommand: &'a str,
    seed: u64,
    config_hash: String,
    config: serde_json::Value,
    inputs: Vec<InputDigest>,
    outputs: Vec<String>,
}

#[derive(Debug, Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects artifacts in memory and writes them, with the manifest, at the end.
struct Artifacts {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    fn new(dir: PathBuf) -> Self {
        Self { dir, files: Vec::new() }
    }

    fn csv(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = format!("# manifest: {MANIFEST_FILE}\n").into_bytes();
        write(&mut buf)?;
        self.files.push((name.to_string(), buf));
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let body = serde_json::json!({ "manifest": MANIFEST_FILE, "result": value });
        let mut buf = serde_json::to_vec_pretty(&body)?;
        buf.push(b'\n');
        self.files.push((name.to_string(), buf));
        Ok(())
    }

    fn finish<S: Serialize>(self, subcommand: &str, seed: u64, settings: &S, inputs: &[&Path]) -> Result<()> {
        let mut config = serde_json::to_value(settings)?;
        if let Some(obj) = config.as_object_mut() {
            obj.remove("workers");
            obj.remove("out");
            obj.retain(|_, v| !v.is_null());
        }
        let canonical = serde_json::to_vec(&config)?;
        let inputs = inputs
            .iter()
            .map(|p| {
                let bytes = std::fs::read(p).map_err(|e| Error::io(*p, e))?;
                Ok(InputDigest {
                    path: p.display().to_string(),
                    sha256: sha256_hex(&bytes),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let manifest = Manifest {
            tool: "fundsel",
            version: env!("CARGO_PKG_VERSION"),
            rng: "chacha8; key = sha256(tag, seed, label, index)",
            subcommand,
            seed,
            config_hash: sha256_hex(&canonical),
            config,
            inputs,
            outputs: self.files.iter().map(|(n, _)| n.clone()).collect(),
        };
        std::fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        for (name, bytes) in &self.files {
            let path = self.dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        }
        let mut m = serde_json::to_vec_pretty(&manifest)?;
        m.push(b'\n');
        let path = self.dir.join(MANIFEST_FILE);
        std::fs::write(&path, m).map_err(|e| Error::io(&path, e))?;
        Ok(())
    }
}

fn window_of(panel: &PanelArgs) -> Result<MonthWindow> {
    let w = required(&panel.window, "window")?;
    w.parse::<MonthWindow>()
        .map_err(|e| Error::Config(format!("invalid --window: {e}")))
}

fn out_dir(common: &CommonArgs) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let a = resolve(args, args.common.config.as_deref(), "fit")?;
    let opts = a.pipeline.options()?;
    let seed = a.common.seed.unwrap_or(0);
    let (returns, factors) = (required(&a.panel.returns, "returns")?, required(&a.panel.factors, "factors")?);
    let loaded = load_panel(&returns, &factors, window_of(&a.panel)?)?;
    let out = run_window(&loaded.panel, &loaded.factors, &opts, seed, a.pipeline.cache().as_ref())?;
    let mut art = Artifacts::new(out_dir(&a.common));
    art.json("params.json", &FitReport::new(out.params, &out.diagnostics, a.trace))?;
    art.csv("estimates.csv", |w| out.estimates.write_csv(w))?;
    art.finish("fit", seed, &a, &[&returns, &factors])
}

fn cmd_dvalues(args: &DvaluesArgs) -> Result<()> {
    let a = resolve(args, args.common.config.as_deref(), "dvalues")?;
    let opts = a.pipeline.options()?;
    let seed = a.common.seed.unwrap_or(0);
    let (returns, factors) = (required(&a.panel.returns, "returns")?, required(&a.panel.factors, "factors")?);
    let loaded = load_panel(&returns, &factors, window_of(&a.panel)?)?;
    let out = run_window(&loaded.panel, &loaded.factors, &opts, seed, a.pipeline.cache().as_ref())?;
    if out.dvalues.ess < opts.dvalue.ess_warn {
        log::warn!("effective sample size {:.1} is low; consider more --mc-samples", out.dvalues.ess);
    }
    let report = DValueReport::new(
        loaded.panel.fund_ids().to_vec(),
        out.z().to_vec(),
        out.dvalues.clone(),
        &out.params,
    )?;
    let mut art = Artifacts::new(out_dir(&a.common));
    art.csv("dvalues.csv", |w| report.write_csv(w))?;
    art.json("params.json", &FitReport::new(out.params, &out.diagnostics, false))?;
    art.finish("dvalues", seed, &a, &[&returns, &factors])
}

fn cmd_select(args: &SelectArgs) -> Result<()> {
    let a = resolve(args, args.common.config.as_deref(), "select")?;
    let path = required(&a.dvalues, "dvalues")?;
    let dv = DValueReport::read_csv(&path)?;
    let theta = a.theta.unwrap_or(0.1);
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::Config(format!("theta must lie in [0, 1), got {theta}")));
    }
    let report = SelectionReport::build(dv.fund_ids, &dv.z, &dv.d, &dv.los, theta, a.lambda)?;
    let mut art = Artifacts::new(out_dir(&a.common));
    art.csv("selection.csv", |w| report.write_csv(w))?;
    art.finish("select", a.common.seed.unwrap_or(0), &a, &[&path])
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let a = resolve(args, args.common.config.as_deref(), "simulate")?;
    let seed = a.common.seed.unwrap_or(0);
    let sparsity: Sparsity = a.sparsity.as_deref().unwrap_or("s1").parse()?;
    let dep: DependenceKind = a.dep.as_deref().unwrap_or("d1").parse()?;
    let mut setting = SimSetting::desk(sparsity, dep, seed);
    if let Some(p) = a.p {
        setting.p = p;
    }
    if let Some(r) = a.reps {
        setting.reps = r;
    }
    if let Some(t) = a.theta {
        setting.theta = t;
    }
    let mut opts = SimOptions::new(a.pipeline.options()?);
    if let Some(t) = a.t_months {
        if t < 12 {
            return Err(Error::Config(format!("t-months must be at least 12, got {t}")));
        }
        opts.t_months = t;
    }
    let mut inputs: Vec<&Path> = Vec::new();
    if let Some(b) = &a.betas {
        opts.base = Some(EstimateSummary::from_csv_path(b)?);
        inputs.push(b);
    }
    let report = run_sim_study(&setting, &opts)?;
    let mut art = Artifacts::new(out_dir(&a.common));
    art.csv("sim_summary.csv", |w| report.write_csv(w, true))?;
    art.csv("sim_reps.csv", |w| report.write_long_csv(w))?;
    art.finish("simulate", seed, &a, &inputs)
}

fn cmd_backtest(args: &BacktestArgs) -> Result<()> {
    let a = resolve(args, args.common.config.as_deref(), "backtest")?;
    let seed = a.common.seed.unwrap_or(0);
    let (returns_path, factors_path) = (required(&a.returns, "returns")?, required(&a.factors, "factors")?);
    let mut cfg = BacktestConfig::new(required(&a.start_year, "start_year")?, required(&a.end_year, "end_year")?);
    if let Some(w) = a.window {
        cfg.window_years = w;
    }
    if let Some(t) = a.theta {
        cfg.theta = t;
    }
    if let Some(v) = a.initial_value {
        cfg.initial_value = v;
    }
    if let Some(f) = &a.fallback {
        cfg.fallback = f.parse::<Fallback>()?;
    }
    if let Some(r) = &a.rebalance {
        cfg.rebalance = r.parse::<Rebalance>()?;
    }
    cfg.validate()?;
    let returns = ReturnsTable::from_csv_path(&returns_path)?;
    let factors = FactorTable::from_csv_path(&factors_path)?;
    let benchmark = a.benchmark.as_ref().map(Benchmark::from_csv_path).transpose()?;
    let track = run_backtest(&returns, &factors, benchmark.as_ref(), &cfg, &a.pipeline.options()?, seed)?;
    let mut art = Artifacts::new(out_dir(&a.common));
    art.csv("track.csv", |w| track.write_csv(w))?;
    art.json("selections.json", &track.selections_json())?;
    let mut inputs: Vec<&Path> = vec![&returns_path, &factors_path];
    if let Some(b) = &a.benchmark {
        inputs.push(b);
    }
    art.finish("backtest", seed, &a, &inputs)
}

fn cmd_rank_compare(args: &RankArgs) -> Result<()> {
    let a = resolve(args, args.common.config.as_deref(), "rank-compare")?;
    let path = required(&a.dvalues, "dvalues")?;
    let dv = DValueReport::read_csv(&path)?;
    let pv = p_values(&dv.z);
    let report = rank_compare(&dv.d, &pv, a.top_n.unwrap_or(50))?;
    let mut art = Artifacts::new(out_dir(&a.common));
    art.csv("rank.csv", |w| report.write_csv(w, &dv.fund_ids, &dv.d, &pv))?;
    art.json("rank_summary.json", &report)?;
    art.finish("rank-compare", a.common.seed.unwrap_or(0), &a, &[&path])
}

/// Run one parsed command inside a pool sized by `--workers`.
pub fn run(cli: &Cli) -> Result<()> {
    let workers = cli.command.common().workers.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Dvalues(a) => cmd_dvalues(a),
        Command::Select(a) => cmd_select(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Backtest(a) => cmd_backtest(a),
        Command::RankCompare(a) => cmd_rank_compare(a),
    })
}

/// Parse `args`, run, and map the outcome to an exit code, printing errors
/// as a single `error[kind]: message` line.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion | K::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return if e.kind() == K::DisplayHelpOnMissingArgumentOrSubcommand { 2 } else { 0 };
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("error[config]: {first}");
            return 2;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            let kind = e.kind();
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", kind.label());
            kind.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_ranges_and_lists() {
        assert_eq!(parse_grid("10:50:10", "g").unwrap(), vec![10.0, 20.0, 30.0, 40.0, 50.0]);
        assert_eq!(parse_grid("-0.5:0:0.1", "g").unwrap(), vec![-0.5, -0.4, -0.3, -0.2, -0.1, 0.0]);
        assert_eq!(parse_grid("0.1,0.2", "g").unwrap(), vec![0.1, 0.2]);
        assert!(parse_grid("1:0:0.1", "g").is_err());
        assert!(parse_grid("1:2:0", "g").is_err());
        assert!(parse_grid("a,b", "g").is_err());
    }

    #[test]
    fn flags_override_file_and_unknown_keys_fail() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.toml");
        std::fs::write(&cfg, "[select]\ntheta = 0.2\nlambda = 1.5\nseed = 3\n").unwrap();
        let flags = SelectArgs {
            theta: Some(0.05),
            ..Default::default()
        };
        let a = resolve(&flags, Some(&cfg), "select").unwrap();
        assert_eq!(a.theta, Some(0.05));
        assert_eq!(a.lambda, Some(1.5));
        assert_eq!(a.common.seed, Some(3));

        std::fs::write(&cfg, "[select]\nthetaa = 0.2\n").unwrap();
        let err = resolve(&flags, Some(&cfg), "select").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn bad_grid_is_a_config_error() {
        let p = PipelineArgs {
            grid_nu0: Some("0.1:0.3:0.1".into()),
            ..Default::default()
        };
        assert!(matches!(p.options().unwrap_err(), Error::Config(_)));
    }
}
