//! Simulation lab: synthetic dependent fund panels with known skill, run
//! through the full pipeline and the BH/Storey baselines.
//!
//! Construction of one replication:
//!
//! 1. T months of i.i.d. normal factors (mkt, smb, hml, mom) and a small
//!    constant-mean risk-free rate.
//! 2. Per fund a loading β_i and an alpha scale σ_i, either drawn
//!    synthetically (β ~ N((1, .2, .2, .2), .25·I), σ ~ U[.1, .5]) or sampled
//!    without replacement from a user-supplied estimate summary.
//! 3. μ_i from the mixture prior of the chosen sparsity setting.
//! 4. An error correlation Σ_ε (d1, d2 or d3), and errors ε_t = s ∘ L ξ_t
//!    where L Lᵀ = Σ_ε and s_i = σ_i / ‖h‖. With h the intercept weights of
//!    the synthetic factors, this makes the intercept noise of fund i have
//!    standard deviation σ_i, so that Z_i ≈ μ_i + N(0, 1).
//! 5. r_it = rf_t + μ_i σ_i + R_t β_i + ε_it.

use std::io::Write;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::MixtureParams;
use crate::month::YearMonth;
use crate::panel::{fmt_f64, intercept_weights_closed_form, EstimateSummary, FactorSeries, ReturnPanel};
use crate::pipeline::{run_window, PipelineOptions};
use crate::rng::{child_seed, substream, StreamRng};
use crate::selection::{bh_select, select_fdr_stepup, storey_select, DEFAULT_STOREY_LAMBDA};
use crate::stats::kahan_mean;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sparsity {
    S1,
    S2,
}

impl Sparsity {
    pub fn prior(self) -> MixtureParams {
        match self {
            Sparsity::S1 => MixtureParams::s1(),
            Sparsity::S2 => MixtureParams::s2(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Sparsity::S1 => "s1",
            Sparsity::S2 => "s2",
        }
    }
}

impl FromStr for Sparsity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s1" => Ok(Sparsity::S1),
            "s2" => Ok(Sparsity::S2),
            _ => Err(Error::Config(format!("unknown sparsity `{s}` (expected s1 or s2)"))),
        }
    }
}

/// Error-correlation structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DependenceKind {
    /// cor(AAᵀ + I), A: p × 4 with N(0, 4) entries.
    D1,
    /// cor(AAᵀ + M), M_ij = 0.8^|i−j|, A: p × 10 with N(0, 4) entries.
    D2,
    /// cor(AAᵀ + M), M fractional Gaussian noise with H = 0.9, A: p × 10 with U(−1, 1) entries.
    D3,
}

impl DependenceKind {
    pub fn label(self) -> &'static str {
        match self {
            DependenceKind::D1 => "d1",
            DependenceKind::D2 => "d2",
            DependenceKind::D3 => "d3",
        }
    }
}

impl FromStr for DependenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "d1" => Ok(DependenceKind::D1),
            "d2" => Ok(DependenceKind::D2),
            "d3" => Ok(DependenceKind::D3),
            _ => Err(Error::Config(format!("unknown dependence `{s}` (expected d1, d2 or d3)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSetting {
    pub p: usize,
    pub sparsity: Sparsity,
    pub dependence: DependenceKind,
    pub theta: f64,
    pub reps: usize,
    pub seed: u64,
}

impl SimSetting {
    /// The desk-scale preset: p = 500, 50 replications, θ = 0.1.
    pub fn desk(sparsity: Sparsity, dependence: DependenceKind, seed: u64) -> Self {
        Self {
            p: 500,
            sparsity,
            dependence,
            theta: 0.1,
            reps: 50,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 50 {
            return Err(Error::Config(format!("simulation needs p >= 50, got {}", self.p)));
        }
        if self.reps == 0 {
            return Err(Error::Config("simulation needs at least one replication".into()));
        }
        if !(0.0..1.0).contains(&self.theta) {
            return Err(Error::Config(format!("theta must lie in [0, 1), got {}", self.theta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct SimOptions {
    pub t_months: usize,
    pub pipeline: PipelineOptions,
    /// Real betas and alpha scales to resample instead of synthetic ones.
    pub base: Option<EstimateSummary>,
}

impl SimOptions {
    pub fn new(pipeline: PipelineOptions) -> Self {
        Self {
            t_months: 120,
            pipeline,
            base: None,
        }
    }
}

/// Means and standard deviations of the synthetic monthly factors.
const FACTOR_MEAN: [f64; 4] = [0.006, 0.002, 0.003, 0.006];
const FACTOR_SD: [f64; 4] = [0.044, 0.030, 0.030, 0.045];
const RF_MEAN: f64 = 0.002;
const RF_SD: f64 = 0.0005;
const SPD_RETRIES: u64 = 5;

/// One synthetic panel with its ground truth.
#[derive(Debug, Clone)]
pub struct SimPanel {
    pub panel: ReturnPanel,
    pub factors: FactorSeries,
    pub mu: Vec<f64>,
    pub beta: Vec<[f64; 4]>,
    pub sigma: Vec<f64>,
    pub sigma_eps: DMatrix<f64>,
}

pub fn synthetic_factors(t: usize, start: YearMonth, rng: &mut StreamRng) -> FactorSeries {
    let dates: Vec<YearMonth> = (0..t as i64).map(|i| start.offset(i)).collect();
    let mut cols: [Vec<f64>; 4] = Default::default();
    for _ in 0..t {
        for (k, col) in cols.iter_mut().enumerate() {
            let g: f64 = rng.sample(StandardNormal);
            col.push(FACTOR_MEAN[k] + FACTOR_SD[k] * g);
        }
    }
    let rf = (0..t)
        .map(|_| (RF_MEAN + RF_SD * rng.sample::<f64, _>(StandardNormal)).max(0.0))
        .collect();
    let [mkt, smb, hml, mom] = cols;
    FactorSeries {
        dates,
        mkt,
        smb,
        hml,
        mom,
        rf,
    }
}

/// M_ij = ρ^|i−j|
pub fn power_decay(p: usize, rho: f64) -> DMatrix<f64> {
    DMatrix::from_fn(p, p, |i, j| rho.powi(i.abs_diff(j) as i32))
}

/// Autocovariance of fractional Gaussian noise:
/// M_ij = 0.5(|k+1|^{2H} − 2|k|^{2H} + |k−1|^{2H}), k = |i − j|.
pub fn fgn_covariance(p: usize, hurst: f64) -> DMatrix<f64> {
    let e = 2.0 * hurst;
    DMatrix::from_fn(p, p, |i, j| {
        let k = i.abs_diff(j) as f64;
        0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
    })
}

/// cor(AAᵀ + M)
pub fn loadings_correlation(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    crate::dependence::correlation(&(a * a.transpose() + m))
}

/// Draw Σ_ε for one dependence setting.
pub fn epsilon_correlation(kind: DependenceKind, p: usize, rng: &mut StreamRng) -> Result<DMatrix<f64>> {
    let (a, m) = match kind {
        DependenceKind::D1 => {
            let n = Normal::new(0.0, 2.0).expect("valid normal");
            (DMatrix::from_fn(p, 4, |_, _| n.sample(rng)), DMatrix::identity(p, p))
        }
        DependenceKind::D2 => {
            let n = Normal::new(0.0, 2.0).expect("valid normal");
            (DMatrix::from_fn(p, 10, |_, _| n.sample(rng)), power_decay(p, 0.8))
        }
        DependenceKind::D3 => {
            let u = Uniform::new(-1.0, 1.0).expect("valid range");
            (DMatrix::from_fn(p, 10, |_, _| u.sample(rng)), fgn_covariance(p, 0.9))
        }
    };
    loadings_correlation(&a, &m)
}

/// Generate replication `rep` of a setting.
pub fn gen_sim_panel(setting: &SimSetting, opts: &SimOptions, rep: u64) -> Result<SimPanel> {
    setting.validate()?;
    let p = setting.p;
    let t = opts.t_months;
    let seed = setting.seed;
    let start = YearMonth::new(2000, 1).expect("valid month");

    let factors = synthetic_factors(t, start, &mut substream(seed, "sim-factors", rep));
    let h = intercept_weights_closed_form(&factors.design())?;
    let h_norm = h.norm();

    let mut rng = substream(seed, "sim-funds", rep);
    let (beta, sigma): (Vec<[f64; 4]>, Vec<f64>) = match &opts.base {
        Some(base) => {
            if base.fund_ids.len() < p {
                return Err(Error::Config(format!(
                    "estimate summary has {} funds, fewer than p = {p}",
                    base.fund_ids.len()
                )));
            }
            let picks = sample(&mut rng, base.fund_ids.len(), p);
            picks.iter().map(|s| (base.beta[s], base.sigma[s])).unzip()
        }
        None => {
            let n = Normal::new(0.0, 0.5).expect("valid normal");
            let u = Uniform::new(0.1, 0.5).expect("valid range");
            (0..p)
                .map(|_| {
                    let b = [1.0 + n.sample(&mut rng), 0.2 + n.sample(&mut rng), 0.2 + n.sample(&mut rng), 0.2 + n.sample(&mut rng)];
                    (b, u.sample(&mut rng))
                })
                .unzip()
        }
    };

    let prior = setting.sparsity.prior();
    let mut mu_rng = substream(seed, "sim-mu", rep);
    let mu: Vec<f64> = (0..p).map(|_| prior.sample_mu(&mut mu_rng)).collect();

    let mut chol = None;
    for attempt in 0..SPD_RETRIES {
        let mut r = substream(seed, "sim-eps-corr", rep * SPD_RETRIES + attempt);
        let s = epsilon_correlation(setting.dependence, p, &mut r)?;
        if let Some(c) = s.clone().cholesky() {
            chol = Some((s, c.l()));
            break;
        }
        log::warn!("error correlation for replication {rep} is not positive definite; redrawing");
    }
    let (sigma_eps, l) = chol.ok_or_else(|| {
        Error::Numerical(format!("no positive definite error correlation after {SPD_RETRIES} attempts"))
    })?;

    let mut eps_rng = substream(seed, "sim-eps", rep);
    let xi = DMatrix::from_fn(p, t, |_, _| eps_rng.sample::<f64, _>(StandardNormal));
    let eps = l * xi; // p × T

    let design = factors.design();
    let mut returns = DMatrix::zeros(t, p);
    for i in 0..p {
        let scale = sigma[i] / h_norm;
        let b = DVector::from_row_slice(&beta[i]);
        let systematic = &design * b;
        for s in 0..t {
            returns[(s, i)] = factors.rf[s] + mu[i] * sigma[i] + systematic[s] + scale * eps[(i, s)];
        }
    }
    let ids = (0..p).map(|i| format!("F{i:04}")).collect();
    let panel = ReturnPanel::new(factors.dates.clone(), ids, returns)?;
    Ok(SimPanel {
        panel,
        factors,
        mu,
        beta,
        sigma,
        sigma_eps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ours,
    Bh,
    Storey,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Ours, Method::Bh, Method::Storey];

    pub fn label(self) -> &'static str {
        match self {
            Method::Ours => "ours",
            Method::Bh => "bh",
            Method::Storey => "storey",
        }
    }
}

/// Realized error proportions of one decision vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepMetrics {
    pub selected: usize,
    pub false_discoveries: usize,
    pub missed: usize,
    pub fdp: f64,
    pub fnp: f64,
}

impl RepMetrics {
    pub fn evaluate(decisions: &[bool], mu: &[f64]) -> Self {
        let p = mu.len();
        let mut selected = 0;
        let mut fd = 0;
        let mut missed = 0;
        for (&a, &m) in decisions.iter().zip(mu) {
            if a {
                selected += 1;
                if m <= 0.0 {
                    fd += 1;
                }
            } else if m > 0.0 {
                missed += 1;
            }
        }
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        Self {
            selected,
            false_discoveries: fd,
            missed,
            fdp: ratio(fd, selected),
            fnp: ratio(missed, p - selected),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepOutcome {
    pub rep: usize,
    pub ours: RepMetrics,
    pub bh: RepMetrics,
    pub storey: RepMetrics,
    pub params: MixtureParams,
    pub fit_tv: f64,
    pub ess: f64,
    /// max |d + los − 1| when ν₀ < 0, or 1 − min(d + los) when ν₀ = 0.
    pub identity_gap: f64,
}

impl RepOutcome {
    pub fn metrics(&self, m: Method) -> &RepMetrics {
        match m {
            Method::Ours => &self.ours,
            Method::Bh => &self.bh,
            Method::Storey => &self.storey,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub mean_fdp: f64,
    pub mean_fnp: f64,
    pub mean_selected: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimReport {
    pub setting: SimSetting,
    pub summary: Vec<MethodSummary>,
    pub reps: Vec<RepOutcome>,
    pub failed: Vec<FailedRep>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailedRep {
    pub rep: usize,
    pub error: String,
}

/// Run one replication end to end.
pub fn run_replication(setting: &SimSetting, opts: &SimOptions, rep: usize) -> Result<RepOutcome> {
    let sim = gen_sim_panel(setting, opts, rep as u64)?;
    let out = run_window(
        &sim.panel,
        &sim.factors,
        &opts.pipeline,
        child_seed(setting.seed, "sim-pipeline", rep as u64),
        None,
    )?;
    let z = out.z();
    let d = &out.dvalues.d;
    let ours = select_fdr_stepup(d, setting.theta);
    let bh = bh_select(z, setting.theta);
    let storey = storey_select(z, setting.theta, DEFAULT_STOREY_LAMBDA)?;
    Ok(RepOutcome {
        rep,
        ours: RepMetrics::evaluate(&ours.decisions, &sim.mu),
        bh: RepMetrics::evaluate(&bh.decisions, &sim.mu),
        storey: RepMetrics::evaluate(&storey.decisions, &sim.mu),
        params: out.params,
        fit_tv: out.diagnostics.tv,
        ess: out.dvalues.ess,
        identity_gap: identity_gap(d, &out.dvalues.los, out.params.nu0),
    })
}

/// How far the d/LOS pair is from its identity: for ν₀ < 0 the two sum to
/// one, for ν₀ = 0 they sum to at least one.
pub fn identity_gap(d: &[f64], los: &[f64], nu0: f64) -> f64 {
    let sums = d.iter().zip(los).map(|(a, b)| a + b);
    if nu0 < 0.0 {
        sums.map(|s| (s - 1.0).abs()).fold(0.0, f64::max)
    } else {
        sums.map(|s| 1.0 - s).fold(0.0, f64::max)
    }
}

/// All replications of a setting, in parallel, summarized per method.
pub fn run_sim_study(setting: &SimSetting, opts: &SimOptions) -> Result<SimReport> {
    setting.validate()?;
    let results: Vec<Result<RepOutcome>> = (0..setting.reps)
        .into_par_iter()
        .map(|rep| run_replication(setting, opts, rep))
        .collect();
    let mut reps = Vec::new();
    let mut failed = Vec::new();
    for (rep, r) in results.into_iter().enumerate() {
        match r {
            Ok(o) => reps.push(o),
            Err(e) => failed.push(FailedRep {
                rep,
                error: e.to_string(),
            }),
        }
    }
    if !failed.is_empty() {
        if failed.len() * 10 >= setting.reps {
            return Err(Error::StudyFailed {
                failed: failed.len(),
                reps: setting.reps,
            });
        }
        log::warn!(
            "{} of {} replications failed and are excluded",
            failed.len(),
            setting.reps
        );
    }
    let summary = Method::ALL
        .iter()
        .map(|&m| {
            let col = |f: fn(&RepMetrics) -> f64| kahan_mean(&reps.iter().map(|r| f(r.metrics(m))).collect::<Vec<_>>());
            MethodSummary {
                method: m,
                mean_fdp: col(|x| x.fdp),
                mean_fnp: col(|x| x.fnp),
                mean_selected: col(|x| x.selected as f64),
            }
        })
        .collect();
    Ok(SimReport {
        setting: *setting,
        summary,
        reps,
        failed,
    })
}

impl SimReport {
    pub fn summary_for(&self, m: Method) -> &MethodSummary {
        self.summary.iter().find(|s| s.method == m).expect("all methods summarized")
    }

    /// One row per method:
    /// `dependence,sparsity,p,reps,theta,method,mean_fdp,mean_fnp,mean_selected,failed_reps`
    pub fn write_csv<W: Write>(&self, w: W, header: bool) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        if header {
            wtr.write_record([
                "dependence", "sparsity", "p", "reps", "theta", "method", "mean_fdp", "mean_fnp", "mean_selected",
                "failed_reps",
            ])?;
        }
        let s = &self.setting;
        for m in &self.summary {
            wtr.write_record([
                s.dependence.label().to_string(),
                s.sparsity.label().to_string(),
                s.p.to_string(),
                s.reps.to_string(),
                fmt_f64(s.theta),
                m.method.label().to_string(),
                fmt_f64(m.mean_fdp),
                fmt_f64(m.mean_fnp),
                fmt_f64(m.mean_selected),
                self.failed.len().to_string(),
            ])?;
        }
        wtr.flush().map_err(|e| Error::io("<sim csv>", e))?;
        Ok(())
    }

    /// Long format for distribution plots: `rep,method,fdp,fnp,selected`.
    pub fn write_long_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["rep", "method", "fdp", "fnp", "selected"])?;
        for r in &self.reps {
            for m in Method::ALL {
                let x = r.metrics(m);
                wtr.write_record([
                    r.rep.to_string(),
                    m.label().to_string(),
                    fmt_f64(x.fdp),
                    fmt_f64(x.fnp),
                    x.selected.to_string(),
                ])?;
            }
        }
        wtr.flush().map_err(|e| Error::io("<sim long csv>", e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_loadings_give_identity() {
        let a = DMatrix::zeros(20, 4);
        let s = loadings_correlation(&a, &DMatrix::identity(20, 20)).unwrap();
        assert_eq!(s, DMatrix::identity(20, 20));
    }

    #[test]
    fn fgn_diagonal_is_one() {
        let m = fgn_covariance(30, 0.9);
        for i in 0..30 {
            assert!((m[(i, i)] - 1.0).abs() < 1e-15);
        }
        // Lag-one autocorrelation of fGn is 2^{2H−1} − 1.
        assert!((m[(0, 1)] - (2f64.powf(0.8) - 1.0)).abs() < 1e-12);
        assert!(m.clone().cholesky().is_some());
    }

    #[test]
    fn power_decay_has_strong_dependence() {
        let mut rng = substream(1, "test-d2", 0);
        let s = epsilon_correlation(DependenceKind::D2, 100, &mut rng).unwrap();
        let top = s.symmetric_eigenvalues().max();
        assert!(top > 10.0, "largest eigenvalue {top}");
    }

    #[test]
    fn metrics_count_correctly() {
        let mu = [1.0, -1.0, 0.0, 2.0, 0.5];
        let m = RepMetrics::evaluate(&[true, true, false, false, false], &mu);
        assert_eq!(m.selected, 2);
        assert_eq!(m.false_discoveries, 1);
        assert_eq!(m.missed, 2);
        assert!((m.fdp - 0.5).abs() < 1e-15);
        assert!((m.fnp - 2.0 / 3.0).abs() < 1e-15);
        let none = RepMetrics::evaluate(&[false; 5], &mu);
        assert_eq!(none.fdp, 0.0);
    }

    #[test]
    fn panel_statistics_track_the_truth() {
        let setting = SimSetting {
            p: 200,
            sparsity: Sparsity::S2,
            dependence: DependenceKind::D1,
            theta: 0.1,
            reps: 1,
            seed: 3,
        };
        let opts = SimOptions::new(PipelineOptions::default());
        let sim = gen_sim_panel(&setting, &opts, 0).unwrap();
        let est = crate::panel::carhart_fit(&sim.panel, &sim.factors).unwrap();
        let resid: Vec<f64> = (0..200).map(|i| est.z[i] - sim.mu[i]).collect();
        let mean = kahan_mean(&resid);
        let var = kahan_mean(&resid.iter().map(|r| (r - mean).powi(2)).collect::<Vec<_>>());
        // Z − μ is unit-variance noise up to sampling error in σ̂.
        assert!((0.6..1.4).contains(&var), "noise variance {var}");
        let again = gen_sim_panel(&setting, &opts, 0).unwrap();
        assert_eq!(sim.panel.returns(), again.panel.returns());
    }
}
