//! Posterior non-skill probabilities under the strict factor model
//! Z = μ + B·W + ξ, ξ ~ N(0, λ_p I).
//!
//! For each draw of W the per-unit ratio
//!
//! ```text
//! ratio_i(W) = [π₀φ₀ + π₁G₁ + π₂G₂] / [π₀φ₀ + π₁φ₁ + π₂φ₂]
//! ```
//!
//! is the conditional probability that μ_i ≤ 0, where φ_k is the normal
//! density of z_i under component k given b_i·W and G_k is the part of that
//! density with μ ≤ 0. Averaging the ratios with self-normalized weights
//! proportional to the joint density of Z gives the d-values; the mirror
//! terms Q_k = φ_k − G_k give the LOS values. Both share the same draws.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dependence::DependenceModel;
use crate::error::{Error, Result};
use crate::mixture::MixtureParams;
use crate::panel::fmt_f64;
use crate::rng::substream;
use crate::stats::{ln_norm_cdf, ln_normal_pdf, log_sum_exp};

/// ∫_{μ≤0} dN(z; μ + biw, λ_p)·dN(μ; mu0, τ²) dμ
pub fn g_term(mu0: f64, tau_sq: f64, lambda_p: f64, biw: f64, z: f64) -> Result<f64> {
    check_variances(tau_sq, lambda_p)?;
    Ok(ln_g_term(mu0, tau_sq, lambda_p, biw, z).exp())
}

/// ∫_{μ≥0} dN(z; μ + biw, λ_p)·dN(μ; mu0, τ²) dμ
pub fn q_term(mu0: f64, tau_sq: f64, lambda_p: f64, biw: f64, z: f64) -> Result<f64> {
    check_variances(tau_sq, lambda_p)?;
    Ok(ln_q_term(mu0, tau_sq, lambda_p, biw, z).exp())
}

fn check_variances(tau_sq: f64, lambda_p: f64) -> Result<()> {
    if !(tau_sq > 0.0 && lambda_p > 0.0) {
        return Err(Error::InvalidInput(format!(
            "variances must be positive (tau^2 = {tau_sq}, lambda_p = {lambda_p})"
        )));
    }
    Ok(())
}

/// β/σ with σ² = (1/λ + 1/τ²)⁻¹ and β = σ²((z − b)/λ + μ₀/τ²).
#[inline]
fn beta_over_sigma(mu0: f64, tau_sq: f64, lambda_p: f64, biw: f64, z: f64) -> f64 {
    ((z - biw) * tau_sq + mu0 * lambda_p) / (lambda_p * tau_sq * (lambda_p + tau_sq)).sqrt()
}

#[inline]
pub fn ln_g_term(mu0: f64, tau_sq: f64, lambda_p: f64, biw: f64, z: f64) -> f64 {
    ln_normal_pdf(z, mu0 + biw, tau_sq + lambda_p)
        + ln_norm_cdf(-beta_over_sigma(mu0, tau_sq, lambda_p, biw, z))
}

#[inline]
pub fn ln_q_term(mu0: f64, tau_sq: f64, lambda_p: f64, biw: f64, z: f64) -> f64 {
    ln_normal_pdf(z, mu0 + biw, tau_sq + lambda_p)
        + ln_norm_cdf(beta_over_sigma(mu0, tau_sq, lambda_p, biw, z))
}

/// How the latent factor draws are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Proposal {
    /// W ~ N(0, I); weights are the joint density of Z given W.
    Prior,
    /// W ~ N(Ŵ, H⁻¹) around the posterior mode, reweighted to the exact
    /// posterior.
    Laplace,
}

impl std::str::FromStr for Proposal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prior" => Ok(Proposal::Prior),
            "laplace" => Ok(Proposal::Laplace),
            other => Err(Error::Config(format!(
                "unknown proposal `{other}` (expected prior or laplace)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DValueOptions {
    pub n_samples: usize,
    pub block_size: usize,
    pub proposal: Proposal,
    /// Effective sample sizes below this are reported with a warning.
    pub ess_warn: f64,
}

impl Default for DValueOptions {
    fn default() -> Self {
        Self {
            n_samples: 2000,
            block_size: 256,
            proposal: Proposal::Laplace,
            ess_warn: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DValues {
    pub d: Vec<f64>,
    pub los: Vec<f64>,
    pub ess: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub proposal: Proposal,
}

/// Per-unit mixture terms for the three components.
struct Terms {
    ln_pi: [f64; 3],
    mean: [f64; 3],
    var: [f64; 3],
    tau_sq: [f64; 2],
    lambda_p: f64,
    /// Whether the point mass counts towards μ ≥ 0.
    point_in_los: bool,
}

impl Terms {
    fn new(params: &MixtureParams, lambda_p: f64) -> Self {
        Self {
            ln_pi: [params.pi0.ln(), params.pi1.ln(), params.pi2.ln()],
            mean: [params.nu0, params.nu1, params.nu2],
            var: [lambda_p, params.tau1_sq + lambda_p, params.tau2_sq + lambda_p],
            tau_sq: [params.tau1_sq, params.tau2_sq],
            lambda_p,
            point_in_los: params.nu0 == 0.0,
        }
    }

    /// (ln f_i, ln numerator for d, ln numerator for LOS) given b_i·W.
    #[inline]
    fn eval(&self, z: f64, biw: f64) -> (f64, f64, f64) {
        let l0 = self.ln_pi[0] + ln_normal_pdf(z, self.mean[0] + biw, self.var[0]);
        let mut dens = [l0, f64::NEG_INFINITY, f64::NEG_INFINITY];
        let mut g = [l0, f64::NEG_INFINITY, f64::NEG_INFINITY];
        let mut q = [
            if self.point_in_los { l0 } else { f64::NEG_INFINITY },
            f64::NEG_INFINITY,
            f64::NEG_INFINITY,
        ];
        for k in 1..3 {
            if self.ln_pi[k] == f64::NEG_INFINITY {
                continue;
            }
            let (mu0, t) = (self.mean[k], self.tau_sq[k - 1]);
            let base = self.ln_pi[k] + ln_normal_pdf(z, mu0 + biw, self.var[k]);
            let bs = beta_over_sigma(mu0, t, self.lambda_p, biw, z);
            dens[k] = base;
            g[k] = base + ln_norm_cdf(-bs);
            q[k] = base + ln_norm_cdf(bs);
        }
        (log_sum_exp(&dens), log_sum_exp(&g), log_sum_exp(&q))
    }
}

/// Streaming weighted sums with a running maximum log-weight.
#[derive(Debug, Clone)]
struct Accumulator {
    max: f64,
    sum_w: f64,
    sum_w2: f64,
    d: Vec<f64>,
    los: Vec<f64>,
}

impl Accumulator {
    fn new(p: usize) -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum_w: 0.0,
            sum_w2: 0.0,
            d: vec![0.0; p],
            los: vec![0.0; p],
        }
    }

    fn rescale(&mut self, new_max: f64) {
        if self.max == f64::NEG_INFINITY {
            self.max = new_max;
            return;
        }
        let f = (self.max - new_max).exp();
        self.sum_w *= f;
        self.sum_w2 *= f * f;
        for v in self.d.iter_mut().chain(self.los.iter_mut()) {
            *v *= f;
        }
        self.max = new_max;
    }

    fn push(&mut self, logw: f64, ratio_d: &[f64], ratio_los: &[f64]) {
        if logw == f64::NEG_INFINITY {
            return;
        }
        if logw > self.max {
            self.rescale(logw);
        }
        let w = (logw - self.max).exp();
        self.sum_w += w;
        self.sum_w2 += w * w;
        for (acc, r) in self.d.iter_mut().zip(ratio_d) {
            *acc += w * r;
        }
        for (acc, r) in self.los.iter_mut().zip(ratio_los) {
            *acc += w * r;
        }
    }

    fn merge(&mut self, mut other: Accumulator) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max > self.max {
            self.rescale(other.max);
        } else {
            other.rescale(self.max);
        }
        self.sum_w += other.sum_w;
        self.sum_w2 += other.sum_w2;
        for (a, b) in self.d.iter_mut().zip(&other.d) {
            *a += b;
        }
        for (a, b) in self.los.iter_mut().zip(&other.los) {
            *a += b;
        }
    }
}

/// Gaussian approximation to the posterior of W.
struct LaplaceFit {
    mode: DVector<f64>,
    /// Upper Cholesky factor Lᵀ of H = I + Bᵀ diag(κ) B.
    chol_upper: DMatrix<f64>,
}

/// Monte Carlo d-values and LOS values for every unit.
pub fn compute_dvalues(
    z: &[f64],
    dep: &DependenceModel,
    params: &MixtureParams,
    opts: &DValueOptions,
    seed: u64,
) -> Result<DValues> {
    params.validate()?;
    let p = z.len();
    if p != dep.p() {
        return Err(Error::DimensionMismatch {
            context: "d-values: z vs dependence model",
            expected: dep.p(),
            actual: p,
        });
    }
    if opts.n_samples < 2 {
        return Err(Error::Config("n_samples must be at least 2".into()));
    }
    if opts.block_size == 0 {
        return Err(Error::Config("block_size must be positive".into()));
    }
    if !(dep.lambda_p > 0.0) {
        return Err(Error::InvalidInput("lambda_p must be positive".into()));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("test statistics"));
    }

    let terms = Terms::new(params, dep.lambda_p);
    let k = dep.b.ncols();
    let laplace = match opts.proposal {
        Proposal::Laplace if k > 0 => Some(laplace_fit(z, dep, params)?),
        _ => None,
    };

    let n_blocks = opts.n_samples.div_ceil(opts.block_size);
    let blocks: Vec<Accumulator> = (0..n_blocks)
        .into_par_iter()
        .map(|blk| {
            let start = blk * opts.block_size;
            let n = opts.block_size.min(opts.n_samples - start);
            let mut rng = substream(seed, "dvalues", blk as u64);
            let eps = DMatrix::from_fn(k, n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let w = match &laplace {
                Some(lf) => {
                    let mut w = lf
                        .chol_upper
                        .solve_upper_triangular(&eps)
                        .expect("Cholesky factor has a positive diagonal");
                    for mut col in w.column_iter_mut() {
                        col += &lf.mode;
                    }
                    w
                }
                None => eps.clone(),
            };
            let bw = &dep.b * &w;
            let mut acc = Accumulator::new(p);
            let mut rd = vec![0.0; p];
            let mut rl = vec![0.0; p];
            for m in 0..n {
                let mut logw = 0.0;
                for i in 0..p {
                    let biw = if k > 0 { bw[(i, m)] } else { 0.0 };
                    let (lf, lg, lq) = terms.eval(z[i], biw);
                    logw += lf;
                    rd[i] = (lg - lf).exp().min(1.0);
                    rl[i] = (lq - lf).exp().min(1.0);
                    debug_assert!(rd[i].is_finite() && rl[i].is_finite());
                }
                if laplace.is_some() {
                    // Target N(W; 0, I) over proposal N(W; Ŵ, H⁻¹), constants dropped.
                    logw += -0.5 * w.column(m).norm_squared() + 0.5 * eps.column(m).norm_squared();
                }
                debug_assert!(!logw.is_nan());
                acc.push(logw, &rd, &rl);
            }
            acc
        })
        .collect();

    let mut total = Accumulator::new(p);
    for b in blocks {
        total.merge(b);
    }
    if total.max == f64::NEG_INFINITY || !(total.sum_w > 0.0) {
        return Err(Error::Numerical(format!(
            "all {} Monte Carlo log-weights are -inf; the data are impossible under the fitted prior",
            opts.n_samples
        )));
    }
    let ess = total.sum_w * total.sum_w / total.sum_w2;
    if ess < opts.ess_warn {
        log::warn!(
            "d-value effective sample size {ess:.1} of {} draws is below {}",
            opts.n_samples,
            opts.ess_warn
        );
    }
    let d = total.d.iter().map(|v| (v / total.sum_w).clamp(0.0, 1.0)).collect();
    let los = total.los.iter().map(|v| (v / total.sum_w).clamp(0.0, 1.0)).collect();
    Ok(DValues {
        d,
        los,
        ess,
        n_samples: opts.n_samples,
        seed,
        proposal: opts.proposal,
    })
}

/// Posterior mode of W by EM over the component memberships, then the
/// curvature there. The point mass is widened for this step only so the mode
/// search is not captured by single units.
fn laplace_fit(z: &[f64], dep: &DependenceModel, params: &MixtureParams) -> Result<LaplaceFit> {
    let p = z.len();
    let b = &dep.b;
    let k = b.ncols();
    let lp = dep.lambda_p;
    let pis = [params.pi0, params.pi1, params.pi2];
    let means = [params.nu0, params.nu1, params.nu2];
    let vars = [
        lp.max(params.tau1_sq.min(params.tau2_sq)),
        params.tau1_sq + lp,
        params.tau2_sq + lp,
    ];

    // Responsibilities, per-unit precision a_i and working response y_i.
    let moments = |x: &DVector<f64>| -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let mut a = DVector::zeros(p);
        let mut y = DVector::zeros(p);
        let mut info = DVector::zeros(p);
        for i in 0..p {
            let r = z[i] - x[i];
            let mut lw = [f64::NEG_INFINITY; 3];
            for c in 0..3 {
                if pis[c] > 0.0 {
                    lw[c] = pis[c].ln() + ln_normal_pdf(r, means[c], vars[c]);
                }
            }
            let lse = log_sum_exp(&lw);
            let (mut ai, mut yi, mut s1, mut s2) = (0.0, 0.0, 0.0, 0.0);
            for c in 0..3 {
                let kappa = (lw[c] - lse).exp();
                ai += kappa / vars[c];
                yi += kappa * (z[i] - means[c]) / vars[c];
                let score = (r - means[c]) / vars[c];
                s1 += kappa * score;
                s2 += kappa * score * score;
            }
            a[i] = ai;
            y[i] = yi;
            // −d²/dr² ln f = E[1/v] − Var[(r − ν)/v] under the responsibilities.
            info[i] = (ai - (s2 - s1 * s1)).max(0.0);
        }
        (a, y, info)
    };

    let hessian = |diag: &DVector<f64>| -> DMatrix<f64> {
        let mut scaled = b.clone();
        for (i, mut row) in scaled.row_iter_mut().enumerate() {
            row *= diag[i];
        }
        let mut h = b.transpose() * scaled;
        for j in 0..k {
            h[(j, j)] += 1.0;
        }
        h
    };

    let mut w = DVector::zeros(k);
    for _ in 0..200 {
        let x = b * &w;
        let (a, y, _) = moments(&x);
        let h = hessian(&a);
        let next = h
            .cholesky()
            .ok_or_else(|| Error::Numerical("posterior mode system is not positive definite".into()))?
            .solve(&(b.transpose() * y));
        let delta = (&next - &w).amax();
        w = next;
        if delta < 1e-8 * (1.0 + w.amax()) {
            break;
        }
    }
    let x = b * &w;
    let (_, _, info) = moments(&x);
    let h = hessian(&info);
    let chol = h
        .cholesky()
        .ok_or_else(|| Error::Numerical("Laplace precision is not positive definite".into()))?;
    Ok(LaplaceFit {
        mode: w,
        chol_upper: chol.l().transpose(),
    })
}

/// P(μ_i ≤ 0 | Z_i) under the marginal model Z_i = μ_i + N(0, 1).
pub fn local_fdr(z: f64, params: &MixtureParams) -> Result<f64> {
    params.validate()?;
    let t = Terms::new(params, 1.0);
    let (lf, lg, _) = t.eval(z, 0.0);
    Ok((lg - lf).exp().clamp(0.0, 1.0))
}

/// D-values with identifiers, ready for output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DValueReport {
    pub fund_ids: Vec<String>,
    pub z: Vec<f64>,
    pub d: Vec<f64>,
    pub los: Vec<f64>,
    pub local_fdr: Vec<f64>,
    pub ess: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub proposal: Proposal,
}

impl DValueReport {
    pub fn new(fund_ids: Vec<String>, z: Vec<f64>, dv: DValues, params: &MixtureParams) -> Result<Self> {
        if fund_ids.len() != z.len() || z.len() != dv.d.len() {
            return Err(Error::DimensionMismatch {
                context: "d-value report columns",
                expected: z.len(),
                actual: fund_ids.len().min(dv.d.len()),
            });
        }
        let local_fdr = z.iter().map(|&zi| local_fdr(zi, params)).collect::<Result<_>>()?;
        Ok(Self {
            fund_ids,
            z,
            d: dv.d,
            los: dv.los,
            local_fdr,
            ess: dv.ess,
            n_samples: dv.n_samples,
            seed: dv.seed,
            proposal: dv.proposal,
        })
    }

    /// `fund_id,z,d_value,los,local_fdr`
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["fund_id", "z", "d_value", "los", "local_fdr"])?;
        for i in 0..self.z.len() {
            wtr.write_record([
                self.fund_ids[i].clone(),
                fmt_f64(self.z[i]),
                fmt_f64(self.d[i]),
                fmt_f64(self.los[i]),
                fmt_f64(self.local_fdr[i]),
            ])?;
        }
        wtr.flush().map_err(|e| Error::io("<dvalue csv>", e))?;
        Ok(())
    }

    /// Reads the CSV written by [`write_csv`](Self::write_csv). Run metadata
    /// is not stored in the CSV and comes back zeroed.
    pub fn read_csv(path: &std::path::Path) -> Result<Self> {
        use crate::panel::{csv_parse_error, csv_reader, expect_header, line_of, parse_f64};
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv_reader(file);
        expect_header(&mut rdr, &["fund_id", "z", "d_value", "los", "local_fdr"], path)?;
        let mut out = Self {
            fund_ids: Vec::new(),
            z: Vec::new(),
            d: Vec::new(),
            los: Vec::new(),
            local_fdr: Vec::new(),
            ess: 0.0,
            n_samples: 0,
            seed: 0,
            proposal: Proposal::Prior,
        };
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_parse_error(e, path))?;
            let line = line_of(&rec);
            if rec.len() != 5 {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("expected 5 fields, found {}", rec.len()),
                });
            }
            let num = |k: usize| {
                parse_f64(&rec[k]).ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("invalid number `{}`", &rec[k]),
                })
            };
            out.fund_ids.push(rec[0].to_string());
            out.z.push(num(1)?);
            out.d.push(num(2)?);
            out.los.push(num(3)?);
            out.local_fdr.push(num(4)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependence::{equicorrelation, DependenceOptions};

    #[test]
    fn g_and_q_symmetric_case() {
        let g = g_term(0.0, 0.5, 0.5, 0.0, 0.0).unwrap();
        let q = q_term(0.0, 0.5, 0.5, 0.0, 0.0).unwrap();
        let half = 0.5 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((g - half).abs() < 1e-15);
        assert!((q - half).abs() < 1e-15);
        assert!((g - 0.199471).abs() < 1e-6);
    }

    #[test]
    fn g_term_far_negative_mean() {
        let (z, b, lp) = (0.3, 0.2, 0.4);
        let g = g_term(-100.0, 0.01, lp, b, z).unwrap();
        let full = crate::stats::normal_pdf(z, -100.0 + b, lp + 0.01);
        assert!(((g / full) - 1.0).abs() < 1e-12 || (g == 0.0 && full == 0.0));
        let lg = ln_g_term(-100.0, 0.01, lp, b, z);
        let lfull = ln_normal_pdf(z, -100.0 + b, lp + 0.01);
        assert!((lg - lfull).abs() < 1e-12);
    }

    #[test]
    fn variances_must_be_positive() {
        assert!(g_term(0.0, 0.0, 1.0, 0.0, 0.0).is_err());
        assert!(q_term(0.0, 1.0, -1.0, 0.0, 0.0).is_err());
    }

    fn dep3() -> DependenceModel {
        DependenceModel::from_correlation(equicorrelation(3, 0.5), DependenceOptions::default()).unwrap()
    }

    #[test]
    fn pure_point_mass_below_zero() {
        let params = MixtureParams {
            pi0: 1.0,
            pi1: 0.0,
            pi2: 0.0,
            nu0: -0.2,
            nu1: 0.0,
            nu2: 0.0,
            tau1_sq: 0.1,
            tau2_sq: 0.1,
        };
        for proposal in [Proposal::Prior, Proposal::Laplace] {
            let opts = DValueOptions {
                n_samples: 300,
                proposal,
                ..Default::default()
            };
            let dv = compute_dvalues(&[0.5, -1.0, 2.0], &dep3(), &params, &opts, 1).unwrap();
            assert!(dv.d.iter().all(|&d| d == 1.0), "{:?}", dv.d);
            assert!(dv.los.iter().all(|&l| l == 0.0));
        }
    }

    #[test]
    fn mass_far_positive_gives_zero() {
        let params = MixtureParams {
            pi0: 0.0,
            pi1: 0.0,
            pi2: 1.0,
            nu0: 0.0,
            nu1: 0.0,
            nu2: 50.0,
            tau1_sq: 0.1,
            tau2_sq: 0.01,
        };
        let dv = compute_dvalues(&[49.0, 50.5, 51.0], &dep3(), &params, &DValueOptions::default(), 2).unwrap();
        assert!(dv.d.iter().all(|&d| d < 1e-6), "{:?}", dv.d);
    }

    #[test]
    fn identity_and_equivariance() {
        let dep = DependenceModel::from_correlation(equicorrelation(6, 0.4), DependenceOptions::default()).unwrap();
        let mut params = MixtureParams::s1();
        params.nu0 = -0.1;
        let z = [0.3, -1.2, 2.2, 0.0, 1.1, -0.4];
        let opts = DValueOptions {
            n_samples: 500,
            ..Default::default()
        };
        let dv = compute_dvalues(&z, &dep, &params, &opts, 3).unwrap();
        for i in 0..z.len() {
            assert!((dv.d[i] + dv.los[i] - 1.0).abs() < 1e-10);
        }
        assert!(dv.ess > 0.0 && dv.ess <= 500.0 + 1e-9);

        // Permuting the units permutes the d-values (equicorrelation is permutation invariant).
        let perm = [5, 4, 3, 2, 1, 0];
        let zp: Vec<f64> = perm.iter().map(|&i| z[i]).collect();
        let prior = DValueOptions {
            proposal: Proposal::Prior,
            ..opts
        };
        let a = compute_dvalues(&z, &dep, &params, &prior, 3).unwrap();
        let b = compute_dvalues(&zp, &dep, &params, &prior, 3).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            assert!((a.d[i] - b.d[k]).abs() < 1e-12);
        }

        params.nu0 = 0.0;
        let dv = compute_dvalues(&z, &dep, &params, &opts, 3).unwrap();
        assert!(dv.d.iter().zip(&dv.los).all(|(d, l)| d + l >= 1.0 - 1e-10));
    }

    #[test]
    fn local_fdr_cases() {
        let null = MixtureParams {
            pi0: 1.0,
            pi1: 0.0,
            pi2: 0.0,
            nu0: 0.0,
            nu1: 0.0,
            nu2: 0.0,
            tau1_sq: 0.1,
            tau2_sq: 0.1,
        };
        assert_eq!(local_fdr(1.7, &null).unwrap(), 1.0);
        let sym = MixtureParams {
            pi0: 0.0,
            pi1: 0.5,
            pi2: 0.5,
            nu0: 0.0,
            nu1: -1.0,
            nu2: 1.0,
            tau1_sq: 0.2,
            tau2_sq: 0.2,
        };
        assert!((local_fdr(0.0, &sym).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn block_layout_does_not_depend_on_thread_count() {
        let dep = DependenceModel::from_correlation(equicorrelation(8, 0.3), DependenceOptions::default()).unwrap();
        let z = [0.1, 0.5, -0.3, 1.9, 2.5, -1.0, 0.0, 0.7];
        let params = MixtureParams::s2();
        let opts = DValueOptions {
            n_samples: 1000,
            block_size: 128,
            ..Default::default()
        };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| compute_dvalues(&z, &dep, &params, &opts, 5).unwrap());
        let b = three.install(|| compute_dvalues(&z, &dep, &params, &opts, 5).unwrap());
        assert_eq!(a, b);
    }
}
