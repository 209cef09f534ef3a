use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lad::{lad_regress, LadOptions};
use super::moments::{pooled_moments, solve_moments_with, PooledMoments, SolverOptions};
use super::tv::total_variation;
use super::MixtureParams;
use crate::dependence::DependenceModel;
use crate::error::{Error, Result};
use crate::rng::substream;

/// Search region of the grid fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitGrids {
    /// Percent of smallest |Z| used in the LAD step.
    pub m_pct: Vec<u32>,
    pub nu0: Vec<f64>,
    /// Shared grid for each of τ₁² and τ₂².
    pub tau_sq: Vec<f64>,
}

impl Default for FitGrids {
    fn default() -> Self {
        Self {
            m_pct: (10..=50).step_by(5).collect(),
            nu0: (0..=5).map(|k| (k as f64 - 5.0) / 10.0).collect(),
            tau_sq: (5..=30).map(|k| k as f64 / 100.0).collect(),
        }
    }
}

impl FitGrids {
    /// Number of (m, ν₀, τ₁², τ₂²) combinations.
    pub fn size(&self) -> usize {
        self.m_pct.len() * self.nu0.len() * self.tau_sq.len() * self.tau_sq.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_pct.is_empty() || self.nu0.is_empty() || self.tau_sq.is_empty() {
            return Err(Error::Config("fit grids must be nonempty".into()));
        }
        if let Some(m) = self.m_pct.iter().find(|&&m| m == 0 || m > 100) {
            return Err(Error::Config(format!("grid m = {m} is not a percentage in 1..=100")));
        }
        if let Some(v) = self.nu0.iter().find(|v| !(**v <= 0.0)) {
            return Err(Error::Config(format!("grid nu0 = {v} must be <= 0")));
        }
        if let Some(t) = self.tau_sq.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(Error::Config(format!("grid tau^2 = {t} must be positive")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub grids: FitGrids,
    /// Simulated samples averaged into each TV score.
    pub tv_draws: usize,
    pub solver: SolverOptions,
    pub lad: LadOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            grids: FitGrids::default(),
            tv_draws: 5,
            solver: SolverOptions::default(),
            lad: LadOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridStatus {
    Feasible,
    NoRoot,
    LadFailed,
}

/// One row of the grid trace. `tv` and `params` describe the best of the
/// roots found at this grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub m_pct: u32,
    pub nu0: f64,
    pub tau1_sq: f64,
    pub tau2_sq: f64,
    pub status: GridStatus,
    pub n_roots: usize,
    pub tv: Option<f64>,
    pub params: Option<MixtureParams>,
}

#[derive(Debug, Clone)]
pub struct FitDiagnostics {
    pub m_pct: u32,
    /// Estimated factor realization at the accepted m.
    pub v_hat: Vec<f64>,
    pub tv: f64,
    pub moments: PooledMoments,
    pub grid_trace: Vec<GridPoint>,
    pub feasible: usize,
}

/// Serializable fit result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub params: MixtureParams,
    pub m_pct: u32,
    pub tv: f64,
    pub v_hat: Vec<f64>,
    pub moments: PooledMoments,
    pub evaluated: usize,
    pub feasible: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_trace: Option<Vec<GridPoint>>,
}

impl FitReport {
    pub fn new(params: MixtureParams, diag: &FitDiagnostics, include_trace: bool) -> Self {
        Self {
            params,
            m_pct: diag.m_pct,
            tv: diag.tv,
            v_hat: diag.v_hat.clone(),
            moments: diag.moments,
            evaluated: diag.grid_trace.len(),
            feasible: diag.feasible,
            grid_trace: include_trace.then(|| diag.grid_trace.clone()),
        }
    }
}

/// Draw Z̃ = μ + B·w + √λ_p·ξ with μ_i i.i.d. from the prior.
pub fn simulate_z(params: &MixtureParams, dep: &DependenceModel, seed: u64) -> DVector<f64> {
    let mut rng = substream(seed, "simulate-z", 0);
    let p = dep.p();
    let mu: Vec<f64> = (0..p).map(|_| params.sample_mu(&mut rng)).collect();
    let noise = correlated_noise(dep, &mut rng);
    DVector::from_fn(p, |i, _| mu[i] + noise[i])
}

fn correlated_noise<R: Rng>(dep: &DependenceModel, rng: &mut R) -> DVector<f64> {
    let w = DVector::from_fn(dep.b.ncols(), |_, _| rng.sample::<f64, _>(StandardNormal));
    let sd = dep.lambda_p.sqrt();
    let mut out = &dep.b * w;
    for v in out.iter_mut() {
        *v += sd * rng.sample::<f64, _>(StandardNormal);
    }
    out
}

/// Fixed randomness reused by every candidate so TV differences reflect the
/// parameters rather than simulation noise.
struct DrawBank {
    u: Vec<f64>,
    g: Vec<f64>,
    noise: DVector<f64>,
}

impl DrawBank {
    fn new(dep: &DependenceModel, seed: u64, index: u64) -> Self {
        let mut rng = substream(seed, "fit-aeb-bank", index);
        let p = dep.p();
        let u = (0..p).map(|_| rng.random::<f64>()).collect();
        let g = (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let noise = correlated_noise(dep, &mut rng);
        Self { u, g, noise }
    }

    fn fill(&self, params: &MixtureParams, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = params.mu_from(self.u[i], self.g[i]) + self.noise[i];
        }
    }
}

struct MCell {
    v_hat: Option<Vec<f64>>,
}

/// Approximate empirical Bayes grid fit of the mixture prior to `z`.
pub fn fit_aeb(
    z: &[f64],
    dep: &DependenceModel,
    opts: &FitOptions,
    seed: u64,
) -> Result<(MixtureParams, FitDiagnostics)> {
    let p = z.len();
    if p != dep.p() {
        return Err(Error::DimensionMismatch {
            context: "fit: z vs dependence model",
            expected: dep.p(),
            actual: p,
        });
    }
    if p < 50 {
        return Err(Error::InvalidInput(format!("mixture fit needs p >= 50, got {p}")));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("test statistics"));
    }
    if opts.tv_draws == 0 {
        return Err(Error::Config("tv_draws must be at least 1".into()));
    }
    let grids = &opts.grids;
    grids.validate()?;

    let mut abs_sorted: Vec<f64> = z.iter().map(|v| v.abs()).collect();
    abs_sorted.sort_by(f64::total_cmp);

    let cells: Vec<MCell> = grids
        .m_pct
        .par_iter()
        .map(|&m| {
            let k = ((p as u64 * m as u64) / 100).max(1) as usize;
            let threshold = abs_sorted[k - 1];
            let rows: Vec<usize> = (0..p).filter(|&i| z[i].abs() <= threshold).collect();
            let v_hat = lad_step(z, &dep.c, &rows, opts.lad);
            MCell { v_hat }
        })
        .collect();

    let banks: Vec<DrawBank> = (0..opts.tv_draws as u64)
        .map(|r| DrawBank::new(dep, seed, r))
        .collect();

    let nt = grids.tau_sq.len();
    let nn = grids.nu0.len();
    let per_m = nn * nt * nt;

    // Moments for every (m, ν₀).
    let eta_sq: Vec<f64> = dep.eta_sq.iter().copied().collect();
    let mut moments: Vec<Option<PooledMoments>> = Vec::with_capacity(grids.m_pct.len() * nn);
    for cell in &cells {
        let fitted = cell
            .v_hat
            .as_ref()
            .map(|v| &dep.c * DVector::from_column_slice(v));
        for &nu0 in &grids.nu0 {
            let m = match &fitted {
                Some(cv) => {
                    let h: Vec<f64> = (0..p).map(|i| z[i] - cv[i] - nu0).collect();
                    Some(pooled_moments(&h, &eta_sq)?)
                }
                None => None,
            };
            moments.push(m);
        }
    }

    let evaluated: Vec<Result<(GridPoint, Option<f64>)>> = (0..grids.size())
        .into_par_iter()
        .map(|idx| {
            let mi = idx / per_m;
            let ni = (idx / (nt * nt)) % nn;
            let t1 = grids.tau_sq[(idx / nt) % nt];
            let t2 = grids.tau_sq[idx % nt];
            let nu0 = grids.nu0[ni];
            let mut point = GridPoint {
                m_pct: grids.m_pct[mi],
                nu0,
                tau1_sq: t1,
                tau2_sq: t2,
                status: GridStatus::LadFailed,
                n_roots: 0,
                tv: None,
                params: None,
            };
            let Some(mom) = moments[mi * nn + ni] else {
                return Ok((point, None));
            };
            let roots = solve_moments_with(&mom, t1, t2, &opts.solver)?;
            point.n_roots = roots.len();
            point.status = if roots.is_empty() {
                GridStatus::NoRoot
            } else {
                GridStatus::Feasible
            };
            let mut buf = vec![0.0; p];
            for r in roots {
                let params = MixtureParams {
                    pi0: r.pi0,
                    pi1: r.pi1,
                    pi2: r.pi2,
                    nu0,
                    nu1: r.u1 + nu0,
                    nu2: r.u2 + nu0,
                    tau1_sq: t1,
                    tau2_sq: t2,
                };
                if params.validate().is_err() {
                    continue;
                }
                let mut total = 0.0;
                for bank in &banks {
                    bank.fill(&params, &mut buf);
                    total += total_variation(z, &buf);
                }
                let tv = total / banks.len() as f64;
                if point.tv.is_none_or(|best| tv < best) {
                    point.tv = Some(tv);
                    point.params = Some(params);
                }
            }
            let tv = point.tv;
            Ok((point, tv))
        })
        .collect();

    let mut trace = Vec::with_capacity(evaluated.len());
    let mut best: Option<(usize, f64)> = None;
    for (idx, res) in evaluated.into_iter().enumerate() {
        let (point, tv) = res?;
        if let Some(tv) = tv {
            if best.is_none_or(|(_, b)| tv < b) {
                best = Some((idx, tv));
            }
        }
        trace.push(point);
    }
    let feasible = trace.iter().filter(|g| g.status == GridStatus::Feasible).count();
    let Some((best_idx, tv)) = best else {
        return Err(Error::FitFailed {
            evaluated: trace.len(),
            trace,
        });
    };
    let mi = best_idx / per_m;
    let ni = (best_idx / (nt * nt)) % nn;
    let params = trace[best_idx].params.expect("scored point has params");
    let diag = FitDiagnostics {
        m_pct: grids.m_pct[mi],
        v_hat: cells[mi].v_hat.clone().unwrap_or_default(),
        tv,
        moments: moments[mi * nn + ni].expect("scored point has moments"),
        grid_trace: trace,
        feasible,
    };
    Ok((params, diag))
}

fn lad_step(z: &[f64], c: &DMatrix<f64>, rows: &[usize], opts: LadOptions) -> Option<Vec<f64>> {
    if c.ncols() == 0 {
        return Some(Vec::new());
    }
    let x = c.select_rows(rows.iter());
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|&i| z[i]));
    match lad_regress(&x, &y, opts) {
        Ok(v) => Some(v.iter().copied().collect()),
        Err(e) => {
            log::debug!("LAD step skipped with {} rows: {e}", rows.len());
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependence::DependenceOptions;

    fn small_grids() -> FitGrids {
        FitGrids {
            m_pct: vec![20, 40],
            nu0: vec![-0.2, -0.1, 0.0],
            tau_sq: vec![0.1, 0.2, 0.3],
        }
    }

    /// Correlation of A·Aᵀ + I with a few strong factors.
    fn factor_correlation(p: usize, seed: u64) -> DMatrix<f64> {
        use rand_distr::{Distribution, Normal};
        let mut rng = crate::rng::substream(seed, "test-factor-corr", 0);
        let n = Normal::new(0.0, 2.0).unwrap();
        let a = DMatrix::from_fn(p, 4, |_, _| n.sample(&mut rng));
        let mut m = &a * a.transpose();
        for i in 0..p {
            m[(i, i)] += 1.0;
        }
        crate::dependence::correlation(&m).unwrap()
    }

    #[test]
    fn default_grid_size() {
        let g = FitGrids::default();
        assert_eq!(g.m_pct.len(), 9);
        assert_eq!(g.nu0.len(), 6);
        assert_eq!(g.tau_sq.len(), 26);
        assert_eq!(g.size(), 9 * 6 * 26 * 26);
        assert_eq!(g.nu0[0], -0.5);
        assert_eq!(g.nu0[5], 0.0);
        g.validate().unwrap();
    }

    #[test]
    fn simulate_z_pure_noise_and_determinism() {
        let p = 400;
        let dep = DependenceModel::from_correlation(DMatrix::identity(p, p), DependenceOptions::default()).unwrap();
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
        let z = simulate_z(&null, &dep, 3);
        assert!(z.mean().abs() < 4.0 / (p as f64).sqrt());
        assert_eq!(z, simulate_z(&null, &dep, 3));
        assert_ne!(z, simulate_z(&null, &dep, 4));
    }

    #[test]
    fn fit_trace_covers_grid_and_is_deterministic() {
        let dep = DependenceModel::from_correlation(factor_correlation(300, 2), DependenceOptions::default()).unwrap();
        let truth = MixtureParams::s1();
        let z: Vec<f64> = simulate_z(&truth, &dep, 1).iter().copied().collect();
        let opts = FitOptions {
            grids: small_grids(),
            ..Default::default()
        };
        let (params, diag) = fit_aeb(&z, &dep, &opts, 9).unwrap();
        params.validate().unwrap();
        assert_eq!(diag.grid_trace.len(), opts.grids.size());
        assert!((0.0..=1.0).contains(&diag.tv));
        assert!(opts.grids.m_pct.contains(&diag.m_pct));
        let (again, diag2) = fit_aeb(&z, &dep, &opts, 9).unwrap();
        assert_eq!(params, again);
        assert_eq!(diag.grid_trace, diag2.grid_trace);
        let json = serde_json::to_string(&FitReport::new(params, &diag, true)).unwrap();
        assert!(json.contains("grid_trace"));
        assert!(!serde_json::to_string(&FitReport::new(params, &diag, false)).unwrap().contains("grid_trace"));
    }

    #[test]
    fn small_p_rejected() {
        let dep = DependenceModel::from_correlation(DMatrix::identity(10, 10), DependenceOptions::default()).unwrap();
        assert!(fit_aeb(&[0.0; 10], &dep, &FitOptions::default(), 1).is_err());
    }
}
