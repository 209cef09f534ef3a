//! Correlation of the alpha estimates and its two factor decompositions.
//!
//! With eigenvalues λ₁ ≥ … ≥ λ_p and unit eigenvectors γ_j of Σ:
//!
//! * approximate model: `C = [√λ_j γ_j]` for every `λ_j > 1`, leaving
//!   per-unit idiosyncratic variance `η_i² = 1 − ‖c_i‖²`;
//! * strict model: `Σ = B Bᵀ + λ_p I` with `B = [√(λ_j − λ_p) γ_j]`. Columns
//!   whose eigenvalue equals the floor (within `spike_tol`) are dropped.
//!
//! A sample correlation from T months of p > T funds has rank below p, so
//! most of its eigenvalues are zero. Lifting them to a tiny floor makes the
//! strict model claim that nearly all of Z's noise lives in the T − 1
//! dimensional sample span, which is false for the intercept noise. The
//! default [`RankPolicy::PoolTail`] instead replaces every eigenvalue beyond
//! the factor eigenvalues by their mean, which keeps the trace and gives a
//! spiked strict model. When the number of months is known, only eigenvalues
//! above the sampling-noise edge [`noise_edge`] count as factors: with p > T a
//! weakly correlated panel has dozens of pure-noise eigenvalues above 1. The
//! factor count l is then taken on the pooled spectrum.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::panel::{excess_returns, AlphaEstimates, FactorSeries, ReturnPanel};

/// What to do when Σ has eigenvalues at or below the floor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankPolicy {
    /// Lift only the offending eigenvalues to the floor.
    Floor,
    /// Replace all eigenvalues past the factor eigenvalues by their mean.
    #[default]
    PoolTail,
}

impl std::str::FromStr for RankPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "floor" => Ok(RankPolicy::Floor),
            "pool_tail" | "pool-tail" => Ok(RankPolicy::PoolTail),
            _ => Err(Error::Config(format!(
                "unknown rank policy `{s}` (expected floor or pool_tail)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DependenceOptions {
    /// Eigenvalues at or below this are lifted to it.
    pub eigen_floor: f64,
    /// Eigenvalues within this distance of λ_p contribute no column to B.
    pub spike_tol: f64,
    pub rank_policy: RankPolicy,
}

impl Default for DependenceOptions {
    fn default() -> Self {
        Self {
            eigen_floor: 1e-6,
            spike_tol: 1e-10,
            rank_policy: RankPolicy::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DependenceModel {
    /// Covariance of the alpha estimates. Absent when built from a correlation.
    pub sigma_star: Option<DMatrix<f64>>,
    /// Correlation matrix Σ.
    pub sigma: DMatrix<f64>,
    /// Descending, floored at `eigen_floor`.
    pub eigenvalues: DVector<f64>,
    /// Column j pairs with `eigenvalues[j]`; largest-magnitude entry positive.
    pub eigenvectors: DMatrix<f64>,
    /// Number of eigenvalues strictly greater than 1.
    pub l: usize,
    /// p × l approximate-factor loadings.
    pub c: DMatrix<f64>,
    /// Strict-factor loadings, p × (number of eigenvalues above λ_p).
    pub b: DMatrix<f64>,
    pub lambda_p: f64,
    pub eta_sq: DVector<f64>,
    /// How many eigenvalues were at or below the floor.
    pub n_floored: usize,
    /// The common tail eigenvalue when [`RankPolicy::PoolTail`] was applied.
    pub pooled_tail: Option<f64>,
}

impl DependenceModel {
    pub fn p(&self) -> usize {
        self.sigma.nrows()
    }

    /// Decompose a correlation matrix.
    pub fn from_correlation(sigma: DMatrix<f64>, opts: DependenceOptions) -> Result<Self> {
        let eig = decompose(&sigma)?;
        Self::assemble(None, sigma, eig, None, opts)
    }

    /// As [`from_correlation`](Self::from_correlation), reusing a cached
    /// eigensystem when one exists for this exact matrix.
    pub fn from_correlation_cached(
        sigma: DMatrix<f64>,
        opts: DependenceOptions,
        cache: &EigenCache,
    ) -> Result<Self> {
        let eig = cache.get_or_compute(&sigma)?;
        Self::assemble(None, sigma, eig, None, opts)
    }

    fn assemble(
        sigma_star: Option<DMatrix<f64>>,
        sigma: DMatrix<f64>,
        eig: Eigensystem,
        n_obs: Option<usize>,
        opts: DependenceOptions,
    ) -> Result<Self> {
        let p = sigma.nrows();
        if p < 2 {
            return Err(Error::InvalidInput(format!(
                "dependence model needs at least 2 units, got {p}"
            )));
        }
        if !(opts.eigen_floor > 0.0) {
            return Err(Error::Config("eigen_floor must be positive".into()));
        }
        let mut values = eig.values;
        let n_floored = values.iter().filter(|&&v| v <= opts.eigen_floor).count();
        let mut l = values.iter().take_while(|&&v| v > 1.0).count();
        let mut pooled_tail = None;
        if n_floored > 0 {
            let cut = match n_obs {
                Some(t) => values.iter().take_while(|&&v| v > noise_edge(p, t)).count().min(l),
                None => l,
            };
            let tail_mean = values.iter().skip(cut).sum::<f64>() / (p - cut) as f64;
            if opts.rank_policy == RankPolicy::PoolTail && cut < p && tail_mean > opts.eigen_floor {
                log::warn!(
                    "correlation matrix is rank deficient ({n_floored} of {p} eigenvalues at or below {:e}); \
                     pooling the {} eigenvalues past the factors at {tail_mean:.6}",
                    opts.eigen_floor,
                    p - cut
                );
                for v in values.iter_mut().skip(cut) {
                    *v = tail_mean;
                }
                pooled_tail = Some(tail_mean);
                l = values.iter().take_while(|&&v| v > 1.0).count();
            } else {
                log::warn!(
                    "{n_floored} of {p} eigenvalues of the correlation matrix were lifted to {:e}",
                    opts.eigen_floor
                );
                for v in values.iter_mut() {
                    if *v <= opts.eigen_floor {
                        *v = opts.eigen_floor;
                    }
                }
            }
        }
        let vectors = eig.vectors;
        let lambda_p = values[p - 1];

        let mut c = DMatrix::zeros(p, l);
        for j in 0..l {
            c.set_column(j, &(vectors.column(j) * values[j].sqrt()));
        }

        let nb = values
            .iter()
            .take(p - 1)
            .take_while(|&&v| v - lambda_p > opts.spike_tol)
            .count();
        let mut b = DMatrix::zeros(p, nb);
        for j in 0..nb {
            b.set_column(j, &(vectors.column(j) * (values[j] - lambda_p).sqrt()));
        }

        let eta_sq = DVector::from_fn(p, |i, _| (1.0 - c.row(i).norm_squared()).clamp(0.0, 1.0));

        Ok(Self {
            sigma_star,
            sigma,
            eigenvalues: values,
            eigenvectors: vectors,
            l,
            c,
            b,
            lambda_p,
            eta_sq,
            n_floored,
            pooled_tail,
        })
    }

    /// Strict loadings without the spiked truncation: p × (p − 1), trailing
    /// columns zero where the eigenvalue sits at λ_p.
    pub fn strict_loadings_full(&self) -> DMatrix<f64> {
        let p = self.p();
        let mut full = DMatrix::zeros(p, p - 1);
        full.columns_mut(0, self.b.ncols()).copy_from(&self.b);
        full
    }

    /// ‖Σ − (BBᵀ + λ_p I)‖_F / ‖Σ‖_F
    pub fn strict_reconstruction_error(&self) -> f64 {
        let mut rec = &self.b * self.b.transpose();
        for i in 0..self.p() {
            rec[(i, i)] += self.lambda_p;
        }
        (&self.sigma - rec).norm() / self.sigma.norm()
    }
}

/// Build the dependence model of the alpha estimates from the panel they came
/// from: Σ* has entries ‖h‖²·cov(r_i − rf, r_j − rf), and Σ is its correlation.
pub fn build_dependence(
    estimates: &AlphaEstimates,
    panel: &ReturnPanel,
    factors: &FactorSeries,
    opts: DependenceOptions,
    cache: Option<&EigenCache>,
) -> Result<DependenceModel> {
    let p = panel.n_funds();
    if estimates.len() != p {
        return Err(Error::DimensionMismatch {
            context: "estimates vs panel funds",
            expected: p,
            actual: estimates.len(),
        });
    }
    if p < 2 {
        return Err(Error::InvalidInput(format!(
            "dependence model needs at least 2 funds, got {p}"
        )));
    }
    let t = panel.n_months();
    if t < 2 {
        return Err(Error::InvalidInput("need at least 2 months for a covariance".into()));
    }
    let mut y = excess_returns(panel, factors)?;
    for mut col in y.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    let cov = (y.transpose() * &y) / (t as f64 - 1.0);
    let h2 = estimates.h.norm_squared();
    let sigma_star = &cov * h2;
    let sigma = correlation(&cov)?;
    let eig = match cache {
        Some(c) => c.get_or_compute(&sigma)?,
        None => decompose(&sigma)?,
    };
    DependenceModel::assemble(Some(sigma_star), sigma, eig, Some(t), opts)
}

/// Largest eigenvalue a p × p sample correlation of T independent series
/// reaches asymptotically, `(1 + √(p/T))²`. Anything below it is
/// indistinguishable from sampling noise.
pub fn noise_edge(p: usize, t: usize) -> f64 {
    (1.0 + (p as f64 / t.max(1) as f64).sqrt()).powi(2)
}

/// Standardize a covariance matrix to unit diagonal.
pub fn correlation(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = cov.nrows();
    if cov.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("covariance matrix"));
    }
    let sd: Vec<f64> = (0..p).map(|i| cov[(i, i)].sqrt()).collect();
    if let Some(i) = sd.iter().position(|&s| !(s > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "unit {i} has zero variance; its correlations are undefined"
        )));
    }
    let mut out = DMatrix::from_fn(p, p, |i, j| cov[(i, j)] / (sd[i] * sd[j]));
    for i in 0..p {
        out[(i, i)] = 1.0;
    }
    // Exact symmetry.
    for j in 0..p {
        for i in 0..j {
            let v = 0.5 * (out[(i, j)] + out[(j, i)]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}

/// Sorted, sign-normalized eigensystem of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

pub fn decompose(sigma: &DMatrix<f64>) -> Result<Eigensystem> {
    let p = sigma.nrows();
    if sigma.ncols() != p {
        return Err(Error::DimensionMismatch {
            context: "correlation matrix must be square",
            expected: p,
            actual: sigma.ncols(),
        });
    }
    if sigma.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("correlation matrix"));
    }
    let se = SymmetricEigen::new(sigma.clone());
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].total_cmp(&se.eigenvalues[a]).then(a.cmp(&b)));
    let values = DVector::from_iterator(p, order.iter().map(|&k| se.eigenvalues[k]));
    let mut vectors = DMatrix::zeros(p, p);
    for (j, &k) in order.iter().enumerate() {
        let mut v = se.eigenvectors.column(k).into_owned();
        let lead = v.iter().copied().enumerate().fold((0, 0.0f64), |acc, (i, x)| {
            if x.abs() > acc.1.abs() {
                (i, x)
            } else {
                acc
            }
        });
        if lead.1 < 0.0 {
            v.neg_mut();
        }
        vectors.set_column(j, &v);
    }
    Ok(Eigensystem { values, vectors })
}

/// On-disk cache of eigensystems keyed by a SHA-256 of the matrix.
///
/// File layout, little-endian:
///
/// ```text
/// offset  size      field
/// 0       4         magic "EIGC"
/// 4       4         u32 format version (1)
/// 8       8         u64 dimension p
/// 16      8·p       f64 eigenvalues, descending
/// 16+8p   8·p·p     f64 eigenvectors, column-major
/// ```
#[derive(Debug, Clone)]
pub struct EigenCache {
    dir: PathBuf,
}

const CACHE_MAGIC: &[u8; 4] = b"EIGC";
const CACHE_VERSION: u32 = 1;

impl EigenCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// Hex digest over p and the column-major entries of `sigma`.
    pub fn key(sigma: &DMatrix<f64>) -> String {
        let mut h = Sha256::new();
        h.update((sigma.nrows() as u64).to_le_bytes());
        for v in sigma.iter() {
            h.update(v.to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn path_for(&self, sigma: &DMatrix<f64>) -> PathBuf {
        self.dir.join(format!("{}.eig", Self::key(sigma)))
    }

    pub fn get_or_compute(&self, sigma: &DMatrix<f64>) -> Result<Eigensystem> {
        let path = self.path_for(sigma);
        if path.exists() {
            match read_eigensystem(&path, sigma.nrows()) {
                Ok(e) => return Ok(e),
                Err(e) => log::warn!("ignoring unreadable eigen cache {}: {e}", path.display()),
            }
        }
        let eig = decompose(sigma)?;
        std::fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        write_eigensystem(&path, &eig)?;
        Ok(eig)
    }
}

pub fn write_eigensystem(path: &Path, eig: &Eigensystem) -> Result<()> {
    let p = eig.values.len();
    let mut buf = Vec::with_capacity(16 + 8 * p * (p + 1));
    buf.extend_from_slice(CACHE_MAGIC);
    buf.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    buf.extend_from_slice(&(p as u64).to_le_bytes());
    for v in eig.values.iter().chain(eig.vectors.iter()) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

pub fn read_eigensystem(path: &Path, expected_p: usize) -> Result<Eigensystem> {
    let mut buf = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::io(path, e))?;
    let bad = |m: &str| Error::InvalidInput(format!("{}: {m}", path.display()));
    if buf.len() < 16 || &buf[..4] != CACHE_MAGIC {
        return Err(bad("not an eigen cache file"));
    }
    let version = u32::from_le_bytes(buf[4..8].try_into().expect("4 bytes"));
    if version != CACHE_VERSION {
        return Err(bad("unsupported cache version"));
    }
    let p = u64::from_le_bytes(buf[8..16].try_into().expect("8 bytes")) as usize;
    if p != expected_p || buf.len() != 16 + 8 * p * (p + 1) {
        return Err(bad("dimension does not match"));
    }
    let mut it = buf[16..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    let values = DVector::from_iterator(p, it.by_ref().take(p));
    let vectors = DMatrix::from_iterator(p, p, it);
    Ok(Eigensystem { values, vectors })
}

/// Equicorrelation matrix with off-diagonal `rho`.
pub fn equicorrelation(p: usize, rho: f64) -> DMatrix<f64> {
    DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { rho })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_correlation(p: usize, k: usize, seed: u64) -> DMatrix<f64> {
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = crate::rng::substream(seed, "test-corr", 0);
        let a = DMatrix::from_fn(p, k, |_, _| -> f64 { StandardNormal.sample(&mut rng) });
        let mut m = &a * a.transpose();
        for i in 0..p {
            m[(i, i)] += 1.0;
        }
        correlation(&m).unwrap()
    }

    #[test]
    fn identity_has_no_factors() {
        let dep = DependenceModel::from_correlation(DMatrix::identity(6, 6), Default::default()).unwrap();
        assert_eq!(dep.l, 0);
        assert_eq!(dep.b.ncols(), 0);
        assert!((dep.lambda_p - 1.0).abs() < 1e-12);
        assert!(dep.strict_reconstruction_error() < 1e-12);
        assert!(dep.eta_sq.iter().all(|&e| (e - 1.0).abs() < 1e-12));
    }

    #[test]
    fn equicorrelation_closed_form() {
        let dep = DependenceModel::from_correlation(equicorrelation(4, 0.5), Default::default()).unwrap();
        let expected = [2.5, 0.5, 0.5, 0.5];
        for (v, e) in dep.eigenvalues.iter().zip(expected) {
            assert!((v - e).abs() < 1e-12);
        }
        assert_eq!(dep.l, 1);
        let full = dep.strict_loadings_full();
        assert_eq!(full.ncols(), 3);
        assert!((full.column(0).norm() - 2f64.sqrt()).abs() < 1e-12);
        assert!(full.column(1).norm() < 1e-6 && full.column(2).norm() < 1e-6);
        assert!(dep.strict_reconstruction_error() < 1e-8);
        // Leading eigenvector is the normalized ones vector, positive by convention.
        assert!(dep.eigenvectors.column(0).iter().all(|&v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn cache_roundtrip_matches_fresh_decomposition() {
        let dir = tempfile::tempdir().unwrap();
        let sigma = random_correlation(12, 3, 1);
        let cache = EigenCache::new(dir.path());
        let first = cache.get_or_compute(&sigma).unwrap();
        assert!(cache.path_for(&sigma).exists());
        let second = cache.get_or_compute(&sigma).unwrap();
        assert_eq!(first, second);
        assert_eq!(first, decompose(&sigma).unwrap());
        assert!(read_eigensystem(&cache.path_for(&sigma), 5).is_err());
    }

    #[test]
    fn rank_deficient_correlation_is_floored() {
        // Rank 3 correlation from 4 observations on 10 units.
        let mut rng = crate::rng::substream(3, "test-rank", 0);
        use rand_distr::{Distribution, StandardNormal};
        let y = DMatrix::from_fn(4, 10, |_, _| -> f64 { StandardNormal.sample(&mut rng) });
        let mut yc = y.clone();
        for mut c in yc.column_iter_mut() {
            let m = c.mean();
            c.add_scalar_mut(-m);
        }
        let sigma = correlation(&(yc.transpose() * &yc)).unwrap();
        let floor = DependenceOptions {
            rank_policy: RankPolicy::Floor,
            ..Default::default()
        };
        let dep = DependenceModel::from_correlation(sigma.clone(), floor).unwrap();
        assert_eq!(dep.lambda_p, 1e-6);
        assert_eq!(dep.n_floored, 7);
        assert_eq!(dep.pooled_tail, None);
        assert_eq!(dep.b.ncols(), 3);
        assert!(dep.strict_reconstruction_error() < 1e-5);

        // Every nonzero eigenvalue exceeds 1 here, so there is nothing to pool.
        let pooled = DependenceModel::from_correlation(sigma, Default::default()).unwrap();
        assert_eq!(pooled.pooled_tail, None);
    }

    #[test]
    fn rank_deficient_tail_is_pooled() {
        // 12 observations on 40 units with one common factor.
        let mut rng = crate::rng::substream(4, "test-rank", 0);
        use rand_distr::{Distribution, StandardNormal};
        let f: Vec<f64> = (0..12).map(|_| -> f64 { StandardNormal.sample(&mut rng) }).collect();
        let mut y = DMatrix::from_fn(12, 40, |t, _| -> f64 { let e: f64 = StandardNormal.sample(&mut rng); f[t] + e });
        for mut c in y.column_iter_mut() {
            let m = c.mean();
            c.add_scalar_mut(-m);
        }
        let sigma = correlation(&(y.transpose() * &y)).unwrap();
        let floor = DependenceOptions {
            rank_policy: RankPolicy::Floor,
            ..Default::default()
        };
        let dep = DependenceModel::from_correlation(sigma.clone(), floor).unwrap();
        let pooled = DependenceModel::from_correlation(sigma, Default::default()).unwrap();
        let tail = pooled.pooled_tail.expect("rank deficient input is pooled");
        assert_eq!(pooled.n_floored, 29);
        assert!((pooled.eigenvalues.sum() - 40.0).abs() < 1e-10);
        assert_eq!(pooled.lambda_p, tail);
        assert_eq!(pooled.b.ncols(), pooled.l);
        for j in 0..pooled.l {
            assert_eq!(pooled.eigenvalues[j], dep.eigenvalues[j]);
        }
    }

    #[test]
    fn noise_eigenvalues_are_pooled_when_months_are_known() {
        // 40 months, 150 units, one weak common factor: dozens of noise
        // eigenvalues exceed 1 but stay under the sampling edge.
        let (t, p) = (40, 150);
        let mut rng = crate::rng::substream(6, "test-rank", 0);
        use rand_distr::{Distribution, StandardNormal};
        let f: Vec<f64> = (0..t).map(|_| -> f64 { StandardNormal.sample(&mut rng) }).collect();
        let mut y = DMatrix::from_fn(t, p, |k, _| -> f64 {
            let e: f64 = StandardNormal.sample(&mut rng);
            0.2f64.sqrt() * f[k] + 0.8f64.sqrt() * e
        });
        for mut c in y.column_iter_mut() {
            let m = c.mean();
            c.add_scalar_mut(-m);
        }
        let sigma = correlation(&(y.transpose() * &y)).unwrap();
        let eig = decompose(&sigma).unwrap();
        assert!(eig.values.iter().filter(|&&v| v > 1.0).count() > 10);
        let dep = DependenceModel::assemble(None, sigma, eig, Some(t), Default::default()).unwrap();
        assert_eq!(dep.l, 1);
        let tail = dep.pooled_tail.unwrap();
        assert!(tail > 0.5 && tail < 1.0, "{tail}");
        assert!((dep.eigenvalues.sum() - p as f64).abs() < 1e-9);
    }

    #[test]
    fn one_dominant_factor_gives_large_leading_eigenvalue() {
        let p = 200;
        let sigma = DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { 0.8 });
        let dep = DependenceModel::from_correlation(sigma, Default::default()).unwrap();
        assert!(dep.eigenvalues[0] > 0.5 * p as f64);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn decomposition_invariants(p in 2usize..30, k in 0usize..5, seed in any::<u64>()) {
            let sigma = random_correlation(p, k, seed);
            let dep = DependenceModel::from_correlation(sigma.clone(), Default::default()).unwrap();
            prop_assert!(dep.strict_reconstruction_error() < 1e-8);
            prop_assert!((dep.eigenvalues.sum() - p as f64).abs() < 1e-8);
            for i in 0..p {
                prop_assert!((dep.sigma[(i, i)] - 1.0).abs() < 1e-10);
                let e = dep.eta_sq[i];
                prop_assert!((0.0..=1.0).contains(&e));
                prop_assert!((e + dep.c.row(i).norm_squared() - 1.0).abs() < 1e-10);
            }
            // A = Σ − CCᵀ is positive semidefinite.
            let a = &sigma - &dep.c * dep.c.transpose();
            let min_eig = SymmetricEigen::new(a).eigenvalues.min();
            prop_assert!(min_eig > -1e-9);
            // Determinism.
            let again = DependenceModel::from_correlation(sigma, Default::default()).unwrap();
            prop_assert_eq!(dep.eigenvectors, again.eigenvectors);
        }
    }
}
