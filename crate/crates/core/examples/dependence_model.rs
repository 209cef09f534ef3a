//! Factor decomposition of a correlation matrix: approximate-factor loadings
//! C, strict-factor loadings B, the floor eigenvalue and per-unit η².
//! Also shows the on-disk eigen cache and a rank-deficient sample matrix.
//!
//!     cargo run --release --example dependence_model

use fundsel::dependence::{DependenceModel, DependenceOptions, EigenCache, RankPolicy};
use fundsel::rng::substream;
use fundsel::simlab::{epsilon_correlation, DependenceKind};

fn main() -> fundsel::Result<()> {
    let p = 300;
    let sigma = epsilon_correlation(DependenceKind::D1, p, &mut substream(3, "example", 0))?;
    let cache_dir = std::env::temp_dir().join("fundsel-eigen-cache");
    let cache = EigenCache::new(&cache_dir);
    let dep = DependenceModel::from_correlation_cached(sigma.clone(), DependenceOptions::default(), &cache)?;
    println!("p = {p}: l = {} factor eigenvalues > 1, B has {} columns", dep.l, dep.b.ncols());
    println!("top eigenvalues {:?}", dep.eigenvalues.iter().take(5).map(|v| format!("{v:.2}")).collect::<Vec<_>>());
    println!("lambda_p = {:.4}", dep.lambda_p);
    let eta = dep.eta_sq.iter().sum::<f64>() / p as f64;
    println!("mean eta^2 = {eta:.4}; strict reconstruction error {:.2e}", dep.strict_reconstruction_error());
    println!("cached under {}", cache.path_for(&sigma).display());

    // A sample correlation from fewer observations than units is singular.
    let mut rng = substream(3, "example-sample", 0);
    let t = 60;
    let x = nalgebra::DMatrix::from_fn(t, 120, |_, _| rand::Rng::sample::<f64, _>(&mut rng, rand_distr::StandardNormal));
    let common = x.column(0).clone_owned();
    let mut panel = x.clone();
    for j in 0..120 {
        let col = panel.column(j) + &common * 1.5;
        panel.set_column(j, &col);
    }
    let cov = {
        let mean = panel.row_mean();
        let centered = nalgebra::DMatrix::from_fn(t, 120, |i, j| panel[(i, j)] - mean[j]);
        centered.transpose() * centered / (t as f64 - 1.0)
    };
    let corr = fundsel::dependence::correlation(&cov)?;
    for policy in [RankPolicy::PoolTail, RankPolicy::Floor] {
        let opts = DependenceOptions {
            rank_policy: policy,
            ..Default::default()
        };
        let dep = DependenceModel::from_correlation(corr.clone(), opts)?;
        println!(
            "{policy:?}: {} eigenvalues at the floor, lambda_p = {:.4}, B columns = {}",
            dep.n_floored,
            dep.lambda_p,
            dep.b.ncols()
        );
    }
    Ok(())
}
