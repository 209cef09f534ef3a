//! Three-part prior on the standardized alphas and its approximate empirical
//! Bayes fit:
//!
//! μ ~ π₀ δ(ν₀) + π₁ N(ν₁, τ₁²) + π₂ N(ν₂, τ₂²)

mod fit;
mod lad;
mod moments;
mod tv;

pub use fit::{fit_aeb, simulate_z, FitDiagnostics, FitGrids, FitOptions, FitReport, GridPoint, GridStatus};
pub use lad::{lad_objective, lad_regress, LadOptions};
pub use moments::{
    forward_moments, pooled_moments, solve_moments, solve_moments_with, MomentRoot, PooledMoments,
    SolverOptions,
};
pub use tv::{total_variation, total_variation_with_width, TV_BIN_WIDTH};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureParams {
    pub pi0: f64,
    pub pi1: f64,
    pub pi2: f64,
    pub nu0: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub tau1_sq: f64,
    pub tau2_sq: f64,
}

impl MixtureParams {
    /// Simulation prior with point mass at zero, ν = (−0.5, 1.2), τ² = 0.1.
    pub fn sim_prior(pi1: f64, pi2: f64) -> Self {
        Self {
            pi0: 1.0 - pi1 - pi2,
            pi1,
            pi2,
            nu0: 0.0,
            nu1: -0.5,
            nu2: 1.2,
            tau1_sq: 0.1,
            tau2_sq: 0.1,
        }
    }

    /// Sparse-signal setting: (π₁, π₂) = (0.7, 0.2).
    pub fn s1() -> Self {
        Self::sim_prior(0.7, 0.2)
    }

    /// Dense-signal setting: (π₁, π₂) = (0.2, 0.7).
    pub fn s2() -> Self {
        Self::sim_prior(0.2, 0.7)
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [
            self.pi0, self.pi1, self.pi2, self.nu0, self.nu1, self.nu2, self.tau1_sq, self.tau2_sq,
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("mixture parameters"));
        }
        for (name, pi) in [("pi0", self.pi0), ("pi1", self.pi1), ("pi2", self.pi2)] {
            if !(0.0..=1.0).contains(&pi) {
                return Err(Error::InvalidInput(format!("{name} = {pi} is outside [0, 1]")));
            }
        }
        let total = self.pi0 + self.pi1 + self.pi2;
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("mixture weights sum to {total}, not 1")));
        }
        if self.nu0 > 0.0 {
            return Err(Error::InvalidInput(format!("nu0 = {} must be <= 0", self.nu0)));
        }
        if !(self.tau1_sq > 0.0 && self.tau2_sq > 0.0) {
            return Err(Error::InvalidInput("component variances must be positive".into()));
        }
        Ok(())
    }

    /// Weights, means and variances of the two Gaussian components.
    pub fn gaussians(&self) -> [(f64, f64, f64); 2] {
        [
            (self.pi1, self.nu1, self.tau1_sq),
            (self.pi2, self.nu2, self.tau2_sq),
        ]
    }

    /// Map one uniform and one standard normal to a prior draw, so that
    /// callers can hold the randomness fixed while varying parameters.
    #[inline]
    pub fn mu_from(&self, u: f64, g: f64) -> f64 {
        if u < self.pi0 {
            self.nu0
        } else if u < self.pi0 + self.pi1 {
            self.nu1 + self.tau1_sq.sqrt() * g
        } else {
            self.nu2 + self.tau2_sq.sqrt() * g
        }
    }

    pub fn sample_mu<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let g: f64 = rng.sample(StandardNormal);
        self.mu_from(u, g)
    }

    /// P(μ > 0) under the prior.
    pub fn prob_positive(&self) -> f64 {
        let point = if self.nu0 > 0.0 { self.pi0 } else { 0.0 };
        point
            + self
                .gaussians()
                .iter()
                .map(|&(w, m, v)| w * crate::stats::norm_cdf(m / v.sqrt()))
                .sum::<f64>()
    }
}
