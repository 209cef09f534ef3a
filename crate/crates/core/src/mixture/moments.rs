//! Pooled moments of H = Z − C·v − ν₀ and inversion of the moment system.
//!
//! With u_k = ν_k − ν₀ and s_k = τ_k² + η̄², the averaged population moments are
//!
//! ```text
//! m1 = π₁u₁ + π₂u₂
//! m2 = Σ π_k (u_k² + τ_k²) + η̄²
//! m3 = Σ π_k (u_k³ + 3 s_k u_k)
//! m4 = Σ π_k (u_k⁴ + 6 s_k u_k² + 3(τ_k⁴ + 2τ_k²η̄² + η̄₄)) + 3 η̄₄ π₀
//! ```
//!
//! where η̄² and η̄₄ are the means of η_i² and η_i⁴. For fixed (u₁, u₂) the
//! system is linear in (π₁, π₂), so the solver eliminates the weights with the
//! first two equations and searches over (u₁, u₂) only.
//!
//! The system generally has several admissible solutions, so every one found
//! is returned.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PooledMoments {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
    pub eta_sq_bar: f64,
    pub eta_4_bar: f64,
}

impl PooledMoments {
    fn as_array(&self) -> [f64; 4] {
        [self.m1, self.m2, self.m3, self.m4]
    }
}

/// Sample moments of `h` and the averaged idiosyncratic variances.
pub fn pooled_moments(h: &[f64], eta_sq: &[f64]) -> Result<PooledMoments> {
    if h.len() != eta_sq.len() {
        return Err(Error::DimensionMismatch {
            context: "pooled moments: h vs eta_sq",
            expected: h.len(),
            actual: eta_sq.len(),
        });
    }
    if h.is_empty() {
        return Err(Error::InvalidInput("pooled moments of an empty vector".into()));
    }
    let n = h.len() as f64;
    let mut m = [0.0; 4];
    for &x in h {
        let x2 = x * x;
        m[0] += x;
        m[1] += x2;
        m[2] += x2 * x;
        m[3] += x2 * x2;
    }
    let (mut e2, mut e4) = (0.0, 0.0);
    for &e in eta_sq {
        e2 += e;
        e4 += e * e;
    }
    Ok(PooledMoments {
        m1: m[0] / n,
        m2: m[1] / n,
        m3: m[2] / n,
        m4: m[3] / n,
        eta_sq_bar: e2 / n,
        eta_4_bar: e4 / n,
    })
}

/// Population moments implied by (π₁, π₂, u₁, u₂) at the given variances.
pub fn forward_moments(
    pi1: f64,
    pi2: f64,
    u1: f64,
    u2: f64,
    tau1_sq: f64,
    tau2_sq: f64,
    eta_sq_bar: f64,
    eta_4_bar: f64,
) -> [f64; 4] {
    let pi0 = 1.0 - pi1 - pi2;
    let f = component_moments(u1, tau1_sq, eta_sq_bar, eta_4_bar);
    let g = component_moments(u2, tau2_sq, eta_sq_bar, eta_4_bar);
    [
        pi1 * f[0] + pi2 * g[0],
        pi1 * f[1] + pi2 * g[1] + eta_sq_bar,
        pi1 * f[2] + pi2 * g[2],
        pi1 * f[3] + pi2 * g[3] + 3.0 * eta_4_bar * pi0,
    ]
}

/// Per-component contributions (the η̄² in m2 and the 3η̄₄π₀ in m4 excluded).
#[inline]
fn component_moments(u: f64, t: f64, e2: f64, e4: f64) -> [f64; 4] {
    let s = t + e2;
    let u2 = u * u;
    [
        u,
        u2 + t,
        u2 * u + 3.0 * s * u,
        u2 * u2 + 6.0 * s * u2 + 3.0 * (t * t + 2.0 * t * e2 + e4),
    ]
}

/// d/du of [`component_moments`].
#[inline]
fn component_moments_du(u: f64, t: f64, e2: f64) -> [f64; 4] {
    let s = t + e2;
    [1.0, 2.0 * u, 3.0 * u * u + 3.0 * s, 4.0 * u * u * u + 12.0 * s * u]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRoot {
    pub pi0: f64,
    pub pi1: f64,
    pub pi2: f64,
    pub u1: f64,
    pub u2: f64,
    /// Euclidean norm of the four moment residuals before clipping.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Start values for each of u₁ and u₂; all ordered pairs are tried.
    pub starts: Vec<f64>,
    pub max_iter: usize,
    /// Accept a root when the moment residual norm is below this.
    pub tol: f64,
    /// Slack on each weight's [0, 1] range before clipping.
    pub pi_slack: f64,
    /// Two roots closer than this in every coordinate are merged.
    pub dedup_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            starts: (0..11).map(|k| -3.0 + 0.6 * k as f64).collect(),
            max_iter: 100,
            tol: 1e-8,
            pi_slack: 1e-8,
            dedup_tol: 1e-6,
        }
    }
}

/// All admissible solutions of the moment system, deduplicated and sorted.
/// An empty vector means no start converged to a valid solution.
pub fn solve_moments(mom: &PooledMoments, tau1_sq: f64, tau2_sq: f64) -> Result<Vec<MomentRoot>> {
    solve_moments_with(mom, tau1_sq, tau2_sq, &SolverOptions::default())
}

pub fn solve_moments_with(
    mom: &PooledMoments,
    tau1_sq: f64,
    tau2_sq: f64,
    opts: &SolverOptions,
) -> Result<Vec<MomentRoot>> {
    let target = mom.as_array();
    if target.iter().any(|v| v.is_nan()) || mom.eta_sq_bar.is_nan() || mom.eta_4_bar.is_nan() {
        return Err(Error::InvalidInput("NaN in pooled moments".into()));
    }
    if target.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("pooled moments"));
    }
    if !(tau1_sq > 0.0 && tau2_sq > 0.0) {
        return Err(Error::InvalidInput("component variances must be positive".into()));
    }
    let sys = System {
        target,
        t1: tau1_sq,
        t2: tau2_sq,
        e2: mom.eta_sq_bar,
        e4: mom.eta_4_bar,
    };

    let mut roots: Vec<MomentRoot> = Vec::new();
    for &s1 in &opts.starts {
        for &s2 in &opts.starts {
            if s1 == s2 && tau1_sq == tau2_sq {
                continue;
            }
            let Some(u) = sys.reduced_newton(Vector2::new(s1, s2), opts.max_iter) else {
                continue;
            };
            let Some(root) = sys.polish(u, opts) else { continue };
            let root = canonical(root, tau1_sq == tau2_sq);
            if !roots.iter().any(|r| same_root(r, &root, opts.dedup_tol)) {
                roots.push(root);
            }
        }
    }
    roots.sort_by(|a, b| {
        a.u1.total_cmp(&b.u1)
            .then(a.u2.total_cmp(&b.u2))
            .then(a.pi1.total_cmp(&b.pi1))
    });
    Ok(roots)
}

struct System {
    target: [f64; 4],
    t1: f64,
    t2: f64,
    e2: f64,
    e4: f64,
}

impl System {
    /// Weights solving the first two equations for fixed (u₁, u₂).
    fn weights(&self, u: &Vector2<f64>) -> Option<Vector2<f64>> {
        let a = Matrix2::new(u[0], u[1], u[0] * u[0] + self.t1, u[1] * u[1] + self.t2);
        let rhs = Vector2::new(self.target[0], self.target[1] - self.e2);
        let det = a.determinant();
        let scale = a.abs().max().max(1.0);
        if det.abs() < 1e-13 * scale * scale {
            return None;
        }
        a.try_inverse().map(|inv| inv * rhs)
    }

    /// Residuals of the third and fourth equations after eliminating π.
    fn reduced(&self, u: &Vector2<f64>) -> Option<Vector2<f64>> {
        let pi = self.weights(u)?;
        let m = forward_moments(pi[0], pi[1], u[0], u[1], self.t1, self.t2, self.e2, self.e4);
        let r = Vector2::new(m[2] - self.target[2], m[3] - self.target[3]);
        r.iter().all(|v| v.is_finite()).then_some(r)
    }

    /// Levenberg–Marquardt on the reduced two-equation system.
    fn reduced_newton(&self, start: Vector2<f64>, max_iter: usize) -> Option<Vector2<f64>> {
        let mut u = start;
        let mut r = self.reduced(&u)?;
        let mut f = r.norm_squared();
        let mut damping = 1e-3;
        let mut slow = 0;
        for _ in 0..max_iter {
            if f < 1e-26 {
                break;
            }
            let f_prev = f;
            let mut jac = Matrix2::zeros();
            for k in 0..2 {
                let h = 1e-7 * u[k].abs().max(1.0);
                let mut up = u;
                let mut dn = u;
                up[k] += h;
                dn[k] -= h;
                let (rp, rm) = (self.reduced(&up)?, self.reduced(&dn)?);
                jac.set_column(k, &((rp - rm) / (2.0 * h)));
            }
            let jtj = jac.transpose() * jac;
            let g = jac.transpose() * r;
            let mut improved = false;
            for _ in 0..12 {
                let lhs = jtj + Matrix2::identity() * (damping * jtj.diagonal().max().max(1e-12));
                let Some(step) = lhs.try_inverse().map(|inv| -(inv * g)) else {
                    damping *= 10.0;
                    continue;
                };
                let cand = u + step;
                if let Some(rc) = self.reduced(&cand) {
                    let fc = rc.norm_squared();
                    if fc < f {
                        u = cand;
                        r = rc;
                        f = fc;
                        damping = (damping * 0.3).max(1e-12);
                        improved = true;
                        break;
                    }
                }
                damping *= 10.0;
            }
            if !improved || u.amax() > 1e3 {
                break;
            }
            // Creeping along a valley with a nonzero residual: not a root.
            if f > 0.99 * f_prev {
                slow += 1;
                if slow >= 3 {
                    break;
                }
            } else {
                slow = 0;
            }
        }
        Some(u)
    }

    fn full_residual(&self, x: &Vector4<f64>) -> Vector4<f64> {
        let m = forward_moments(x[0], x[1], x[2], x[3], self.t1, self.t2, self.e2, self.e4);
        Vector4::new(
            m[0] - self.target[0],
            m[1] - self.target[1],
            m[2] - self.target[2],
            m[3] - self.target[3],
        )
    }

    fn full_jacobian(&self, x: &Vector4<f64>) -> Matrix4<f64> {
        let (pi1, pi2, u1, u2) = (x[0], x[1], x[2], x[3]);
        let f = component_moments(u1, self.t1, self.e2, self.e4);
        let g = component_moments(u2, self.t2, self.e2, self.e4);
        let df = component_moments_du(u1, self.t1, self.e2);
        let dg = component_moments_du(u2, self.t2, self.e2);
        let mut j = Matrix4::zeros();
        for row in 0..4 {
            // π₀ = 1 − π₁ − π₂ enters only the fourth equation.
            let pi0_term = if row == 3 { -3.0 * self.e4 } else { 0.0 };
            j[(row, 0)] = f[row] + pi0_term;
            j[(row, 1)] = g[row] + pi0_term;
            j[(row, 2)] = pi1 * df[row];
            j[(row, 3)] = pi2 * dg[row];
        }
        j
    }

    /// A few full Newton steps from the reduced solution, then the admissibility check.
    fn polish(&self, u: Vector2<f64>, opts: &SolverOptions) -> Option<MomentRoot> {
        let pi = self.weights(&u)?;
        let mut x = Vector4::new(pi[0], pi[1], u[0], u[1]);
        let mut r = self.full_residual(&x);
        for _ in 0..8 {
            if r.norm() < 1e-15 {
                break;
            }
            let Some(step) = self.full_jacobian(&x).lu().solve(&r) else { break };
            let cand = x - step;
            let rc = self.full_residual(&cand);
            if rc.norm() < r.norm() {
                x = cand;
                r = rc;
            } else {
                break;
            }
        }
        let residual = r.norm();
        let scale = self.target.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        if !(residual < opts.tol * scale) {
            return None;
        }
        let pi0 = 1.0 - x[0] - x[1];
        let lo = -opts.pi_slack;
        let hi = 1.0 + opts.pi_slack;
        if [pi0, x[0], x[1]].iter().any(|p| !(lo..=hi).contains(p)) {
            return None;
        }
        let pi1 = x[0].clamp(0.0, 1.0);
        let pi2 = x[1].clamp(0.0, 1.0 - pi1);
        Some(MomentRoot {
            pi0: 1.0 - pi1 - pi2,
            pi1,
            pi2,
            u1: x[2],
            u2: x[3],
            residual,
        })
    }
}

/// With equal variances the two components are exchangeable; keep u₁ ≤ u₂.
fn canonical(r: MomentRoot, exchangeable: bool) -> MomentRoot {
    if exchangeable && r.u1 > r.u2 {
        MomentRoot {
            pi1: r.pi2,
            pi2: r.pi1,
            u1: r.u2,
            u2: r.u1,
            ..r
        }
    } else {
        r
    }
}

/// Component means are only compared where the component carries weight.
fn same_root(a: &MomentRoot, b: &MomentRoot, tol: f64) -> bool {
    const NEGLIGIBLE: f64 = 1e-7;
    let close = |x: f64, y: f64| (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0);
    if !close(a.pi1, b.pi1) || !close(a.pi2, b.pi2) {
        return false;
    }
    let u1_matters = a.pi1 >= NEGLIGIBLE || b.pi1 >= NEGLIGIBLE;
    let u2_matters = a.pi2 >= NEGLIGIBLE || b.pi2 >= NEGLIGIBLE;
    (!u1_matters || close(a.u1, b.u1)) && (!u2_matters || close(a.u2, b.u2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn moments_of(pi1: f64, pi2: f64, u1: f64, u2: f64, t1: f64, t2: f64, e2: f64, e4: f64) -> PooledMoments {
        let m = forward_moments(pi1, pi2, u1, u2, t1, t2, e2, e4);
        PooledMoments {
            m1: m[0],
            m2: m[1],
            m3: m[2],
            m4: m[3],
            eta_sq_bar: e2,
            eta_4_bar: e4,
        }
    }

    #[test]
    fn pooled_moments_arithmetic() {
        let m = pooled_moments(&[1.0, -1.0], &[0.5, 0.5]).unwrap();
        assert_eq!((m.m1, m.m2, m.m3, m.m4), (0.0, 1.0, 0.0, 1.0));
        assert_eq!((m.eta_sq_bar, m.eta_4_bar), (0.5, 0.25));
        let z = pooled_moments(&[0.0; 5], &[1.0; 5]).unwrap();
        assert_eq!((z.m1, z.m2, z.m3, z.m4), (0.0, 0.0, 0.0, 0.0));
        assert!(pooled_moments(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn first_moment_matches_sampling() {
        let prior = crate::mixture::MixtureParams::s1();
        let mut rng = crate::rng::substream(5, "test-moments", 0);
        let n = 100_000;
        let eta_sq: f64 = 0.5;
        let h: Vec<f64> = (0..n)
            .map(|_| prior.sample_mu(&mut rng) - prior.nu0 + eta_sq.sqrt() * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let m = pooled_moments(&h, &vec![eta_sq; n]).unwrap();
        let f = forward_moments(0.7, 0.2, -0.5, 1.2, 0.1, 0.1, eta_sq, eta_sq * eta_sq);
        let se = ((m.m2 - m.m1 * m.m1) / n as f64).sqrt();
        assert!((m.m1 - f[0]).abs() < 3.0 * se, "{} vs {}", m.m1, f[0]);
    }

    #[test]
    fn recovers_reference_tuple() {
        let mom = moments_of(0.7, 0.2, -0.5, 1.2, 0.1, 0.1, 0.5, 0.25);
        let roots = solve_moments(&mom, 0.1, 0.1).unwrap();
        assert!(
            roots.iter().any(|r| (r.pi0 - 0.1).abs() < 1e-6
                && (r.pi1 - 0.7).abs() < 1e-6
                && (r.pi2 - 0.2).abs() < 1e-6
                && (r.u1 + 0.5).abs() < 1e-6
                && (r.u2 - 1.2).abs() < 1e-6),
            "{roots:?}"
        );
    }

    #[test]
    fn single_component_gives_boundary_root() {
        let mom = moments_of(0.8, 0.0, 0.6, 0.0, 0.15, 0.2, 0.4, 0.2);
        let roots = solve_moments(&mom, 0.15, 0.2).unwrap();
        assert!(
            roots.iter().any(|r| r.pi2 < 1e-6 && (r.pi1 - 0.8).abs() < 1e-6 && (r.u1 - 0.6).abs() < 1e-6),
            "{roots:?}"
        );
    }

    #[test]
    fn symmetric_prior_forces_zero_mean() {
        let mom = moments_of(0.4, 0.4, -1.0, 1.0, 0.1, 0.1, 0.3, 0.1);
        assert!(mom.m1.abs() < 1e-15);
        let roots = solve_moments(&mom, 0.1, 0.1).unwrap();
        assert!(!roots.is_empty());
        for r in &roots {
            assert!((r.pi1 * r.u1 + r.pi2 * r.u2).abs() < 1e-8);
        }
    }

    #[test]
    fn nan_is_an_input_error() {
        let mut mom = moments_of(0.4, 0.4, -1.0, 1.0, 0.1, 0.1, 0.3, 0.1);
        mom.m3 = f64::NAN;
        assert!(solve_moments(&mom, 0.1, 0.1).is_err());
    }

    #[test]
    fn impossible_moments_are_infeasible() {
        // Negative variance of H cannot be matched.
        let mom = PooledMoments {
            m1: 0.0,
            m2: 0.01,
            m3: 0.0,
            m4: 0.0,
            eta_sq_bar: 0.5,
            eta_4_bar: 0.25,
        };
        assert!(solve_moments(&mom, 0.1, 0.2).unwrap().is_empty());
    }

    #[test]
    fn analytic_jacobian_matches_finite_differences() {
        let sys = System {
            target: [0.1, 1.0, 0.3, 2.5],
            t1: 0.12,
            t2: 0.2,
            e2: 0.4,
            e4: 0.2,
        };
        let x = Vector4::new(0.3, 0.5, -0.7, 1.1);
        let j = sys.full_jacobian(&x);
        for k in 0..4 {
            let h = 1e-6;
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let fd = (sys.full_residual(&xp) - sys.full_residual(&xm)) / (2.0 * h);
            assert!((fd - j.column(k)).amax() < 1e-7);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn roots_reproduce_moments(
            a in 0.05f64..0.9, b in 0.05f64..0.9,
            u1 in -2.0f64..2.0, u2 in -2.0f64..2.0,
            t1 in 0.05f64..0.3, t2 in 0.05f64..0.3,
            e2 in 0.1f64..1.0,
        ) {
            prop_assume!(a + b < 0.95 && (u1 - u2).abs() > 0.2);
            let mom = moments_of(a, b, u1, u2, t1, t2, e2, e2 * e2);
            for r in solve_moments(&mom, t1, t2).unwrap() {
                let f = forward_moments(r.pi1, r.pi2, r.u1, r.u2, t1, t2, e2, e2 * e2);
                for (x, y) in f.iter().zip(mom.as_array()) {
                    prop_assert!((x - y).abs() < 1e-7 * y.abs().max(1.0));
                }
                prop_assert!((r.pi0 + r.pi1 + r.pi2 - 1.0).abs() < 1e-12);
            }
        }
    }
}
