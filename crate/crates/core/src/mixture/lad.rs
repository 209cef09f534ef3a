use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadOptions {
    /// Smoothing in the IRLS weights 1/√(r² + ε²).
    pub epsilon: f64,
    /// Stop once the objective moves by less than this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LadOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            tol: 1e-8,
            max_iter: 200,
        }
    }
}

/// Σ |y_i − x_iᵀv|
pub fn lad_objective(x: &DMatrix<f64>, y: &DVector<f64>, v: &DVector<f64>) -> f64 {
    (y - x * v).iter().map(|r| r.abs()).sum()
}

/// Least-absolute-deviation regression of `y` on the columns of `x`, no
/// intercept, by iteratively reweighted least squares.
///
/// After IRLS settles, the fit interpolating the `k` rows with the smallest
/// residuals (a vertex of the LP) is tried and kept if it scores better.
pub fn lad_regress(x: &DMatrix<f64>, y: &DVector<f64>, opts: LadOptions) -> Result<DVector<f64>> {
    let (n, k) = x.shape();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            context: "LAD response length",
            expected: n,
            actual: y.len(),
        });
    }
    if k == 0 {
        return Ok(DVector::zeros(0));
    }
    if n < k {
        return Err(Error::InvalidInput(format!(
            "LAD needs at least as many rows ({n}) as columns ({k})"
        )));
    }
    if let Some(j) = (0..k).find(|&j| x.column(j).iter().all(|&v| v == 0.0)) {
        return Err(Error::DegenerateColumn { column: j });
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("LAD inputs"));
    }

    let mut v = weighted_ls(x, y, &DVector::from_element(n, 1.0))
        .ok_or_else(|| Error::Numerical("LAD design is rank deficient".into()))?;
    let mut obj = lad_objective(x, y, &v);
    for _ in 0..opts.max_iter {
        let r = y - x * &v;
        let w = r.map(|ri| 1.0 / (ri * ri + opts.epsilon * opts.epsilon).sqrt());
        let Some(next) = weighted_ls(x, y, &w) else { break };
        let next_obj = lad_objective(x, y, &next);
        let change = (obj - next_obj).abs();
        if next_obj <= obj {
            v = next;
            obj = next_obj;
        } else {
            // Smoothed and exact objectives disagree this close to a kink.
            break;
        }
        if change < opts.tol {
            break;
        }
    }

    // Vertex polish, repeated while it keeps improving.
    for _ in 0..k.max(4) {
        let r = y - x * &v;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| r[a].abs().total_cmp(&r[b].abs()).then(a.cmp(&b)));
        let rows = &order[..k];
        let xs = x.select_rows(rows.iter());
        let ys = y.select_rows(rows.iter());
        let Some(cand) = xs.lu().solve(&ys) else { break };
        let cand_obj = lad_objective(x, y, &cand);
        if cand.iter().all(|c| c.is_finite()) && cand_obj < obj - 1e-15 * obj.max(1.0) {
            v = cand;
            obj = cand_obj;
        } else {
            break;
        }
    }
    Ok(v)
}

fn weighted_ls(x: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>) -> Option<DVector<f64>> {
    let k = x.ncols();
    let mut xtwx = DMatrix::zeros(k, k);
    let mut xtwy = DVector::zeros(k);
    for (i, row) in x.row_iter().enumerate() {
        let wi = w[i];
        for a in 0..k {
            let xa = row[a] * wi;
            xtwy[a] += xa * y[i];
            for b in 0..=a {
                xtwx[(a, b)] += xa * row[b];
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            xtwx[(b, a)] = xtwx[(a, b)];
        }
    }
    xtwx.cholesky().map(|c| c.solve(&xtwy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_problem(n: usize, k: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>) {
        let mut rng = crate::rng::substream(seed, "test-lad", 0);
        let x = DMatrix::from_fn(n, k, |_, _| -> f64 { StandardNormal.sample(&mut rng) });
        let y = DVector::from_fn(n, |_, _| -> f64 {
            // Heavy tails so LAD and OLS differ.
            let e: f64 = StandardNormal.sample(&mut rng);
            e * e * e.signum() + rng.random_range(-0.5..0.5)
        });
        (x, y)
    }

    /// Exhaustive LP vertex enumeration: an L1 optimum interpolates k rows.
    fn lp_oracle(x: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
        let (n, k) = x.shape();
        assert_eq!(k, 3);
        let mut best = f64::INFINITY;
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let rows = [a, b, c];
                    let xs = x.select_rows(rows.iter());
                    let ys = y.select_rows(rows.iter());
                    if let Some(v) = xs.lu().solve(&ys) {
                        best = best.min(lad_objective(x, y, &v));
                    }
                }
            }
        }
        best
    }

    #[test]
    fn noiseless_recovery() {
        let (x, _) = random_problem(40, 4, 1);
        let truth = DVector::from_vec(vec![0.5, -1.0, 2.0, 0.0]);
        let y = &x * &truth;
        let v = lad_regress(&x, &y, LadOptions::default()).unwrap();
        assert!((v - truth).amax() < 1e-6);
    }

    #[test]
    fn beats_least_squares_with_outlier() {
        let (x, mut y) = random_problem(60, 2, 2);
        y[7] += 100.0;
        let ols = x.clone().svd(true, true).solve(&y, 1e-12).unwrap();
        let v = lad_regress(&x, &y, LadOptions::default()).unwrap();
        assert!(lad_objective(&x, &y, &v) <= lad_objective(&x, &y, &ols));
    }

    #[test]
    fn matches_lp_oracle() {
        let (x, y) = random_problem(200, 3, 3);
        let v = lad_regress(&x, &y, LadOptions::default()).unwrap();
        let oracle = lp_oracle(&x, &y);
        let got = lad_objective(&x, &y, &v);
        assert!(got - oracle < 1e-6, "lad {got} vs oracle {oracle}");
    }

    #[test]
    fn zero_column_is_named() {
        let (mut x, y) = random_problem(20, 3, 4);
        x.column_mut(1).fill(0.0);
        match lad_regress(&x, &y, LadOptions::default()) {
            Err(Error::DegenerateColumn { column }) => assert_eq!(column, 1),
            other => panic!("unexpected {other:?}"),
        }
    }
}
