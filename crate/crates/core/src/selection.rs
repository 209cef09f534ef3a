//! Decision rules on d-values plus the BH and Storey baselines on p-values.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::fmt_f64;
use crate::stats::upper_p_value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub decisions: Vec<bool>,
    pub k: usize,
    /// θ or λ, whichever drove the rule.
    pub threshold: f64,
    /// Mean of the selected scores; `None` for p-value procedures.
    pub conditional_fdr: Option<f64>,
    /// One minus the mean of the unselected scores.
    pub conditional_fnr: Option<f64>,
}

impl SelectionResult {
    fn from_scores(decisions: Vec<bool>, threshold: f64, scores: &[f64]) -> Self {
        let (rates, k) = conditional_rates(scores, &decisions);
        Self {
            decisions,
            k,
            threshold,
            conditional_fdr: Some(rates.0),
            conditional_fnr: Some(rates.1),
        }
    }

    fn from_pvalues(decisions: Vec<bool>, threshold: f64) -> Self {
        let k = decisions.iter().filter(|&&a| a).count();
        Self {
            decisions,
            k,
            threshold,
            conditional_fdr: None,
            conditional_fnr: None,
        }
    }

    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.decisions.iter().enumerate().filter(|(_, &a)| a).map(|(i, _)| i)
    }
}

/// ((mean selected d, 1 − mean unselected d), k), with 0/0 = 0.
fn conditional_rates(d: &[f64], decisions: &[bool]) -> ((f64, f64), usize) {
    let (mut sel, mut k, mut rest) = (0.0, 0usize, 0.0);
    for (&di, &a) in d.iter().zip(decisions) {
        if a {
            sel += di;
            k += 1;
        } else {
            rest += di;
        }
    }
    let p = d.len();
    let fdr = if k == 0 { 0.0 } else { sel / k as f64 };
    let fnr = if k == p { 0.0 } else { 1.0 - rest / (p - k) as f64 };
    ((fdr, fnr), k)
}

/// Conditional expected loss FNR + λ·FDR of an arbitrary decision vector,
/// summed in unit order.
pub fn decision_loss(d: &[f64], decisions: &[bool], lambda: f64) -> f64 {
    let p = d.len();
    let k = decisions.iter().filter(|&&a| a).count();
    let (mut fn_sum, mut fd_sum) = (0.0, 0.0);
    for (&di, &a) in d.iter().zip(decisions) {
        if a {
            fd_sum += di;
        } else {
            fn_sum += 1.0 - di;
        }
    }
    let fnr = if k == p { 0.0 } else { fn_sum / (p - k) as f64 };
    let fdr = if k == 0 { 0.0 } else { fd_sum / k as f64 };
    fnr + lambda * fdr
}

/// Unit indices ordered by d-value, ties by index.
fn ascending(d: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    order
}

fn prefix_decisions(order: &[usize], j: usize, p: usize) -> Vec<bool> {
    let mut a = vec![false; p];
    for &i in &order[..j] {
        a[i] = true;
    }
    a
}

/// The loss-minimizing decision: reject the j smallest d-values for the best j.
pub fn optimal_decision(dvalues: &[f64], lambda: f64) -> SelectionResult {
    let p = dvalues.len();
    let order = ascending(dvalues);
    let total: f64 = dvalues.iter().sum();

    // Candidate losses from prefix sums, then the near-minimal ones are
    // re-scored in unit order so the returned loss is exactly comparable
    // with `decision_loss` on any other decision vector.
    let mut losses = Vec::with_capacity(p + 1);
    let mut sel = 0.0;
    for j in 0..=p {
        if j > 0 {
            sel += dvalues[order[j - 1]];
        }
        let fnr = if j == p { 0.0 } else { ((p - j) as f64 - (total - sel)) / (p - j) as f64 };
        let fdr = if j == 0 { 0.0 } else { sel / j as f64 };
        losses.push(fnr + lambda * fdr);
    }
    let approx_min = losses.iter().copied().fold(f64::INFINITY, f64::min);
    let slack = 1e-12 * (1.0 + approx_min.abs());
    let mut best: Option<(f64, usize)> = None;
    for (j, &l) in losses.iter().enumerate() {
        if l <= approx_min + slack {
            let exact = decision_loss(dvalues, &prefix_decisions(&order, j, p), lambda);
            if best.is_none_or(|(b, _)| exact < b) {
                best = Some((exact, j));
            }
        }
    }
    let j = best.map_or(0, |(_, j)| j);
    SelectionResult::from_scores(prefix_decisions(&order, j, p), lambda, dvalues)
}

/// Step-up rule: the largest k whose running mean of sorted scores is ≤ θ.
///
/// Units tied with the k-th score are all rejected when the enlarged set
/// still has mean ≤ θ; otherwise the whole tie group is left out.
pub fn select_fdr_stepup(dvalues: &[f64], theta: f64) -> SelectionResult {
    let p = dvalues.len();
    if !(theta > 0.0) {
        return SelectionResult::from_scores(vec![false; p], theta, dvalues);
    }
    let order = ascending(dvalues);
    let mut k = 0;
    let mut sum = 0.0;
    for (j, &i) in order.iter().enumerate() {
        sum += dvalues[i];
        if sum / (j + 1) as f64 <= theta {
            k = j + 1;
        }
    }
    let decisions = if k == 0 {
        vec![false; p]
    } else {
        let t = dvalues[order[k - 1]];
        let upto: Vec<bool> = dvalues.iter().map(|&d| d <= t).collect();
        let n = upto.iter().filter(|&&a| a).count();
        let mean: f64 = dvalues.iter().zip(&upto).filter(|(_, &a)| a).map(|(d, _)| d).sum::<f64>() / n as f64;
        if mean <= theta {
            upto
        } else {
            dvalues.iter().map(|&d| d < t).collect()
        }
    };
    SelectionResult::from_scores(decisions, theta, dvalues)
}

/// Step-up on LOS values; flags funds that are confidently unskilled.
pub fn select_unskilled(los: &[f64], theta: f64) -> SelectionResult {
    select_fdr_stepup(los, theta)
}

/// One-sided p-values 1 − Φ(z).
pub fn p_values(z: &[f64]) -> Vec<f64> {
    z.iter().map(|&zi| upper_p_value(zi)).collect()
}

/// Benjamini–Hochberg on p-values at level θ.
pub fn bh_from_pvalues(pv: &[f64], theta: f64) -> SelectionResult {
    let p = pv.len();
    if !(theta > 0.0) || p == 0 {
        return SelectionResult::from_pvalues(vec![false; p], theta);
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| pv[a].total_cmp(&pv[b]).then(a.cmp(&b)));
    let k = (1..=p)
        .rev()
        .find(|&k| pv[order[k - 1]] <= k as f64 * theta / p as f64)
        .unwrap_or(0);
    let decisions = if k == 0 {
        vec![false; p]
    } else {
        let t = pv[order[k - 1]];
        pv.iter().map(|&v| v <= t).collect()
    };
    SelectionResult::from_pvalues(decisions, theta)
}

pub fn bh_select(z: &[f64], theta: f64) -> SelectionResult {
    bh_from_pvalues(&p_values(z), theta)
}

/// π̂₀ = #{p > λ} / ((1 − λ)p), capped at 1.
pub fn storey_pi0(pv: &[f64], lambda_tune: f64) -> f64 {
    let above = pv.iter().filter(|&&v| v > lambda_tune).count();
    (above as f64 / ((1.0 - lambda_tune) * pv.len() as f64)).min(1.0)
}

/// Storey's adaptive BH: BH at level θ/π̂₀. An estimate π̂₀ = 0 rejects all.
pub fn storey_from_pvalues(pv: &[f64], theta: f64, lambda_tune: f64) -> Result<SelectionResult> {
    if !(lambda_tune > 0.0 && lambda_tune < 1.0) {
        return Err(Error::Config(format!("storey lambda must lie in (0, 1), got {lambda_tune}")));
    }
    let p = pv.len();
    if !(theta > 0.0) || p == 0 {
        return Ok(SelectionResult::from_pvalues(vec![false; p], theta));
    }
    let pi0 = storey_pi0(pv, lambda_tune);
    if pi0 == 0.0 {
        return Ok(SelectionResult::from_pvalues(vec![true; p], theta));
    }
    let mut res = bh_from_pvalues(pv, theta / pi0);
    res.threshold = theta;
    Ok(res)
}

pub fn storey_select(z: &[f64], theta: f64, lambda_tune: f64) -> Result<SelectionResult> {
    storey_from_pvalues(&p_values(z), theta, lambda_tune)
}

pub const DEFAULT_STOREY_LAMBDA: f64 = 0.5;

/// All decisions for one set of d-values and statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionReport {
    pub fund_ids: Vec<String>,
    pub d: Vec<f64>,
    pub p_values: Vec<f64>,
    pub skilled: SelectionResult,
    pub unskilled: SelectionResult,
    pub bh: SelectionResult,
    pub storey: SelectionResult,
}

impl SelectionReport {
    /// Step-up on d (skilled) and LOS (unskilled) at θ, baselines on z.
    /// `lambda` switches the skilled rule to the loss-optimal decision.
    pub fn build(
        fund_ids: Vec<String>,
        z: &[f64],
        d: &[f64],
        los: &[f64],
        theta: f64,
        lambda: Option<f64>,
    ) -> Result<Self> {
        let p = fund_ids.len();
        for (name, len) in [("z", z.len()), ("d", d.len()), ("los", los.len())] {
            if len != p {
                return Err(Error::DimensionMismatch {
                    context: match name {
                        "z" => "selection: z vs fund ids",
                        "d" => "selection: d vs fund ids",
                        _ => "selection: los vs fund ids",
                    },
                    expected: p,
                    actual: len,
                });
            }
        }
        let pv = p_values(z);
        let skilled = match lambda {
            Some(l) if l >= 0.0 => optimal_decision(d, l),
            Some(l) => return Err(Error::Config(format!("lambda must be nonnegative, got {l}"))),
            None => select_fdr_stepup(d, theta),
        };
        Ok(Self {
            fund_ids,
            d: d.to_vec(),
            skilled,
            unskilled: select_unskilled(los, theta),
            bh: bh_from_pvalues(&pv, theta),
            storey: storey_from_pvalues(&pv, theta, DEFAULT_STOREY_LAMBDA)?,
            p_values: pv,
        })
    }

    /// `fund_id,d_value,selected_skilled,selected_unskilled,p_value,bh_selected,storey_selected`
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record([
            "fund_id",
            "d_value",
            "selected_skilled",
            "selected_unskilled",
            "p_value",
            "bh_selected",
            "storey_selected",
        ])?;
        let flag = |b: bool| if b { "1" } else { "0" }.to_string();
        for i in 0..self.d.len() {
            wtr.write_record([
                self.fund_ids[i].clone(),
                fmt_f64(self.d[i]),
                flag(self.skilled.decisions[i]),
                flag(self.unskilled.decisions[i]),
                fmt_f64(self.p_values[i]),
                flag(self.bh.decisions[i]),
                flag(self.storey.decisions[i]),
            ])?;
        }
        wtr.flush().map_err(|e| Error::io("<selection csv>", e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn optimal_small_examples() {
        let r = optimal_decision(&[0.0, 0.5], 1.0);
        assert_eq!(r.k, 2);
        assert!((decision_loss(&[0.0, 0.5], &[false, false], 1.0) - 0.75).abs() < 1e-15);
        assert!((decision_loss(&[0.0, 0.5], &[true, false], 1.0) - 0.5).abs() < 1e-15);
        assert!((decision_loss(&[0.0, 0.5], &[true, true], 1.0) - 0.25).abs() < 1e-15);
        assert_eq!(optimal_decision(&[0.9; 3], 10.0).k, 0);
    }

    #[test]
    fn stepup_examples() {
        let r = select_fdr_stepup(&[0.01, 0.05, 0.2, 0.5], 0.1);
        assert_eq!(r.k, 3);
        assert_eq!(r.decisions, vec![true, true, true, false]);
        assert_eq!(select_fdr_stepup(&[0.02; 7], 0.1).k, 7);
        assert_eq!(select_fdr_stepup(&[0.3, 0.2, 0.9], 0.1).k, 0);
        assert_eq!(select_fdr_stepup(&[0.0, 0.0], 0.0).k, 0);
        assert_eq!(select_unskilled(&[0.01, 0.2], 0.05).k, 1);
    }

    #[test]
    fn boundary_ties_that_break_the_level_are_dropped() {
        let r = select_fdr_stepup(&[0.0, 0.3, 0.3], 0.15);
        assert_eq!(r.decisions, vec![true, false, false]);
        let r = select_fdr_stepup(&[0.3, 0.0, 0.3, 0.0], 0.14);
        assert_eq!(r.decisions, vec![false, true, false, true]);
        // Ties that keep the mean within θ are all taken.
        let r = select_fdr_stepup(&[0.0, 0.1, 0.1, 0.1], 0.1);
        assert_eq!(r.k, 4);
    }

    #[test]
    fn bh_and_storey_examples() {
        let r = bh_from_pvalues(&[0.001, 0.2, 0.9], 0.15);
        assert_eq!(r.decisions, vec![true, false, false]);
        assert_eq!(bh_from_pvalues(&[1.0; 5], 0.1).k, 0);
        let large = [0.6, 0.7, 0.8, 0.9, 0.95];
        assert_eq!(storey_pi0(&large, 0.5), 1.0);
        assert_eq!(
            storey_from_pvalues(&large, 0.1, 0.5).unwrap().decisions,
            bh_from_pvalues(&large, 0.1).decisions
        );
        // Half the p-values tiny: π̂₀ ≈ 0.5, strictly more rejections than BH.
        let mut pv: Vec<f64> = (0..50).map(|i| 1e-4 * (i + 1) as f64).collect();
        pv.extend((0..50).map(|i| 0.02 + 0.0196 * i as f64));
        let bh = bh_from_pvalues(&pv, 0.1).k;
        let st = storey_from_pvalues(&pv, 0.1, 0.5).unwrap().k;
        assert!(st > bh, "storey {st} vs bh {bh}");
        assert!(storey_from_pvalues(&pv, 0.1, 1.0).is_err());
    }

    /// BH scanned from the smallest p-value upwards, remembering the last pass.
    fn bh_reference(pv: &[f64], theta: f64) -> usize {
        let mut sorted = pv.to_vec();
        sorted.sort_by(f64::total_cmp);
        let m = pv.len() as f64;
        let mut last = 0;
        for (i, v) in sorted.iter().enumerate() {
            if *v <= (i + 1) as f64 / m * theta {
                last = i + 1;
            }
        }
        last
    }

    proptest! {
        #[test]
        fn bh_matches_reference(pv in prop::collection::vec(0.0f64..1.0, 1..80), theta in 0.01f64..0.5) {
            prop_assert_eq!(bh_from_pvalues(&pv, theta).k, bh_reference(&pv, theta));
        }

        #[test]
        fn stepup_respects_level_and_nesting(
            d in prop::collection::vec(0.0f64..1.0, 1..60),
            t1 in 0.01f64..0.5,
            dt in 0.0f64..0.4,
        ) {
            let a = select_fdr_stepup(&d, t1);
            let b = select_fdr_stepup(&d, t1 + dt);
            if a.k > 0 {
                prop_assert!(a.conditional_fdr.unwrap() <= t1);
            }
            for (x, y) in a.decisions.iter().zip(&b.decisions) {
                prop_assert!(!x || *y);
            }
        }

        #[test]
        fn optimal_beats_every_decision(d in prop::collection::vec(0.0f64..1.0, 1..9), lambda in 0.0f64..5.0) {
            let r = optimal_decision(&d, lambda);
            let best = decision_loss(&d, &r.decisions, lambda);
            for mask in 0u32..(1 << d.len()) {
                let a: Vec<bool> = (0..d.len()).map(|i| mask >> i & 1 == 1).collect();
                prop_assert!(best <= decision_loss(&d, &a, lambda));
            }
        }
    }
}
