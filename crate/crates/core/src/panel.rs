//! Return and factor panels: CSV ingest, window cleaning and the per-fund
//! four-factor regression that produces alpha estimates and standardized
//! statistics.
//!
//! Returns CSV header: `date,fund_id,ret` (one row per fund-month).
//! Factors CSV header: `date,mkt_rf,smb,hml,mom,rf`.
//! Dates are `YYYY-MM`, all values are decimal fractions per month.
//!
//! Cleaning within a window keeps only funds with a full record, and drops any
//! fund reporting a return of exactly `0.0` (the data vendor's missing-value
//! sentinel).

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::month::{MonthWindow, YearMonth};

/// Minimum window length, in months.
pub const MIN_MONTHS: usize = 12;

pub const FACTOR_NAMES: [&str; 4] = ["mkt_rf", "smb", "hml", "mom"];

/// Aligned T × p panel of monthly net returns.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    dates: Vec<YearMonth>,
    fund_ids: Vec<String>,
    returns: DMatrix<f64>,
}

impl ReturnPanel {
    pub fn new(dates: Vec<YearMonth>, fund_ids: Vec<String>, returns: DMatrix<f64>) -> Result<Self> {
        if returns.nrows() != dates.len() {
            return Err(Error::DimensionMismatch {
                context: "panel rows vs dates",
                expected: dates.len(),
                actual: returns.nrows(),
            });
        }
        if returns.ncols() != fund_ids.len() {
            return Err(Error::DimensionMismatch {
                context: "panel columns vs fund ids",
                expected: fund_ids.len(),
                actual: returns.ncols(),
            });
        }
        if dates.len() < MIN_MONTHS {
            return Err(Error::InvalidInput(format!(
                "panel has {} months, need at least {MIN_MONTHS}",
                dates.len()
            )));
        }
        check_consecutive(&dates)?;
        let distinct: BTreeSet<&String> = fund_ids.iter().collect();
        if distinct.len() != fund_ids.len() {
            return Err(Error::InvalidInput("duplicate fund ids in panel".into()));
        }
        if returns.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("return panel"));
        }
        Ok(Self {
            dates,
            fund_ids,
            returns,
        })
    }

    pub fn dates(&self) -> &[YearMonth] {
        &self.dates
    }

    pub fn fund_ids(&self) -> &[String] {
        &self.fund_ids
    }

    pub fn returns(&self) -> &DMatrix<f64> {
        &self.returns
    }

    pub fn n_months(&self) -> usize {
        self.dates.len()
    }

    pub fn n_funds(&self) -> usize {
        self.fund_ids.len()
    }

    /// Panel restricted to the given fund columns, in the given order.
    pub fn select_funds(&self, columns: &[usize]) -> Result<Self> {
        let ids = columns.iter().map(|&c| self.fund_ids[c].clone()).collect();
        let m = self.returns.select_columns(columns.iter());
        Self::new(self.dates.clone(), ids, m)
    }
}

/// Monthly factor returns on the same date grid as a [`ReturnPanel`].
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSeries {
    pub dates: Vec<YearMonth>,
    pub mkt: Vec<f64>,
    pub smb: Vec<f64>,
    pub hml: Vec<f64>,
    pub mom: Vec<f64>,
    pub rf: Vec<f64>,
}

impl FactorSeries {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// T × 4 matrix of (mkt, smb, hml, mom).
    pub fn design(&self) -> DMatrix<f64> {
        let t = self.len();
        DMatrix::from_fn(t, 4, |r, c| match c {
            0 => self.mkt[r],
            1 => self.smb[r],
            2 => self.hml[r],
            _ => self.mom[r],
        })
    }

    fn validate(&self) -> Result<()> {
        let t = self.dates.len();
        for (name, col) in [
            ("mkt_rf", &self.mkt),
            ("smb", &self.smb),
            ("hml", &self.hml),
            ("mom", &self.mom),
            ("rf", &self.rf),
        ] {
            if col.len() != t {
                return Err(Error::DimensionMismatch {
                    context: "factor column length",
                    expected: t,
                    actual: col.len(),
                });
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite value in factor {name}")));
            }
        }
        Ok(())
    }
}

/// Funds removed while assembling a window.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningLog {
    pub dropped_zero: Vec<String>,
    pub dropped_incomplete: Vec<String>,
    pub retained: usize,
}

#[derive(Debug, Clone)]
pub struct LoadedPanel {
    pub panel: ReturnPanel,
    pub factors: FactorSeries,
    pub log: CleaningLog,
}

/// All rows of a returns file, indexed by fund then month.
#[derive(Debug, Clone, Default)]
pub struct ReturnsTable {
    funds: BTreeMap<String, BTreeMap<YearMonth, f64>>,
}

impl ReturnsTable {
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, path)
    }

    pub fn from_reader<R: Read>(reader: R, origin: &Path) -> Result<Self> {
        let mut rdr = csv_reader(reader);
        expect_header(&mut rdr, &["date", "fund_id", "ret"], origin)?;
        let mut funds: BTreeMap<String, BTreeMap<YearMonth, f64>> = BTreeMap::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_parse_error(e, origin))?;
            let line = line_of(&rec);
            let bad = |message: String| Error::Parse {
                path: origin.to_path_buf(),
                line,
                message,
            };
            if rec.len() != 3 {
                return Err(bad(format!("expected 3 fields, found {}", rec.len())));
            }
            let date: YearMonth = rec[0].parse().map_err(|e: crate::month::ParseMonthError| bad(e.to_string()))?;
            let fund = rec[1].trim();
            if fund.is_empty() {
                return Err(bad("empty fund_id".into()));
            }
            let ret = parse_f64(&rec[2]).ok_or_else(|| bad(format!("invalid return `{}`", &rec[2])))?;
            let series = funds.entry(fund.to_string()).or_default();
            if series.insert(date, ret).is_some() {
                return Err(bad(format!("duplicate observation for fund {fund} in {date}")));
            }
        }
        Ok(Self { funds })
    }

    pub fn n_funds(&self) -> usize {
        self.funds.len()
    }

    pub fn get(&self, fund: &str, month: YearMonth) -> Option<f64> {
        self.funds.get(fund).and_then(|s| s.get(&month)).copied()
    }

    pub fn fund_ids(&self) -> impl Iterator<Item = &str> {
        self.funds.keys().map(String::as_str)
    }

    pub fn insert(&mut self, fund: &str, month: YearMonth, ret: f64) {
        self.funds.entry(fund.to_string()).or_default().insert(month, ret);
    }

    /// Writes the long-format CSV this table was read from.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["date", "fund_id", "ret"])?;
        // Month-major ordering, funds sorted within a month.
        let mut rows: Vec<(YearMonth, &str, f64)> = self
            .funds
            .iter()
            .flat_map(|(f, s)| s.iter().map(move |(m, r)| (*m, f.as_str(), *r)))
            .collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(b.1)));
        for (m, f, r) in rows {
            wtr.write_record([m.to_string(), f.to_string(), fmt_f64(r)])?;
        }
        wtr.flush().map_err(|e| Error::io("<returns csv>", e))?;
        Ok(())
    }
}

/// All rows of a factors file.
#[derive(Debug, Clone, Default)]
pub struct FactorTable {
    rows: BTreeMap<YearMonth, [f64; 5]>,
}

impl FactorTable {
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, path)
    }

    pub fn from_reader<R: Read>(reader: R, origin: &Path) -> Result<Self> {
        let mut rdr = csv_reader(reader);
        expect_header(&mut rdr, &["date", "mkt_rf", "smb", "hml", "mom", "rf"], origin)?;
        let mut rows = BTreeMap::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_parse_error(e, origin))?;
            let line = line_of(&rec);
            let bad = |message: String| Error::Parse {
                path: origin.to_path_buf(),
                line,
                message,
            };
            if rec.len() != 6 {
                return Err(bad(format!("expected 6 fields, found {}", rec.len())));
            }
            let date: YearMonth = rec[0].parse().map_err(|e: crate::month::ParseMonthError| bad(e.to_string()))?;
            let mut vals = [0.0; 5];
            for (k, v) in vals.iter_mut().enumerate() {
                *v = parse_f64(&rec[k + 1]).ok_or_else(|| bad(format!("invalid value `{}`", &rec[k + 1])))?;
            }
            if rows.insert(date, vals).is_some() {
                return Err(bad(format!("duplicate factor row for {date}")));
            }
        }
        Ok(Self { rows })
    }

    pub fn from_series(f: &FactorSeries) -> Self {
        let rows = f
            .dates
            .iter()
            .enumerate()
            .map(|(t, d)| (*d, [f.mkt[t], f.smb[t], f.hml[t], f.mom[t], f.rf[t]]))
            .collect();
        Self { rows }
    }

    pub fn get(&self, month: YearMonth) -> Option<[f64; 5]> {
        self.rows.get(&month).copied()
    }

    /// Factor series over `window`; every month must be present.
    pub fn window(&self, window: MonthWindow) -> Result<FactorSeries> {
        let present = window.months().filter(|m| self.rows.contains_key(m)).count();
        if present == 0 {
            return Err(Error::Alignment(format!(
                "factor file has no months inside {window}"
            )));
        }
        let mut out = FactorSeries {
            dates: Vec::with_capacity(window.len()),
            mkt: Vec::new(),
            smb: Vec::new(),
            hml: Vec::new(),
            mom: Vec::new(),
            rf: Vec::new(),
        };
        for m in window.months() {
            let v = self
                .rows
                .get(&m)
                .ok_or_else(|| Error::Alignment(format!("factor file has a gap at {m}")))?;
            out.dates.push(m);
            out.mkt.push(v[0]);
            out.smb.push(v[1]);
            out.hml.push(v[2]);
            out.mom.push(v[3]);
            out.rf.push(v[4]);
        }
        Ok(out)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["date", "mkt_rf", "smb", "hml", "mom", "rf"])?;
        for (m, v) in &self.rows {
            let mut rec = vec![m.to_string()];
            rec.extend(v.iter().map(|x| fmt_f64(*x)));
            wtr.write_record(rec)?;
        }
        wtr.flush().map_err(|e| Error::io("<factors csv>", e))?;
        Ok(())
    }
}

/// Read both files and assemble the cleaned panel for `window`.
pub fn load_panel(
    returns_csv: impl AsRef<Path>,
    factors_csv: impl AsRef<Path>,
    window: MonthWindow,
) -> Result<LoadedPanel> {
    let returns = ReturnsTable::from_csv_path(returns_csv)?;
    let factors = FactorTable::from_csv_path(factors_csv)?;
    assemble_window(&returns, &factors, window)
}

/// Apply the window cleaning rules to already-parsed tables.
pub fn assemble_window(
    returns: &ReturnsTable,
    factors: &FactorTable,
    window: MonthWindow,
) -> Result<LoadedPanel> {
    if window.len() < MIN_MONTHS {
        return Err(Error::Config(format!(
            "window {window} spans {} months, need at least {MIN_MONTHS}",
            window.len()
        )));
    }
    let factor_series = factors.window(window)?;
    factor_series.validate()?;

    let mut log = CleaningLog::default();
    let mut kept_ids = Vec::new();
    let mut columns: Vec<f64> = Vec::new();
    let mut any_overlap = false;
    for (fund, series) in &returns.funds {
        let in_window: Vec<Option<f64>> = window.months().map(|m| series.get(&m).copied()).collect();
        if in_window.iter().any(Option::is_some) {
            any_overlap = true;
        } else {
            continue;
        }
        if in_window.iter().any(Option::is_none) {
            log.dropped_incomplete.push(fund.clone());
            continue;
        }
        // Exact comparison: a literal zero is the missing-value sentinel.
        if in_window.contains(&Some(0.0)) {
            log.dropped_zero.push(fund.clone());
            continue;
        }
        kept_ids.push(fund.clone());
        columns.extend(in_window.into_iter().map(|v| v.expect("checked complete")));
    }
    if !any_overlap {
        return Err(Error::Alignment(format!(
            "returns file has no observations inside {window}"
        )));
    }
    if kept_ids.is_empty() {
        return Err(Error::NoEligibleFunds {
            start: window.start.to_string(),
            end: window.end.to_string(),
        });
    }
    log.retained = kept_ids.len();
    let t = window.len();
    let m = DMatrix::from_column_slice(t, kept_ids.len(), &columns);
    let panel = ReturnPanel::new(factor_series.dates.clone(), kept_ids, m)?;
    Ok(LoadedPanel {
        panel,
        factors: factor_series,
        log,
    })
}

/// Per-fund four-factor regression output.
#[derive(Debug, Clone)]
pub struct AlphaEstimates {
    pub fund_ids: Vec<String>,
    /// Intercepts, in monthly excess-return units.
    pub alpha_hat: DVector<f64>,
    /// Loadings on (mkt, smb, hml, mom).
    pub beta_hat: Vec<[f64; 4]>,
    /// Standard deviation of each intercept estimate.
    pub sigma: DVector<f64>,
    /// Standardized statistics alpha_hat / sigma.
    pub z: DVector<f64>,
    /// T × p regression residuals.
    pub residuals: DMatrix<f64>,
    /// Intercept weights: alpha_hat_i = h · (r_i − rf).
    pub h: DVector<f64>,
}

impl AlphaEstimates {
    pub fn len(&self) -> usize {
        self.fund_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fund_ids.is_empty()
    }

    /// Residual variance per fund, denominator T − 1.
    pub fn residual_variance(&self) -> Vec<f64> {
        let t = self.residuals.nrows() as f64;
        self.residuals
            .column_iter()
            .map(|c| c.norm_squared() / (t - 1.0))
            .collect()
    }

    /// CSV with one row per fund:
    /// `fund_id,alpha_hat,sigma,z,b_mkt,b_smb,b_hml,b_mom,resid_var`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record([
            "fund_id", "alpha_hat", "sigma", "z", "b_mkt", "b_smb", "b_hml", "b_mom", "resid_var",
        ])?;
        let rv = self.residual_variance();
        for i in 0..self.len() {
            let b = self.beta_hat[i];
            wtr.write_record([
                self.fund_ids[i].clone(),
                fmt_f64(self.alpha_hat[i]),
                fmt_f64(self.sigma[i]),
                fmt_f64(self.z[i]),
                fmt_f64(b[0]),
                fmt_f64(b[1]),
                fmt_f64(b[2]),
                fmt_f64(b[3]),
                fmt_f64(rv[i]),
            ])?;
        }
        wtr.flush().map_err(|e| Error::io("<alpha csv>", e))?;
        Ok(())
    }
}

/// Loadings and scales read back from an estimates CSV, used to seed simulations.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSummary {
    pub fund_ids: Vec<String>,
    pub sigma: Vec<f64>,
    pub beta: Vec<[f64; 4]>,
    pub resid_var: Vec<f64>,
}

impl EstimateSummary {
    pub fn from_estimates(est: &AlphaEstimates) -> Self {
        Self {
            fund_ids: est.fund_ids.clone(),
            sigma: est.sigma.iter().copied().collect(),
            beta: est.beta_hat.clone(),
            resid_var: est.residual_variance(),
        }
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv_reader(file);
        expect_header(
            &mut rdr,
            &["fund_id", "alpha_hat", "sigma", "z", "b_mkt", "b_smb", "b_hml", "b_mom", "resid_var"],
            path,
        )?;
        let mut out = Self {
            fund_ids: Vec::new(),
            sigma: Vec::new(),
            beta: Vec::new(),
            resid_var: Vec::new(),
        };
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_parse_error(e, path))?;
            let line = line_of(&rec);
            let num = |k: usize| {
                parse_f64(&rec[k]).ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("invalid number `{}`", &rec[k]),
                })
            };
            out.fund_ids.push(rec[0].to_string());
            out.sigma.push(num(2)?);
            out.beta.push([num(4)?, num(5)?, num(6)?, num(7)?]);
            out.resid_var.push(num(8)?);
        }
        if out.fund_ids.is_empty() {
            return Err(Error::InvalidInput(format!("{} has no rows", path.display())));
        }
        Ok(out)
    }
}

/// Excess returns r_i − rf as a T × p matrix.
pub fn excess_returns(panel: &ReturnPanel, factors: &FactorSeries) -> Result<DMatrix<f64>> {
    check_aligned(panel, factors)?;
    let mut y = panel.returns.clone();
    for mut col in y.column_iter_mut() {
        for (v, rf) in col.iter_mut().zip(&factors.rf) {
            *v -= rf;
        }
    }
    Ok(y)
}

/// Four-factor OLS for every fund.
pub fn carhart_fit(panel: &ReturnPanel, factors: &FactorSeries) -> Result<AlphaEstimates> {
    let y = excess_returns(panel, factors)?;
    let t = panel.n_months();
    if t <= 5 {
        return Err(Error::InvalidInput(format!(
            "{t} months is not enough for a five-column regression"
        )));
    }
    let r = factors.design();
    let mut x = DMatrix::from_element(t, 5, 1.0);
    x.columns_mut(1, 4).copy_from(&r);
    check_full_rank(&x)?;

    // Coefficient map (XᵀX)⁻¹Xᵀ via QR; its first row is h.
    let qr = x.clone().qr();
    let rmat = qr.r();
    let qt = qr.q().transpose();
    let proj = rmat
        .solve_upper_triangular(&qt)
        .ok_or_else(|| Error::Numerical("triangular solve failed in OLS".into()))?;
    let h: DVector<f64> = proj.row(0).transpose();

    let h_closed = intercept_weights_closed_form(&r)?;
    let scale = h.amax().max(f64::MIN_POSITIVE);
    let gap = (&h - &h_closed).amax();
    if gap > 1e-8 * scale {
        return Err(Error::Numerical(format!(
            "intercept weights disagree with the closed form by {gap:e}"
        )));
    }

    let coef = &proj * &y; // 5 × p
    let alpha_hat: DVector<f64> = coef.row(0).transpose();
    let beta_hat: Vec<[f64; 4]> = (0..panel.n_funds())
        .map(|i| [coef[(1, i)], coef[(2, i)], coef[(3, i)], coef[(4, i)]])
        .collect();
    let residuals = &y - &x * &coef;

    let h_norm = h.norm();
    let mut sigma = DVector::zeros(panel.n_funds());
    let mut z = DVector::zeros(panel.n_funds());
    for (i, col) in y.column_iter().enumerate() {
        let sd = sample_variance(col.as_slice()).sqrt();
        let s = h_norm * sd;
        sigma[i] = s;
        z[i] = if s > 0.0 {
            alpha_hat[i] / s
        } else if alpha_hat[i] == 0.0 {
            0.0
        } else {
            return Err(Error::InvalidInput(format!(
                "fund {} has constant excess returns; its alpha cannot be standardized",
                panel.fund_ids[i]
            )));
        };
    }

    Ok(AlphaEstimates {
        fund_ids: panel.fund_ids.clone(),
        alpha_hat,
        beta_hat,
        sigma,
        z,
        residuals,
        h,
    })
}

/// hᵀ = (T − 1ᵀR(RᵀR)⁻¹Rᵀ1)⁻¹ 1ᵀ − (1/T) 1ᵀR (RᵀR − Rᵀ1 (1/T) 1ᵀR)⁻¹ Rᵀ
///
/// `r` is the T × k factor matrix without the intercept column.
pub fn intercept_weights_closed_form(r: &DMatrix<f64>) -> Result<DVector<f64>> {
    let t = r.nrows();
    let tf = t as f64;
    let ones = DVector::from_element(t, 1.0);
    let rtr = r.transpose() * r;
    let rt1 = r.transpose() * &ones;
    let rtr_inv = rtr
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("RᵀR is not positive definite".into()))?
        .inverse();
    let lead = 1.0 / (tf - (rt1.transpose() * &rtr_inv * &rt1)[(0, 0)]);
    let centered = &rtr - (&rt1 * rt1.transpose()) / tf;
    let centered_inv = centered
        .cholesky()
        .ok_or_else(|| Error::Numerical("centered RᵀR is not positive definite".into()))?
        .inverse();
    let tail = (rt1.transpose() * centered_inv * r.transpose()) / tf; // 1 × T
    Ok(DVector::from_fn(t, |i, _| lead - tail[(0, i)]))
}

fn check_full_rank(x: &DMatrix<f64>) -> Result<()> {
    let names = ["intercept", FACTOR_NAMES[0], FACTOR_NAMES[1], FACTOR_NAMES[2], FACTOR_NAMES[3]];
    let r = x.clone().qr().r();
    for j in 0..x.ncols() {
        let col_norm = x.column(j).norm();
        if col_norm == 0.0 || r[(j, j)].abs() <= 1e-10 * col_norm {
            return Err(Error::Singular {
                factor: names[j].to_string(),
            });
        }
    }
    Ok(())
}

fn check_aligned(panel: &ReturnPanel, factors: &FactorSeries) -> Result<()> {
    if panel.dates != factors.dates {
        return Err(Error::Alignment("panel and factor dates differ".into()));
    }
    Ok(())
}

fn check_consecutive(dates: &[YearMonth]) -> Result<()> {
    for w in dates.windows(2) {
        if w[1].ordinal() != w[0].ordinal() + 1 {
            return Err(Error::Alignment(format!(
                "dates are not consecutive months: {} then {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

pub(crate) fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
}

pub(crate) fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader)
}

pub(crate) fn expect_header<R: Read>(
    rdr: &mut csv::Reader<R>,
    expected: &[&str],
    origin: &Path,
) -> Result<()> {
    let header = rdr.headers().map_err(|e| csv_parse_error(e, origin))?.clone();
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(Error::Parse {
            path: origin.to_path_buf(),
            line: header.position().map_or(1, |p| p.line()),
            message: format!("expected header `{}`, found `{}`", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

pub(crate) fn csv_parse_error(e: csv::Error, origin: &Path) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse {
        path: origin.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

pub(crate) fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

pub(crate) fn parse_f64(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Shortest round-trip decimal representation.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::path::PathBuf;

    fn ym(s: &str) -> YearMonth {
        s.parse().unwrap()
    }

    fn factor_table(window: MonthWindow, seed: u64) -> FactorTable {
        let mut rng = crate::rng::substream(seed, "test-factors", 0);
        let mut t = FactorTable::default();
        for m in window.months() {
            let v = [
                rng.random_range(-0.08..0.08),
                rng.random_range(-0.04..0.04),
                rng.random_range(-0.04..0.04),
                rng.random_range(-0.06..0.06),
                0.001 + rng.random_range(0.0..0.002),
            ];
            t.rows.insert(m, v);
        }
        t
    }

    #[test]
    fn zero_return_fund_is_dropped() {
        let w = MonthWindow::years(2009, 2018);
        let factors = factor_table(w, 1);
        let mut rng = crate::rng::substream(2, "test-returns", 0);
        let mut table = ReturnsTable::default();
        for (k, fund) in ["A", "B", "C"].iter().enumerate() {
            for (t, m) in w.months().enumerate() {
                let mut r = rng.random_range(-0.05..0.05);
                if k == 1 && t == 37 {
                    r = 0.0;
                }
                table.insert(fund, m, r);
            }
        }
        let loaded = assemble_window(&table, &factors, w).unwrap();
        assert_eq!(loaded.panel.fund_ids(), &["A".to_string(), "C".to_string()]);
        assert_eq!(loaded.log.dropped_zero, vec!["B".to_string()]);
        assert_eq!(loaded.log.retained, 2);
        assert_eq!(loaded.panel.dates(), loaded.factors.dates.as_slice());
    }

    #[test]
    fn incomplete_fund_is_dropped() {
        let w = MonthWindow::years(2010, 2011);
        let factors = factor_table(w, 3);
        let mut table = ReturnsTable::default();
        for (t, m) in w.months().enumerate() {
            table.insert("full", m, 0.01 + t as f64 * 1e-4);
            if t != 5 {
                table.insert("gappy", m, 0.02);
            }
        }
        let loaded = assemble_window(&table, &factors, w).unwrap();
        assert_eq!(loaded.log.dropped_incomplete, vec!["gappy".to_string()]);
        assert_eq!(loaded.panel.n_funds(), 1);
    }

    #[test]
    fn disjoint_window_is_alignment_error() {
        let factors = factor_table(MonthWindow::years(2000, 2001), 4);
        let mut table = ReturnsTable::default();
        for m in MonthWindow::years(2000, 2001).months() {
            table.insert("A", m, 0.01);
        }
        let err = assemble_window(&table, &factors, MonthWindow::years(2010, 2011)).unwrap_err();
        assert!(matches!(err, Error::Alignment(_)), "{err}");
    }

    #[test]
    fn factor_gap_is_alignment_error() {
        let w = MonthWindow::years(2000, 2001);
        let mut factors = factor_table(w, 5);
        factors.rows.remove(&ym("2000-07"));
        let err = factors.window(w).unwrap_err();
        assert!(err.to_string().contains("2000-07"), "{err}");
    }

    #[test]
    fn all_zero_funds_leaves_nothing() {
        let w = MonthWindow::years(2000, 2000);
        let factors = factor_table(w, 6);
        let mut table = ReturnsTable::default();
        for m in w.months() {
            table.insert("A", m, 0.0);
        }
        let err = assemble_window(&table, &factors, w).unwrap_err();
        assert!(matches!(err, Error::NoEligibleFunds { .. }));
    }

    #[test]
    fn short_window_rejected() {
        let w = MonthWindow::new(ym("2000-01"), ym("2000-06"));
        let err = assemble_window(&ReturnsTable::default(), &FactorTable::default(), w).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn malformed_row_reports_line() {
        let csv = "date,fund_id,ret\n2000-01,A,0.01\n2000-02,A,abc\n";
        let err = ReturnsTable::from_reader(csv.as_bytes(), &PathBuf::from("r.csv")).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
        let bad_header = "when,fund_id,ret\n";
        assert!(ReturnsTable::from_reader(bad_header.as_bytes(), &PathBuf::from("r.csv")).is_err());
        let dup = "date,fund_id,ret\n2000-01,A,0.01\n2000-01,A,0.02\n";
        assert!(ReturnsTable::from_reader(dup.as_bytes(), &PathBuf::from("r.csv")).is_err());
    }

    fn noiseless_setup(t: usize) -> (ReturnPanel, FactorSeries) {
        let w = MonthWindow::new(ym("2000-01"), ym("2000-01").offset(t as i64 - 1));
        let factors = factor_table(w, 9).window(w).unwrap();
        let mut cols = Vec::new();
        for k in 0..t {
            cols.push(factors.rf[k] + 0.001 + 0.5 * factors.mkt[k]);
        }
        for k in 0..t {
            cols.push(factors.rf[k]);
        }
        let m = DMatrix::from_column_slice(t, 2, &cols);
        let panel = ReturnPanel::new(factors.dates.clone(), vec!["lin".into(), "rf".into()], m).unwrap();
        (panel, factors)
    }

    #[test]
    fn noiseless_regression_recovers_coefficients() {
        let (panel, factors) = noiseless_setup(60);
        let est = carhart_fit(&panel, &factors).unwrap();
        assert!((est.alpha_hat[0] - 0.001).abs() < 1e-12);
        let b = est.beta_hat[0];
        assert!((b[0] - 0.5).abs() < 1e-10);
        assert!(b[1].abs() < 1e-10 && b[2].abs() < 1e-10 && b[3].abs() < 1e-10);
        assert!(est.residuals.column(0).amax() < 1e-12);
        // Returns equal to rf: zero excess return.
        assert!(est.alpha_hat[1].abs() < 1e-15);
        assert!(est.beta_hat[1].iter().all(|v| v.abs() < 1e-15));
        assert_eq!(est.z[1], 0.0);
    }

    #[test]
    fn constant_factor_is_singular() {
        let (panel, mut factors) = noiseless_setup(24);
        factors.hml = vec![0.01; 24];
        let err = carhart_fit(&panel, &factors).unwrap_err();
        match err {
            Error::Singular { factor } => assert_eq!(factor, "hml"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn misaligned_dates_rejected() {
        let (panel, mut factors) = noiseless_setup(24);
        factors.dates[0] = ym("1999-12");
        assert!(matches!(carhart_fit(&panel, &factors), Err(Error::Alignment(_))));
    }
}
