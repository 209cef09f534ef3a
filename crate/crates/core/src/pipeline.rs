//! The end-to-end chain shared by the simulation lab, the backtester and the
//! command line: OLS → dependence → mixture fit → d-values.

use crate::dependence::{build_dependence, DependenceModel, DependenceOptions, EigenCache};
use crate::dvalue::{compute_dvalues, DValueOptions, DValues};
use crate::error::Result;
use crate::mixture::{fit_aeb, FitDiagnostics, FitOptions, MixtureParams};
use crate::panel::{carhart_fit, AlphaEstimates, FactorSeries, ReturnPanel};

#[derive(Debug, Clone, Default)]
pub struct PipelineOptions {
    pub dependence: DependenceOptions,
    pub fit: FitOptions,
    pub dvalue: DValueOptions,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub estimates: AlphaEstimates,
    pub dependence: DependenceModel,
    pub params: MixtureParams,
    pub diagnostics: FitDiagnostics,
    pub dvalues: DValues,
}

impl PipelineOutput {
    pub fn z(&self) -> &[f64] {
        self.estimates.z.as_slice()
    }
}

/// Estimate, fit and score one panel window. Both stochastic stages draw
/// from `seed` through their own named substreams.
pub fn run_window(
    panel: &ReturnPanel,
    factors: &FactorSeries,
    opts: &PipelineOptions,
    seed: u64,
    cache: Option<&EigenCache>,
) -> Result<PipelineOutput> {
    let estimates = carhart_fit(panel, factors)?;
    let dependence = build_dependence(&estimates, panel, factors, opts.dependence, cache)?;
    let z = estimates.z.as_slice();
    let (params, diagnostics) = fit_aeb(z, &dependence, &opts.fit, seed)?;
    let dvalues = compute_dvalues(z, &dependence, &params, &opts.dvalue, seed)?;
    Ok(PipelineOutput {
        estimates,
        dependence,
        params,
        diagnostics,
        dvalues,
    })
}
