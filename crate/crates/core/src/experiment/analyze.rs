use serde::Serialize;

use super::config::{Analysis, ExperimentConfig};
use super::report::{csv, fmt_num, OutDir};
use super::Model;
use crate::convergence::{rate_orderings, rate_report, RateComparison, RateReport};
use crate::error::Result;
use crate::par::Execution;
use crate::projection::DecompositionSummary;
use crate::variance::{
    asymptotic_variance_series_oracle, orderings_for_correlations, variance_from_parts, OracleValue, OrderingCheck, ScanPolicy,
    VarianceReport, DEFAULT_MAX_TERMS,
};

/// Orderings below this are reported as violated.
pub const ORDERING_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct VarianceEntry {
    pub function: String,
    pub closed_form: VarianceReport,
    /// Present for finite targets.
    pub series_oracle: Option<OracleValue>,
    pub abs_diff: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RatesSummary {
    pub norm_c: f64,
    pub rates: Vec<RateReport>,
    pub orderings: Vec<RateComparison>,
}

/// Parameters used where an analysis needs a single `r` or `l`.
pub fn representative_params(policies: &[ScanPolicy]) -> (f64, u32) {
    let r = policies.iter().find_map(|p| if let ScanPolicy::Rg { r } = p { Some(*r) } else { None }).unwrap_or(0.5);
    let l = policies.iter().find_map(|p| if let ScanPolicy::Mdg { l } = p { Some(*l) } else { None }).unwrap_or(2);
    (r, l)
}

pub fn variance_entries(cfg: &ExperimentConfig, model: &Model, target: &super::config::Target) -> Result<Vec<VarianceEntry>> {
    let functions = cfg.resolved_functions(target)?;
    let mut entries = Vec::new();
    for (name, spec) in &functions {
        let parts = model.parts(spec)?;
        for policy in &cfg.policies {
            let closed_form = variance_from_parts(&parts, policy, cfg.tau)?;
            let series_oracle = match model {
                Model::Finite { target, space, dec } => {
                    let f = space.function(&spec.table(target)?)?;
                    Some(asymptotic_variance_series_oracle(&f.coords, dec.p1(), dec.p2(), policy, DEFAULT_MAX_TERMS)?)
                }
                Model::Gaussian { .. } => None,
            };
            let abs_diff = series_oracle.map(|o| (o.value - closed_form.v).abs());
            entries.push(VarianceEntry { function: name.clone(), closed_form, series_oracle, abs_diff });
        }
    }
    Ok(entries)
}

pub fn rates_summary(cfg: &ExperimentConfig, model: &Model) -> Result<RatesSummary> {
    let norm_c = model.norm_c();
    let rates = cfg.policies.iter().map(|p| rate_report(p, norm_c, cfg.tau)).collect::<Result<Vec<_>>>()?;
    let (r, l) = representative_params(&cfg.policies);
    Ok(RatesSummary { norm_c, rates, orderings: rate_orderings(norm_c, r, l, cfg.tau) })
}

pub fn ordering_checks(cfg: &ExperimentConfig, model: &Model) -> Vec<OrderingCheck> {
    let (r, l) = representative_params(&cfg.policies);
    orderings_for_correlations(&model.correlations(), r, l, 0.0)
}

/// Runs every analysis listed in the config and writes its reports into `out`.
pub fn run(cfg: &ExperimentConfig, out: &mut OutDir, exec: Execution) -> Result<()> {
    let target = cfg.target.build()?;
    let needs_model = cfg
        .analyses
        .iter()
        .any(|a| matches!(a, Analysis::Variance | Analysis::Rates | Analysis::Orderings | Analysis::Sharpness));
    let model = if needs_model { Some(Model::build(&target, cfg.tolerances())?) } else { None };

    let mut analyses = cfg.analyses.clone();
    analyses.sort();
    analyses.dedup();
    for analysis in analyses {
        match analysis {
            Analysis::Variance => {
                let model = model.as_ref().expect("model built for variance");
                if let Model::Finite { dec, .. } = model {
                    out.write_json("decomposition.json", &DecompositionSummary::from(dec))?;
                }
                out.write_json("variance.json", &variance_entries(cfg, model, &target)?)?;
            }
            Analysis::Rates => {
                out.write_json("rates.json", &rates_summary(cfg, model.as_ref().expect("model built for rates"))?)?;
            }
            Analysis::Orderings => {
                let checks = ordering_checks(cfg, model.as_ref().expect("model built for orderings"));
                let text = csv(
                    &["ordering", "min_eigenvalue", "holds"],
                    checks.iter().map(|c| {
                        vec![c.name.clone(), fmt_num(c.min_eigenvalue), (c.min_eigenvalue >= -ORDERING_SLACK).to_string()]
                    }),
                );
                out.write("orderings.csv", &text)?;
            }
            Analysis::Simulate => super::simulate::run(cfg, out, exec)?,
            Analysis::Sharpness => super::sharpness::run(cfg, out)?,
            Analysis::Curves => super::curves::run(cfg, out, exec)?,
        }
    }
    Ok(())
}
