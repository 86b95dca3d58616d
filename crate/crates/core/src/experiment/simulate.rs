use std::collections::BTreeMap;

use serde::Serialize;

use super::config::{ExperimentConfig, FunctionSpec, SimulationSpec, Target};
use super::report::{csv, fmt_num, OutDir};
use super::Model;
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::sampler::{
    batch_means, cost_adjusted_estimate, default_batch_len, gaussian_chain, pool_estimates, run_chain, BatchMeansEstimate, ChainRun,
    FiniteStart, RunOptions,
};
use crate::variance::{variance_from_parts, ScanPolicy, VarianceReport};

#[derive(Debug, Clone, Serialize)]
pub struct FunctionSummary {
    #[serde(rename = "S_T_mean")]
    pub s_t_mean: f64,
    /// Pooled over replicates; absent when the runs are too short for batch means.
    pub batch_means: Option<BatchMeansEstimate>,
    #[serde(rename = "V_adj_hat")]
    pub v_adj_hat: Option<f64>,
    pub closed_form: Option<VarianceReport>,
    /// `(V̂ − V) / se`.
    pub z: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PolicySummary {
    pub policy: ScanPolicy,
    #[serde(rename = "T")]
    pub t: usize,
    pub replicates: usize,
    pub batch_len: usize,
    pub seed: u64,
    pub tau: f64,
    pub cost_per_step: f64,
    pub functions: BTreeMap<String, FunctionSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub policies: Vec<PolicySummary>,
    pub warnings: Vec<String>,
}

/// Stream id of replicate `rep` under the policy at position `policy_index`.
pub fn chain_id(policy_index: usize, rep: usize) -> u64 {
    ((policy_index as u64) << 32) | rep as u64
}

pub struct SimulationOutput {
    pub report: SimulationReport,
    pub runs: Vec<(ScanPolicy, Vec<ChainRun>)>,
    pub function_names: Vec<String>,
}

pub fn simulate(cfg: &ExperimentConfig, sim: &SimulationSpec, exec: Execution) -> Result<SimulationOutput> {
    let target = cfg.target.build()?;
    let functions = cfg.resolved_functions(&target)?;
    let names: Vec<String> = functions.keys().cloned().collect();
    let batch_len = sim.batch_len.unwrap_or_else(|| default_batch_len(sim.t));
    let mut warnings = Vec::new();
    // the chains are well defined even when the closed forms are not
    let model = match Model::build(&target, cfg.tolerances()) {
        Ok(m) => Some(m),
        Err(e) if e.is_assumption_violation() => {
            warnings.push(format!("no closed-form comparison: {e}"));
            None
        }
        Err(e) => return Err(e),
    };
    let tables: Vec<Vec<f64>> = match &target {
        Target::Finite(t) => functions.values().map(|s| s.table(t)).collect::<Result<_>>()?,
        Target::Gaussian(_) => Vec::new(),
    };

    let mut runs = Vec::new();
    let mut summaries = Vec::new();
    for (pi, policy) in cfg.policies.iter().enumerate() {
        let chains = par::map_range(exec, sim.replicates, |rep| {
            let opts = RunOptions::new(sim.seed).chain(chain_id(pi, rep)).tau(cfg.tau).chunk_len(batch_len.min(sim.t).max(1));
            match &target {
                Target::Finite(t) => run_chain(t, policy, &tables, sim.t, FiniteStart::Stationary, &opts),
                Target::Gaussian(g) => gaussian_chain(g, policy, sim.t, &opts),
            }
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

        let mut per_function = BTreeMap::new();
        for (k, (name, spec)) in functions.iter().enumerate() {
            let estimates: Vec<BatchMeansEstimate> = chains.iter().filter_map(|c| batch_means(c, k, batch_len).ok()).collect();
            let pooled = if estimates.len() == chains.len() { pool_estimates(&estimates) } else { None };
            if pooled.is_none() {
                warnings.push(format!("{policy}, {name}: runs too short for batch means with batch length {batch_len}"));
            }
            let closed_form = closed_form(model.as_ref(), spec, policy, cfg.tau)?;
            let cost_per_step = chains.iter().map(|c| c.simulated_cost).sum::<f64>() / (chains.len() * sim.t) as f64;
            per_function.insert(
                name.clone(),
                FunctionSummary {
                    s_t_mean: chains.iter().map(|c| c.means[k]).sum::<f64>() / chains.len() as f64,
                    batch_means: pooled,
                    v_adj_hat: pooled.map(|p| cost_per_step * p.v_hat),
                    z: match (&pooled, &closed_form) {
                        (Some(p), Some(v)) if p.se > 0.0 => Some((p.v_hat - v.v) / p.se),
                        _ => None,
                    },
                    closed_form,
                },
            );
        }
        summaries.push(PolicySummary {
            policy: *policy,
            t: sim.t,
            replicates: sim.replicates,
            batch_len,
            seed: sim.seed,
            tau: cfg.tau,
            cost_per_step: chains.iter().map(|c| c.simulated_cost).sum::<f64>() / (chains.len() * sim.t) as f64,
            functions: per_function,
        });
        runs.push((*policy, chains));
    }
    Ok(SimulationOutput { report: SimulationReport { policies: summaries, warnings }, runs, function_names: names })
}

fn closed_form(model: Option<&Model>, spec: &FunctionSpec, policy: &ScanPolicy, tau: f64) -> Result<Option<VarianceReport>> {
    let Some(model) = model else { return Ok(None) };
    match variance_from_parts(&model.parts(spec)?, policy, tau) {
        Ok(v) => Ok(Some(v)),
        Err(Error::NotGeometric { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Per-replicate table: cost and, per function, `S_T`, `V̂` and its standard error.
pub fn replicate_csv(output: &SimulationOutput, batch_len: usize) -> String {
    let mut header = vec!["policy".to_string(), "param".into(), "replicate".into(), "cost".into()];
    for name in &output.function_names {
        header.push(format!("S_T_{name}"));
        header.push(format!("V_hat_{name}"));
        header.push(format!("se_{name}"));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows = Vec::new();
    for (policy, chains) in &output.runs {
        for (rep, c) in chains.iter().enumerate() {
            let mut row = vec![policy.name().to_string(), policy.param_label(), rep.to_string(), fmt_num(c.simulated_cost)];
            for k in 0..output.function_names.len() {
                row.push(fmt_num(c.means[k]));
                match batch_means(c, k, batch_len) {
                    Ok(e) => {
                        row.push(fmt_num(e.v_hat));
                        row.push(fmt_num(e.se));
                    }
                    Err(_) => {
                        row.push(String::new());
                        row.push(String::new());
                    }
                }
            }
            rows.push(row);
        }
    }
    csv(&header_refs, rows)
}

/// Cost-adjusted variance estimate of one replicate.
pub fn replicate_v_adj(run: &ChainRun, f_index: usize, batch_len: usize) -> Result<f64> {
    Ok(cost_adjusted_estimate(&batch_means(run, f_index, batch_len)?, run))
}

pub fn run(cfg: &ExperimentConfig, out: &mut OutDir, exec: Execution) -> Result<()> {
    let sim = cfg
        .simulation
        .clone()
        .ok_or_else(|| Error::Config("simulate needs a \"simulation\" section with T and seed".into()))?;
    let output = simulate(cfg, &sim, exec)?;
    let batch_len = sim.batch_len.unwrap_or_else(|| default_batch_len(sim.t));
    out.write("replicates.csv", &replicate_csv(&output, batch_len))?;
    out.write_json("simulate.json", &output.report)
}
