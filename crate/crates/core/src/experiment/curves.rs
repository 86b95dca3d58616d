use serde::Serialize;

use super::config::{ExperimentConfig, Target};
use super::report::{csv, fmt_num, OutDir};
use crate::convergence::{exact_distance_curve, fit_empirical_rate, fit_horizon, point_mass, policy_period, rate_from_norm};
use crate::error::Result;
use crate::par::{self, Execution};
use crate::projection::analyze_target;
use crate::variance::{comparison_constants, optimal_r, optimal_r_numeric, ScanPolicy};

/// `r = 0.01, 0.02, …, 0.99`.
pub fn r_grid() -> Vec<f64> {
    (1..100).map(|i| i as f64 / 100.0).collect()
}

/// 20 points per decade over `τ ∈ [10⁻⁴, 10⁴]`, including `τ = 1` exactly.
pub fn tau_grid() -> Vec<f64> {
    (-80..=80).map(|k| 10f64.powf(k as f64 / 20.0)).collect()
}

pub fn k_curve_csv() -> String {
    csv(
        &["r", "k1", "k2"],
        r_grid().into_iter().map(|r| {
            let (k1, k2) = comparison_constants(r);
            vec![fmt_num(r), fmt_num(k1), fmt_num(k2)]
        }),
    )
}

pub fn optimal_r_csv() -> String {
    csv(
        &["tau", "r", "r_numeric_min"],
        tau_grid().into_iter().map(|tau| vec![fmt_num(tau), fmt_num(optimal_r(tau)), fmt_num(optimal_r_numeric(tau))]),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveFit {
    pub policy: ScanPolicy,
    pub initial: [usize; 2],
    pub file: String,
    pub fitted_rate: Option<f64>,
    pub exact_rate: f64,
}

pub fn run(cfg: &ExperimentConfig, out: &mut OutDir, exec: Execution) -> Result<()> {
    out.write("k_curves.csv", &k_curve_csv())?;
    out.write("optimal_r.csv", &optimal_r_csv())?;
    let Target::Finite(target) = cfg.target.build()? else { return Ok(()) };
    let norm_c = analyze_target(&target, cfg.tolerances())?.1.norm_c();
    let spec = cfg.curves.clone().unwrap_or_default();
    let jobs: Vec<(ScanPolicy, [usize; 2])> =
        cfg.policies.iter().flat_map(|p| spec.initial.iter().map(move |&ij| (*p, ij))).collect();
    let curves = par::map(exec, &jobs, |(policy, [i, j])| {
        if *i >= target.n1() || *j >= target.n2() {
            return Err(crate::error::Error::UnsupportedInitial(format!("start cell ({i}, {j}) is outside the grid")));
        }
        exact_distance_curve(&target, policy, &point_mass(&target, *i, *j), spec.t)
    });
    let mut fits = Vec::new();
    for ((policy, ij), curve) in jobs.iter().zip(curves) {
        let curve = curve?;
        let label = match policy.param_label() {
            p if p.is_empty() => policy.name().to_string(),
            p => format!("{}_{p}", policy.name()),
        };
        let file = format!("distance_{label}_{}_{}.csv", ij[0], ij[1]);
        out.write(&file, &curve.to_csv())?;
        let period = policy_period(policy);
        let usable = spec.t.min(fit_horizon(rate_from_norm(policy, norm_c), period));
        let burn = (usable / 5 / period) * period;
        fits.push(CurveFit {
            policy: *policy,
            initial: *ij,
            file,
            fitted_rate: fit_empirical_rate(&curve, burn).ok(),
            exact_rate: rate_from_norm(policy, norm_c),
        });
    }
    out.write_json("curves.json", &fits)
}
