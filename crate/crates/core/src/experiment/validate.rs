//! Built-in invariant suite run by `gibbslab validate`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::analyze::variance_entries;
use super::config::{SimulationSpec, TargetSpec};
use super::report::canonical_json;
use super::simulate::{simulate, SimulationOutput};
use super::{random_cases, random_function, ExperimentConfig, Model, RandomCase};
use crate::convergence::{adjusted_rate, fitted_rate, p1p2p1_norm_on_m, rate_from_norm, rate_orderings, young_bound};
use crate::error::Result;
use crate::par::{self, Execution};
use crate::projection::{
    decompose_function, friedrichs_cosine, maximal_correlation_direct, reconstruction_residuals, verify_nishio, StateFunction,
};
use crate::sampler::{run_chain, FiniteStart, RunOptions};
use crate::target::{gaussian_max_correlation, FiniteTarget, GaussianTarget};
use crate::variance::{
    asymptotic_covariance_matrix, asymptotic_variance_series_oracle, comparison_constants, data_augmentation_variances, kappa,
    mdg_constants, optimal_r, ordering_suite_perturbed, step_time, variance_value, ScanPolicy,
    DEFAULT_MAX_TERMS,
};

pub const GROUPS: [&str; 7] = ["target", "projection", "variance", "orderings", "rates", "sampler", "reports"];
pub const R_GRID: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
pub const L_GRID: [u32; 3] = [1, 2, 5];

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub group: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub filter: Option<String>,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn table(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{mark}  {:<10}  {:<44}  {}\n", c.group, c.name, c.detail));
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        out.push_str(&format!("{} checks, {failed} failed\n", self.checks.len()));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ValidateOptions {
    /// Adds `0.1 · I` to `Σ_D` inside the ordering checks.
    pub inject_fault: bool,
    pub exec: Execution,
}

type Check = (&'static str, &'static str, fn(&ValidateOptions) -> (bool, String));

fn checks() -> Vec<Check> {
    vec![
        ("target", "law of total probability", target_total_probability),
        ("target", "conditionals are scale invariant", target_scale_invariance),
        ("target", "gaussian maximal correlation", target_gaussian_correlation),
        ("target", "gaussian correlation below one", target_gaussian_below_one),
        ("projection", "projections idempotent and self-adjoint", projection_idempotent),
        ("projection", "canonical form reconstructs P1 and P2", projection_reconstruction),
        ("projection", "friedrichs cosine is maximal correlation", projection_friedrichs),
        ("projection", "P1P2P1 acts as C^2 on P1M", projection_p1p2p1),
        ("projection", "components orthogonal and complete", projection_components),
        ("projection", "mixture eigenvalues on M", projection_nishio),
        ("variance", "closed form matches series oracle", variance_oracle),
        ("variance", "random scan at 1/2 doubles the excess", variance_greenwood),
        ("variance", "k1 and k2 bounds", variance_k_bounds),
        ("variance", "k2/kappa = 2 at optimal r", variance_optimal_r_identity),
        ("variance", "optimal r costs at most twice DG", variance_optimal_r_guarantee),
        ("variance", "MDG sandwich against RG(1/(l+1))", variance_mdg_sandwich),
        ("variance", "RG cost advantage on (I-P1)M", variance_cor2_regime),
        ("variance", "DG against random sequence scan", variance_rss),
        ("variance", "data augmentation specialization", variance_data_augmentation),
        ("variance", "covariance Loewner orderings", variance_covariance),
        ("orderings", "sigma Loewner orderings", orderings_sigma),
        ("rates", "P1P2P1 norm on M is |C|^2", rates_p1p2p1),
        ("rates", "RG rate minimized at r = 1/2", rates_rg_minimum),
        ("rates", "MDG rate nondecreasing in l", rates_mdg_monotone),
        ("rates", "adjusted rate orderings", rates_orderings),
        ("rates", "fitted distance slopes match rates", rates_fitted),
        ("sampler", "seeded runs are reproducible", sampler_determinism),
        ("sampler", "simulated cost per step", sampler_cost),
        ("sampler", "stationary occupation frequencies", sampler_stationarity),
        ("sampler", "batch means agree with closed form", sampler_batch_means),
        ("sampler", "DG against RSS in simulation", sampler_rss),
        ("sampler", "gaussian RG cost advantage", sampler_gaussian_ratio),
        ("reports", "identical reports on re-run", reports_deterministic),
        ("reports", "variance numbers carry provenance", reports_provenance),
    ]
}

/// Runs all checks whose group or name contains `filter`.
pub fn run_suite(filter: Option<&str>, opts: &ValidateOptions) -> ValidationReport {
    let selected: Vec<Check> = checks()
        .into_iter()
        .filter(|(g, n, _)| filter.is_none_or(|f| *g == f || n.contains(f)))
        .collect();
    let results = par::map(opts.exec, &selected, |(group, name, f)| {
        let (passed, detail) = f(opts);
        CheckResult { group, name, passed, detail }
    });
    let passed = results.iter().all(|c| c.passed);
    ValidationReport { filter: filter.map(str::to_string), checks: results, passed }
}

fn cases(seed: u64, count: usize, max_n: usize) -> Vec<RandomCase> {
    random_cases(seed, count, max_n, 0.05, 0.95)
}

fn random_f(case: &RandomCase, rng: &mut ChaCha8Rng) -> StateFunction {
    let n = case.target.n1() * case.target.n2();
    case.space.function(&random_function(rng, n)).expect("grid-sized table")
}

fn worst<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    xs.into_iter().fold(0.0_f64, f64::max)
}

fn fmt_num(x: f64) -> String {
    format!("{x:.3e}")
}

fn verdict(ok: bool, label: &str, value: f64) -> (bool, String) {
    (ok, format!("{label} {}", fmt_num(value)))
}

fn target_total_probability(_: &ValidateOptions) -> (bool, String) {
    let err = worst(cases(1, 20, 8).iter().map(|c| {
        let t = &c.target;
        let implied = t.row_conditionals().transpose() * t.marginal1();
        (implied - t.marginal2()).abs().max()
    }));
    verdict(err < 1e-12, "max error", err)
}

fn target_scale_invariance(_: &ValidateOptions) -> (bool, String) {
    let err = worst(cases(2, 10, 6).iter().map(|c| {
        let scaled = FiniteTarget::new(c.target.joint() * 37.5).expect("scaled table is valid");
        (scaled.row_conditionals() - c.target.row_conditionals()).abs().max()
            + (scaled.col_conditionals() - c.target.col_conditionals()).abs().max()
    }));
    verdict(err < 1e-12, "max conditional change", err)
}

fn target_gaussian_correlation(_: &ValidateOptions) -> (bool, String) {
    let g1 = GaussianTarget::new(DVector::zeros(1), 0.0, DMatrix::identity(1, 1), DVector::from_element(1, 0.6)).expect("valid");
    let g2 = GaussianTarget::new(DVector::zeros(2), 0.0, DMatrix::identity(2, 2) * 2.0, DVector::from_vec(vec![1.0, 0.0])).expect("valid");
    let err = (gaussian_max_correlation(&g1) - 0.6).abs().max((gaussian_max_correlation(&g2) - 0.5f64.sqrt()).abs());
    verdict(err < 1e-12, "max error", err)
}

fn target_gaussian_below_one(_: &ValidateOptions) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut max = 0.0_f64;
    let mut built = 0;
    for _ in 0..200 {
        let p = rng.random_range(1..=4);
        let l = DMatrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
        let a = &l * l.transpose() + DMatrix::identity(p, p) * 0.1;
        let b = DVector::from_fn(p, |_, _| rng.random_range(-1.5..1.5));
        if let Ok(g) = GaussianTarget::new(DVector::zeros(p), 0.0, a, b) {
            built += 1;
            max = max.max(gaussian_max_correlation(&g));
        }
    }
    (max < 1.0 && built > 0, format!("max {} over {built} accepted targets", fmt_num(max)))
}

fn projection_idempotent(_: &ValidateOptions) -> (bool, String) {
    let err = worst(cases(3, 20, 8).iter().map(|c| {
        let (p1, p2) = (c.dec.p1(), c.dec.p2());
        let idem = (p1 * p1 - p1).abs().max().max((p2 * p2 - p2).abs().max());
        idem.max((p1 - p1.transpose()).abs().max()).max((p2 - p2.transpose()).abs().max())
    }));
    verdict(err < 1e-10, "max residual", err)
}

fn projection_reconstruction(_: &ValidateOptions) -> (bool, String) {
    let err = worst(cases(4, 20, 12).iter().map(|c| {
        let (a, b) = reconstruction_residuals(&c.dec);
        a.max(b)
    }));
    verdict(err < 1e-8, "max residual", err)
}

fn projection_friedrichs(_: &ValidateOptions) -> (bool, String) {
    let err = worst(cases(5, 20, 8).iter().map(|c| (friedrichs_cosine(&c.dec) - maximal_correlation_direct(&c.target)).abs()));
    verdict(err < 1e-8, "max difference", err)
}

fn projection_p1p2p1(_: &ValidateOptions) -> (bool, String) {
    let err = worst(cases(6, 20, 8).iter().map(|c| {
        let e = c.dec.basis_p1m();
        let m = e.transpose() * c.dec.p1() * c.dec.p2() * c.dec.p1() * e;
        (m - DMatrix::from_diagonal(&c.dec.c().map(|x| x * x))).abs().max()
    }));
    verdict(err < 1e-8, "max residual", err)
}

fn projection_components(_: &ValidateOptions) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let err = worst(cases(7, 20, 8).iter().map(|c| {
        let f = random_f(c, &mut rng);
        let parts = decompose_function(&f, &c.dec);
        let all = parts.all();
        let mut e = (parts.sum() - &f.coords).norm();
        for i in 0..5 {
            for j in 0..i {
                e = e.max(all[i].dot(all[j]).abs());
            }
        }
        e
    }));
    verdict(err < 1e-10, "max residual", err)
}

fn projection_nishio(_: &ValidateOptions) -> (bool, String) {
    let err = worst(cases(8, 20, 8).iter().flat_map(|c| R_GRID.map(|r| verify_nishio(&c.dec, r))));
    verdict(err < 1e-8, "max discrepancy", err)
}

fn grid_policies() -> Vec<ScanPolicy> {
    let mut ps = vec![ScanPolicy::Dg, ScanPolicy::Rss];
    ps.extend(R_GRID.map(|r| ScanPolicy::Rg { r }));
    ps.extend(L_GRID.map(|l| ScanPolicy::Mdg { l }));
    ps
}

fn variance_oracle(opts: &ValidateOptions) -> (bool, String) {
    let cs = cases(9, 50, 8);
    let diffs = par::map_range(opts.exec, cs.len(), |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + k as u64);
        let c = &cs[k];
        let f = random_f(c, &mut rng);
        let mut e = 0.0_f64;
        for p in grid_policies() {
            let closed = variance_value(&f.coords, &c.dec, &p).expect("geometric target");
            match asymptotic_variance_series_oracle(&f.coords, c.dec.p1(), c.dec.p2(), &p, DEFAULT_MAX_TERMS) {
                Ok(o) => e = e.max((o.value - closed).abs()),
                Err(_) => return f64::INFINITY,
            }
        }
        e
    });
    let err = worst(diffs);
    verdict(err < 1e-7, "max |closed - oracle|", err)
}

/// `(case, f)` pairs: random functions plus pure component directions.
fn test_functions(seed: u64, count: usize) -> Vec<(RandomCase, DVector<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for c in cases(seed, count, 8) {
        for _ in 0..3 {
            let f = random_f(&c, &mut rng);
            out.push((c.clone(), f.coords));
        }
        for b in [c.dec.basis_p1m(), c.dec.basis_ip1m(), c.dec.basis_m01(), c.dec.basis_m10()] {
            if b.ncols() > 0 {
                out.push((c.clone(), b.column(0).into_owned()));
            }
        }
    }
    out
}

fn v(case: &RandomCase, f: &DVector<f64>, p: ScanPolicy) -> f64 {
    variance_value(f, &case.dec, &p).expect("geometric target")
}

fn variance_greenwood(_: &ValidateOptions) -> (bool, String) {
    let err = worst(test_functions(10, 10).iter().map(|(c, f)| {
        let n = f.norm_squared();
        ((v(c, f, ScanPolicy::Rg { r: 0.5 }) - n) - 2.0 * (v(c, f, ScanPolicy::Dg) - n)).abs()
    }));
    verdict(err < 1e-9, "max residual", err)
}

fn variance_k_bounds(_: &ValidateOptions) -> (bool, String) {
    let mut slack = f64::INFINITY;
    for (c, f) in test_functions(11, 10) {
        let vd = v(&c, &f, ScanPolicy::Dg);
        for r in (1..20).map(|i| i as f64 / 20.0) {
            let (k1, k2) = comparison_constants(r);
            let vr = v(&c, &f, ScanPolicy::Rg { r });
            slack = slack.min(k1 * vr - vd).min(k2 * vd - vr);
        }
    }
    verdict(slack >= -1e-9, "min slack", slack)
}

fn variance_optimal_r_identity(_: &ValidateOptions) -> (bool, String) {
    let err = worst([0.1, 0.5, 1.0, 2.0, 4.0, 100.0].map(|tau| {
        let r = optimal_r(tau);
        (comparison_constants(r).1 / kappa(tau, r) - 2.0).abs()
    }));
    verdict(err < 1e-10, "max |k2/kappa - 2|", err)
}

fn variance_optimal_r_guarantee(_: &ValidateOptions) -> (bool, String) {
    let mut slack = f64::INFINITY;
    for (c, f) in test_functions(12, 10) {
        for tau in [0.1, 1.0, 4.0, 100.0] {
            let r = ScanPolicy::Rg { r: optimal_r(tau) };
            let vr = step_time(&r, tau) * v(&c, &f, r);
            let vd = step_time(&ScanPolicy::Dg, tau) * v(&c, &f, ScanPolicy::Dg);
            slack = slack.min(2.0 * vd - vr);
        }
    }
    verdict(slack >= -1e-9, "min slack", slack)
}

fn variance_mdg_sandwich(_: &ValidateOptions) -> (bool, String) {
    let mut slack = f64::INFINITY;
    for (c, f) in test_functions(13, 10) {
        for l in L_GRID {
            for tau in [0.5, 1.0, 4.0] {
                let m = ScanPolicy::Mdg { l };
                let r = ScanPolicy::Rg { r: 1.0 / (l as f64 + 1.0) };
                let vm = step_time(&m, tau) * v(&c, &f, m);
                let vr = step_time(&r, tau) * v(&c, &f, r);
                slack = slack.min(vr - vm).min(crate::variance::constants::mdg_sandwich(l) * vm - vr);
                let (m1, m2) = mdg_constants(l);
                let vd = v(&c, &f, ScanPolicy::Dg);
                let vm_raw = v(&c, &f, m);
                slack = slack.min(m1 * vd - vm_raw).min(m2 * vm_raw - vd);
            }
        }
    }
    verdict(slack >= -1e-9, "min slack", slack)
}

fn variance_cor2_regime(_: &ValidateOptions) -> (bool, String) {
    let mut err = 0.0_f64;
    let mut ratio_at_100 = 0.0;
    for c in cases(14, 5, 8) {
        let f = c.dec.basis_ip1m().column(0).into_owned();
        for (tau, r) in [(100.0, 0.1), (4.0, 0.3), (1.0, 0.5)] {
            let rg = ScanPolicy::Rg { r };
            let got = step_time(&rg, tau) * v(&c, &f, rg) / (step_time(&ScanPolicy::Dg, tau) * v(&c, &f, ScanPolicy::Dg));
            let want = (r * tau + 1.0 - r) * (1.0 + r) / ((tau + 1.0) * (1.0 - r));
            err = err.max((got - want).abs());
            if tau == 100.0 {
                ratio_at_100 = got;
            }
        }
    }
    (err < 1e-10 && ratio_at_100 < 0.15, format!("max error {}, ratio at tau=100 {}", fmt_num(err), fmt_num(ratio_at_100)))
}

fn variance_rss(_: &ValidateOptions) -> (bool, String) {
    let mut slack = f64::INFINITY;
    for (c, f) in test_functions(15, 10) {
        let vd = v(&c, &f, ScanPolicy::Dg);
        let vs = v(&c, &f, ScanPolicy::Rss);
        slack = slack.min(2.0 * vs - vd);
        for tau in [0.5, 1.0, 4.0] {
            slack = slack.min(step_time(&ScanPolicy::Rss, tau) * vs - step_time(&ScanPolicy::Dg, tau) * vd);
        }
    }
    verdict(slack >= -1e-9, "min slack", slack)
}

fn variance_data_augmentation(_: &ValidateOptions) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut err = 0.0_f64;
    for c in cases(16, 10, 8) {
        let g = random_f(&c, &mut rng);
        let f = c.space.from_coords(c.dec.p1() * &g.coords);
        for r in R_GRID {
            let (vd, vr) = data_augmentation_variances(&f, &c.dec, r).expect("f lies in H1");
            err = err.max((vd - v(&c, &f.coords, ScanPolicy::Dg)).abs());
            err = err.max((vr - v(&c, &f.coords, ScanPolicy::Rg { r })).abs());
        }
    }
    verdict(err < 1e-10, "max difference", err)
}

fn variance_covariance(_: &ValidateOptions) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut slack = f64::INFINITY;
    for c in cases(17, 10, 8) {
        let fs: Vec<StateFunction> = (0..3).map(|_| random_f(&c, &mut rng)).collect();
        let vd = asymptotic_covariance_matrix(&fs, &c.dec, &ScanPolicy::Dg).expect("geometric");
        for r in R_GRID {
            let vr = asymptotic_covariance_matrix(&fs, &c.dec, &ScanPolicy::Rg { r }).expect("geometric");
            let (k1, k2) = comparison_constants(r);
            slack = slack.min(crate::linalg::min_eigenvalue(&(&vr * k1 - &vd)));
            slack = slack.min(crate::linalg::min_eigenvalue(&(&vd * k2 - &vr)));
        }
    }
    verdict(slack >= -1e-9, "min eigenvalue", slack)
}

fn orderings_sigma(opts: &ValidateOptions) -> (bool, String) {
    let shift = if opts.inject_fault { 0.1 } else { 0.0 };
    let mut min = f64::INFINITY;
    let mut failing = None;
    for c in cases(18, 20, 8) {
        for r in R_GRID {
            for l in L_GRID {
                for check in ordering_suite_perturbed(&c.dec, r, l, shift) {
                    if check.min_eigenvalue < min {
                        min = check.min_eigenvalue;
                        failing = Some(check.name);
                    }
                }
            }
        }
    }
    let ok = min >= -1e-9;
    let detail = if ok {
        format!("min eigenvalue {}", fmt_num(min))
    } else {
        format!("violated: {} (min eigenvalue {})", failing.unwrap_or_default(), fmt_num(min))
    };
    (ok, detail)
}

fn rates_p1p2p1(_: &ValidateOptions) -> (bool, String) {
    let err = worst(cases(19, 20, 8).iter().map(|c| (p1p2p1_norm_on_m(&c.dec) - c.dec.norm_c().powi(2)).abs()));
    verdict(err < 1e-8, "max difference", err)
}

fn rates_rg_minimum(_: &ValidateOptions) -> (bool, String) {
    let mut slack = f64::INFINITY;
    for c in [0.1, 0.5, 0.9, 0.99] {
        let best = rate_from_norm(&ScanPolicy::Rg { r: 0.5 }, c);
        for r in (1..100).map(|i| i as f64 / 100.0) {
            slack = slack.min(rate_from_norm(&ScanPolicy::Rg { r }, c) - best);
        }
    }
    verdict(slack >= -1e-15, "min slack", slack)
}

fn rates_mdg_monotone(_: &ValidateOptions) -> (bool, String) {
    let mut ok = true;
    for c in [0.1, 0.5, 0.9, 0.99] {
        ok &= rate_from_norm(&ScanPolicy::Mdg { l: 1 }, c) == rate_from_norm(&ScanPolicy::Dg, c);
        for l in 1..20 {
            ok &= rate_from_norm(&ScanPolicy::Mdg { l: l + 1 }, c) >= rate_from_norm(&ScanPolicy::Mdg { l }, c);
        }
    }
    (ok, "l = 1..20".into())
}

fn rates_orderings(_: &ValidateOptions) -> (bool, String) {
    let mut failures = 0;
    let mut total = 0;
    for c in [0.05, 0.3, 0.6, 0.9, 0.996] {
        for r in R_GRID {
            for l in L_GRID {
                for tau in [0.1, 1.0, 4.0, 100.0] {
                    for cmp in rate_orderings(c, r, l, tau) {
                        total += 1;
                        failures += usize::from(!cmp.holds);
                    }
                    let young = young_bound(c, r, tau);
                    let d = adjusted_rate(&ScanPolicy::Dg, c, tau);
                    let rg = adjusted_rate(&ScanPolicy::Rg { r }, rate_from_norm(&ScanPolicy::Rg { r }, c), tau);
                    total += 2;
                    failures += usize::from(young < d - 1e-15) + usize::from(rg < young - 1e-15);
                }
            }
        }
    }
    (failures == 0, format!("{failures} of {total} comparisons violated"))
}

fn rates_fitted(opts: &ValidateOptions) -> (bool, String) {
    let cs = random_cases(20, 20, 6, 0.3, 0.95);
    let policies = [ScanPolicy::Dg, ScanPolicy::Rg { r: 0.3 }, ScanPolicy::Mdg { l: 2 }, ScanPolicy::Rss];
    let jobs: Vec<(usize, ScanPolicy)> = (0..cs.len()).flat_map(|k| policies.map(|p| (k, p))).collect();
    let errs = par::map(opts.exec, &jobs, |(k, p)| {
        let c = &cs[*k];
        fitted_rate(&c.target, p, c.dec.norm_c(), 0.2, Execution::Sequential).map_or(f64::INFINITY, |fit| fit.relative_error)
    });
    let err = worst(errs);
    verdict(err < 0.02, "max relative error", err)
}

fn binary() -> FiniteTarget {
    FiniteTarget::from_rows(&[vec![0.4, 0.1], vec![0.1, 0.4]]).expect("valid table")
}

fn sampler_determinism(_: &ValidateOptions) -> (bool, String) {
    let t = binary();
    let f = vec![vec![0.0, 1.0, 0.0, 1.0]];
    let mut ok = true;
    for p in [ScanPolicy::Dg, ScanPolicy::Rg { r: 0.3 }, ScanPolicy::Mdg { l: 2 }, ScanPolicy::Rss] {
        let opts = RunOptions::new(99).chain(3).chunk_len(100);
        let a = run_chain(&t, &p, &f, 20_000, FiniteStart::Stationary, &opts).expect("valid run");
        let b = run_chain(&t, &p, &f, 20_000, FiniteStart::Stationary, &opts).expect("valid run");
        ok &= a == b;
    }
    (ok, "identical summaries on re-run".into())
}

fn sampler_cost(_: &ValidateOptions) -> (bool, String) {
    let t = binary();
    let run = |p: ScanPolicy, tau: f64| {
        let r = run_chain(&t, &p, &[], 200_000, FiniteStart::Stationary, &RunOptions::new(5).tau(tau)).expect("valid run");
        r.simulated_cost / r.t as f64
    };
    let dg = run(ScanPolicy::Dg, 1.0);
    let mdg = run(ScanPolicy::Mdg { l: 3 }, 9.0);
    let rg = run(ScanPolicy::Rg { r: 0.25 }, 5.0);
    // per-step cost 1 or 5 with P(5) = 1/4: sd 4·√(3/16)
    let rg_se = 4.0 * (0.25f64 * 0.75).sqrt() / 200_000f64.sqrt();
    let ok = dg == 1.0 && mdg == 3.0 && (rg - 2.0).abs() < 3.0 * rg_se;
    (ok, format!("DG {}, MDG(3) {}, RG(0.25) {}", fmt_num(dg), fmt_num(mdg), fmt_num(rg)))
}

/// Chi-square statistic and p-value of visit counts against `π`.
pub fn chi_square_pvalue(target: &FiniteTarget, counts: &[u64]) -> (f64, f64) {
    let n: u64 = counts.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (g, &k) in counts.iter().enumerate() {
        let p = target.prob(g / target.n2(), g % target.n2());
        if p > 0.0 {
            let e = p * n as f64;
            stat += (k as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    let dist = ChiSquared::new((cells - 1) as f64).expect("positive degrees of freedom");
    (stat, 1.0 - dist.cdf(stat))
}

fn sampler_stationarity(opts: &ValidateOptions) -> (bool, String) {
    let mut targets = vec![binary()];
    targets.push(cases(21, 1, 4).remove(0).target);
    let policies = [ScanPolicy::Dg, ScanPolicy::Rg { r: 0.3 }, ScanPolicy::Mdg { l: 2 }, ScanPolicy::Rss];
    let jobs: Vec<(usize, ScanPolicy)> = (0..targets.len()).flat_map(|t| policies.map(|p| (t, p))).collect();
    let pvals = par::map(opts.exec, &jobs, |(ti, p)| {
        let t = &targets[*ti];
        let ro = RunOptions::new(21).count_states_every(50);
        let run = run_chain(t, p, &[], 1_000_000, FiniteStart::Stationary, &ro).expect("valid run");
        chi_square_pvalue(t, run.state_counts.as_deref().expect("counts requested")).1
    });
    let min = pvals.iter().copied().fold(1.0, f64::min);
    verdict(min > 0.001, "min p-value", min)
}

fn golden_configs() -> Vec<ExperimentConfig> {
    let mut random = ExperimentConfig::for_builtin("binary06");
    let joint = cases(22, 1, 3).remove(0).target.joint().clone();
    random.target = TargetSpec::Finite { joint: joint.row_iter().map(|r| r.iter().copied().collect()).collect() };
    let mut gauss = ExperimentConfig::for_builtin("gauss_example1");
    gauss.tau = 4.0;
    vec![ExperimentConfig::for_builtin("binary06"), random, gauss]
}

fn golden_simulation(cfg: &ExperimentConfig, exec: Execution) -> SimulationOutput {
    let sim = SimulationSpec { t: 400_000, seed: 31, replicates: 2, batch_len: Some(1000) };
    simulate(cfg, &sim, exec).expect("golden configs simulate")
}

fn sampler_batch_means(opts: &ValidateOptions) -> (bool, String) {
    let mut max = 0.0_f64;
    let mut triples = 0;
    for cfg in golden_configs() {
        let out = golden_simulation(&cfg, opts.exec);
        for p in &out.report.policies {
            for f in p.functions.values() {
                triples += 1;
                max = max.max(f.z.map_or(f64::INFINITY, f64::abs));
            }
        }
    }
    (max < 3.0, format!("max |z| {} over {triples} triples", fmt_num(max)))
}

fn sampler_rss(opts: &ValidateOptions) -> (bool, String) {
    let mut slack = f64::INFINITY;
    for cfg in golden_configs() {
        let out = golden_simulation(&cfg, opts.exec);
        let find = |name: &str| out.report.policies.iter().find(|p| p.policy.name() == name).expect("default policies");
        let (dg, rss) = (find("DG"), find("RSS"));
        for (f, d) in &dg.functions {
            let (d, s) = (d.batch_means.expect("estimate"), rss.functions[f].batch_means.expect("estimate"));
            let se = (d.se.powi(2) + 4.0 * s.se.powi(2)).sqrt();
            slack = slack.min(2.0 * s.v_hat + 3.0 * se - d.v_hat);
        }
    }
    verdict(slack >= 0.0, "min slack", slack)
}

fn sampler_gaussian_ratio(opts: &ValidateOptions) -> (bool, String) {
    let mut cfg = ExperimentConfig::for_builtin("gauss_example1");
    cfg.tau = 100.0;
    cfg.policies = vec![ScanPolicy::Dg, ScanPolicy::Rg { r: 0.1 }];
    let sim = SimulationSpec { t: 1_000_000, seed: 41, replicates: 2, batch_len: Some(1000) };
    let out = simulate(&cfg, &sim, opts.exec).expect("gaussian simulation");
    let v = |k: usize| out.report.policies[k].functions["example1"].v_adj_hat.expect("estimate");
    let ratio = v(1) / v(0);
    verdict(ratio < 0.3, "measured ratio", ratio)
}

fn reports_deterministic(opts: &ValidateOptions) -> (bool, String) {
    let cfg = ExperimentConfig::for_builtin("binary06");
    let sim = SimulationSpec { t: 50_000, seed: 7, replicates: 3, batch_len: None };
    let render = || {
        let out = simulate(&cfg, &sim, opts.exec).expect("binary06 simulates");
        canonical_json(&out.report).expect("serializable")
    };
    (render() == render(), "simulate.json compared byte for byte".into())
}

fn reports_provenance(_: &ValidateOptions) -> (bool, String) {
    let cfg = ExperimentConfig::for_builtin("binary06");
    let target = cfg.target.build().expect("builtin");
    let model = Model::build(&target, cfg.tolerances()).expect("builtin decomposes");
    let entries = variance_entries(&cfg, &model, &target).expect("variance entries");
    let ok = entries.iter().all(|e| {
        e.closed_form.provenance == "closed_form" && e.series_oracle.as_ref().is_some_and(|o| o.provenance == "series_oracle")
    });
    (ok, format!("{} entries", entries.len()))
}

/// Convenience wrapper used by the CLI.
pub fn run(filter: Option<&str>, opts: &ValidateOptions) -> Result<ValidationReport> {
    Ok(run_suite(filter, opts))
}
