use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use gibbslab::experiment::config::SimulationSpec;
use gibbslab::experiment::simulate::simulate;
use gibbslab::experiment::{random_cases, ExperimentConfig};
use gibbslab::par::{self, Execution};
use gibbslab::variance::{asymptotic_variance_series_oracle, ScanPolicy, DEFAULT_MAX_TERMS};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn oracle_sweep(c: &mut Criterion) {
    let cases = random_cases(3, 16, 8, 0.5, 0.95);
    let mut group = c.benchmark_group("oracle_sweep");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                par::map(exec, &cases, |case| {
                    let f = case.dec.basis_p1m().column(0).into_owned();
                    asymptotic_variance_series_oracle(&f, case.dec.p1(), case.dec.p2(), &ScanPolicy::Rg { r: 0.2 }, DEFAULT_MAX_TERMS)
                        .unwrap()
                        .value
                })
            })
        });
    }
    group.finish();
}

fn replicate_chains(c: &mut Criterion) {
    let cfg = ExperimentConfig::for_builtin("binary06");
    let sim = SimulationSpec { t: 100_000, seed: 1, replicates: 8, batch_len: None };
    let mut group = c.benchmark_group("replicate_chains");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| simulate(&cfg, &sim, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, oracle_sweep, replicate_chains);
criterion_main!(benches);
