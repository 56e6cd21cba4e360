use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::{DMatrix, DVector};
use trust_funnel::driver::{run_benchmark, RunConfig};
use trust_funnel::par::{self, Execution};
use trust_funnel::phase1::Mode;
use trust_funnel::problems::corpus::all_mandatory;
use trust_funnel::problems::ProblemDescriptor;
use trust_funnel::subproblems::solve_trs;

fn executions() -> Vec<(&'static str, Execution)> {
    let mut out = vec![("sequential", Execution::Sequential)];
    if Execution::is_parallel_available() {
        out.push(("parallel", Execution::Parallel));
    }
    out
}

/// The whole corpus in both modes, with phase 2 capped so a sample stays short.
fn bench_corpus(c: &mut Criterion) {
    let manifest: Vec<ProblemDescriptor> = all_mandatory().iter().map(|p| p.descriptor()).collect();
    let config = RunConfig {
        phase2_max_iter: 2_000,
        ..RunConfig::default()
    };
    let mut group = c.benchmark_group("corpus_batch");
    group.sample_size(10);
    for (name, exec) in executions() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_benchmark(&manifest, &[Mode::Full, Mode::VOnly], &config, exec))
        });
    }
    group.finish();
}

/// Many small independent trust-region subproblems.
fn bench_trs(c: &mut Criterion) {
    let problems: Vec<(DVector<f64>, DMatrix<f64>)> = (0..512)
        .map(|i| {
            let n = 2 + i % 5;
            let h = DMatrix::from_fn(n, n, |r, s| ((r * 7 + s * 3 + i) as f64).sin());
            let g = DVector::from_fn(n, |r, _| ((r + i) as f64).cos());
            (g, &h + h.transpose())
        })
        .collect();
    let mut group = c.benchmark_group("trs_batch");
    for (name, exec) in executions() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| par::map(exec, &problems, |(g, h)| solve_trs(g, h, 1.0).map(|s| s.multiplier)))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_corpus, bench_trs);
criterion_main!(benches);
