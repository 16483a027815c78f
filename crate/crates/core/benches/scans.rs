use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qwalk::experiments::{oracle_deviation, run_fold_kind, step_evolution, ExperimentKind, ExperimentSpec, Fold};
use qwalk::fock::OracleOptions;
use qwalk::par::Exec;

const EXECS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn spec(n: usize, kind: ExperimentKind, exec: Exec) -> ExperimentSpec {
    ExperimentSpec { exec, ..ExperimentSpec::setup_defaults(n, kind) }
}

fn fold_scans(c: &mut Criterion) {
    let mut group = c.benchmark_group("scan");
    group.sample_size(20);
    for (fold, name, n) in [(Fold::Two, "two-fold", 11), (Fold::ThreePartial, "three-fold", 9)] {
        for (label, exec) in EXECS {
            let s = spec(n, ExperimentKind::TwoFold, exec);
            group.bench_with_input(BenchmarkId::new(name, label), &s, |b, s| {
                b.iter(|| run_fold_kind(black_box(s), fold).unwrap())
            });
        }
    }
    group.finish();
}

fn steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("step-evolution");
    group.sample_size(10);
    for (label, exec) in EXECS {
        let s = ExperimentSpec { step_fold: Fold::Two, ..spec(11, ExperimentKind::StepEvolution, exec) };
        group.bench_with_input(BenchmarkId::new("two-fold", label), &s, |b, s| {
            b.iter(|| step_evolution(black_box(s), 11).unwrap())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    let opts = OracleOptions { cutoff: 8, leak_bound: 1e-4, ..Default::default() };
    for (label, exec) in EXECS {
        let s = spec(2, ExperimentKind::TwoFold, exec);
        group.bench_with_input(BenchmarkId::new("two-fold-n2", label), &s, |b, s| {
            b.iter(|| oracle_deviation(black_box(s), Fold::Two, &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, fold_scans, steps, oracle);
criterion_main!(benches);
