use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tfseg::model::build_model_with;
use tfseg::search::run_grid_with;
use tfseg::{Execution, GridOptions, GridSpec};

#[path = "../tests/common/mod.rs"]
mod common;

use common::{corpus_of, reference_of, SyntheticLanguage};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn grid(c: &mut Criterion) {
    let lang = SyntheticLanguage::new(6, 50);
    let train = corpus_of(&lang.sample_lines(60, 100_000));
    let test_lines = lang.sample_count(61, 100);
    let test = corpus_of(&test_lines);
    let reference = reference_of(&test_lines);
    let spec = GridSpec::default();

    let mut group = c.benchmark_group("grid");
    group.sample_size(10);
    for (name, execution) in MODES {
        let options = GridOptions {
            execution,
            ..Default::default()
        };
        group.bench_with_input(BenchmarkId::new("default_1040", name), &options, |b, &o| {
            b.iter(|| run_grid_with(&train, &test, &reference, &spec, o).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("build_model");
    group.sample_size(10);
    for (name, execution) in MODES {
        group.bench_function(BenchmarkId::new("order_8", name), |b| {
            b.iter(|| build_model_with(black_box(&train), 8, execution).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, grid);
criterion_main!(benches);
