use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use urlscope_bench::{github_bundle, github_snapshot, synthetic_page};
use urlscope_core::eval::{compute_metrics, ConfusionCounts};
use urlscope_core::llm::Backend;
use urlscope_core::pipeline::{analyze_snapshot, static_features, AnalyzeConfig};
use urlscope_core::prompt::{PromptBuilder, DEFAULT_BUDGET_TOKENS};
use urlscope_core::sandbox::engine::{execute_page, SandboxConfig};

fn metrics(c: &mut Criterion) {
    c.bench_function("compute_metrics", |b| b.iter(|| compute_metrics(black_box(ConfusionCounts::new(94, 10, 90, 6)))));
}

fn static_analysis(c: &mut Criterion) {
    let snap = github_snapshot();
    let cfg = Default::default();
    c.bench_function("static_features/github", |b| b.iter(|| static_features(black_box(&snap), &cfg)));
}

fn prompts(c: &mut Criterion) {
    let bundle = github_bundle();
    let builder = PromptBuilder::new(DEFAULT_BUDGET_TOKENS);
    c.bench_function("build_all/github", |b| b.iter(|| builder.build_all(black_box(&bundle))));
}

fn sandbox(c: &mut Criterion) {
    let page = synthetic_page("mal-keylogger");
    let cfg = SandboxConfig::default();
    c.bench_function("execute_page/keylogger", |b| b.iter(|| execute_page(black_box(&page), &cfg).unwrap()));
}

fn end_to_end(c: &mut Criterion) {
    let page = synthetic_page("mal-credential-form");
    let backend = Backend::new(urlscope_core::llm::BackendDescriptor::mock()).unwrap();
    let cfg = AnalyzeConfig::default();
    let mut group = c.benchmark_group("analyze");
    group.sample_size(20);
    group.bench_function("credential-form/mock", |b| b.iter(|| analyze_snapshot(black_box(&page), &backend, &cfg).unwrap()));
    group.finish();
}

criterion_group!(benches, metrics, static_analysis, prompts, sandbox, end_to_end);
criterion_main!(benches);
