use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use antibunch_core::{
    build_output_state, fit_ratio_model, simulate_run, BeamSplitter, DetectorModel, RunConfig,
    SourceSpec,
};

fn bench_spec() -> SourceSpec {
    SourceSpec {
        alpha: Complex64::new(0.1, 0.0),
        pair_amp: Complex64::new(0.009246, 0.0),
        phi: PI,
        overlap_v: 0.8053,
        ..SourceSpec::default()
    }
}

fn engine(c: &mut Criterion) {
    let spec = bench_spec();
    c.bench_function("build_output_state", |b| {
        b.iter(|| build_output_state(black_box(&spec)).unwrap())
    });

    let state = build_output_state(&spec).unwrap().state;
    let bs = BeamSplitter::fifty_fifty();
    c.bench_function("apply_beamsplitter_6_modes", |b| {
        b.iter(|| black_box(&state).apply_beamsplitter(0, 2, &bs).unwrap())
    });

    c.bench_function("output_g2", |b| {
        let out = build_output_state(&spec).unwrap();
        b.iter(|| black_box(&out).g2().unwrap())
    });
}

fn monte_carlo(c: &mut Criterion) {
    let spec = bench_spec();
    let detectors = DetectorModel::default();
    let cfg = RunConfig {
        duration: 0.05,
        seed: 7,
        ..RunConfig::default()
    };
    c.bench_function("simulate_run_3.8M_pulses", |b| {
        b.iter(|| simulate_run(black_box(&spec), &detectors, &cfg).unwrap())
    });
}

fn analysis(c: &mut Criterion) {
    c.bench_function("fit_ratio_model", |b| {
        b.iter(|| fit_ratio_model(black_box(0.365), black_box(3.343)).unwrap())
    });
}

criterion_group!(benches, engine, monte_carlo, analysis);
criterion_main!(benches);
