use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use stripgain::laplace::{forward, inverse, roc_options};
use stripgain::strip::default_grid;
use stripgain::{
    dominance_check, l2p_gain, line_norm_bisection, line_norm_grid, strip_norm, Line, LineMethod, SampledSignal,
    Strip,
};
use stripgain_bench::{integral_loop, resonant_chain, resonant_chain_ss};

fn norms(c: &mut Criterion) {
    let line = Line::new(0.25).unwrap();
    let mut group = c.benchmark_group("line_norm");
    for order in [2, 4, 8] {
        let g = resonant_chain(order);
        let ss = resonant_chain_ss(order);
        let grid = default_grid(&g);
        group.bench_with_input(BenchmarkId::new("bisection", order), &ss, |b, ss| {
            b.iter(|| line_norm_bisection(black_box(ss), &line, 1e-9).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("grid", order), &g, |b, g| {
            b.iter(|| line_norm_grid(black_box(g), &line, &grid).unwrap())
        });
    }
    group.finish();

    let strip = Strip::new(0.1, 0.4).unwrap();
    let g = resonant_chain(6);
    c.bench_function("strip_norm/bisection/6", |b| {
        b.iter(|| strip_norm(black_box(&g), &strip, LineMethod::Bisection { tol: 1e-9 }).unwrap())
    });
}

fn dominance(c: &mut Criterion) {
    let ss = integral_loop();
    let line = Line::new(1.0).unwrap();
    c.bench_function("dominance_check/3", |b| b.iter(|| dominance_check(black_box(&ss), 2, 1.0).unwrap()));
    c.bench_function("l2p_gain/certificate/3", |b| {
        b.iter(|| l2p_gain(black_box(&ss), 2, &line, 1e-9, true).unwrap())
    });
}

fn convolution(c: &mut Criterion) {
    let ss = resonant_chain_ss(4);
    let strip = Strip::new(0.0, 0.4).unwrap();
    let u = SampledSignal::from_fn(-20.0, 0.01, 4001, |t| (-t * t).exp()).unwrap();
    c.bench_function("convolve/4/4001", |b| {
        b.iter(|| stripgain::convolve(black_box(&ss), &strip, &u).unwrap())
    });
}

fn laplace(c: &mut Criterion) {
    let f = resonant_chain(6);
    c.bench_function("laplace/round_trip/6", |b| {
        b.iter(|| {
            for roc in roc_options(black_box(&f)) {
                forward(&inverse(&f, &roc).unwrap()).unwrap();
            }
        })
    });
}

criterion_group!(benches, norms, dominance, convolution, laplace);
criterion_main!(benches);
