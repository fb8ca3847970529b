use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use singlab::constructor::{mult_net, piecewise_smooth_net, square_net};
use singlab::estimators::{fit_kernel_ridge, fit_wavelet};
use singlab::funcgen::{gen_dataset, named_target};
use singlab::quad::halton;
use singlab::Activation;

fn networks(c: &mut Criterion) {
    let act = Activation::ReLU;
    c.bench_function("square_net m=10 build", |b| b.iter(|| square_net(black_box(10), act).unwrap()));
    let net = mult_net(8, 1.0, act).unwrap();
    let pts = halton(4096, 2);
    c.bench_function("mult_net m=8 eval 4096 points", |b| b.iter(|| net.eval_points(black_box(&pts), 2).unwrap()));
    let f = named_target("rectangle").unwrap();
    c.bench_function("piecewise_smooth_net rectangle build+measure", |b| b.iter(|| piecewise_smooth_net(&f, 0.1, 0.1, act, 4096).unwrap()));
}

fn estimators(c: &mut Criterion) {
    let f = named_target("rectangle").unwrap();
    let data = gen_dataset(&f, 1024, 0.1, 7, f.domain).unwrap();
    c.bench_function("wavelet fit n=1024 tau=3", |b| b.iter(|| fit_wavelet(black_box(&data), 3).unwrap()));
    c.bench_function("kernel ridge fit n=1024", |b| b.iter(|| fit_kernel_ridge(black_box(&data), 0.1, 1e-3).unwrap()));
}

criterion_group!(benches, networks, estimators);
criterion_main!(benches);
