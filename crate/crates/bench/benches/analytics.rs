use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use trimlab_core::markov::{exact_pdf, gaussian_pdf};
use trimlab_core::writeamp::{wa_hu_trim, wa_xiang_trim, HuParams};
use trimlab_core::{lambert_w0, TrimParams};

fn lambert(c: &mut Criterion) {
    let xs: Vec<f64> = (1..=1000).map(|i| -0.36 * i as f64 / 1000.0).collect();
    c.bench_function("lambert_w0_1000", |b| {
        b.iter(|| {
            xs.iter()
                .map(|&x| lambert_w0(black_box(x)).unwrap())
                .sum::<f64>()
        })
    });
    c.bench_function("xiang_trim", |b| {
        b.iter(|| {
            wa_xiang_trim(black_box(1.0 / 9.0), black_box(0.1))
                .unwrap()
                .value
        })
    });
}

fn pdfs(c: &mut Criterion) {
    let mut group = c.benchmark_group("pdf");
    for u in [1_000, 100_000] {
        let params = TrimParams::new(u, 0.4).unwrap();
        group.bench_function(format!("exact_u{u}"), |b| {
            b.iter(|| exact_pdf(black_box(&params)))
        });
        group.bench_function(format!("gaussian_u{u}"), |b| {
            b.iter(|| gaussian_pdf(black_box(&params), 0.5).unwrap())
        });
    }
    group.finish();
}

fn hu(c: &mut Criterion) {
    let params = HuParams::greedy(65536, 58982.0, 64, 8);
    c.bench_function("hu_trim_desk", |b| {
        b.iter(|| wa_hu_trim(black_box(&params), 0.1).unwrap().value)
    });
}

criterion_group!(benches, lambert, pdfs, hu);
criterion_main!(benches);
