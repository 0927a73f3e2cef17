use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tghar::{
    crps, fit, interval, loglik_e_model, loglik_t_model, predictive, FitConfig, IntervalKind,
    InverseMode, InverseTable, TghShape, Variant,
};
use tghar_bench::{grid, scenario, series};

fn inverse(c: &mut Criterion) {
    let shape = TghShape::new(0.3, 0.1).unwrap();
    let ts: Vec<f64> = grid(-3.5, 3.5, 1000)
        .into_iter()
        .map(|z| shape.tau(z))
        .collect();
    let table = InverseTable::build(shape, (-3.5, 3.5), 1e-6).unwrap();
    let mut g = c.benchmark_group("inverse_1000");
    g.bench_function("exact", |b| {
        b.iter(|| {
            ts.iter()
                .map(|&t| shape.tau_inverse(t).unwrap())
                .sum::<f64>()
        })
    });
    g.bench_function("table", |b| {
        b.iter(|| ts.iter().map(|&t| table.eval(t).unwrap()).sum::<f64>())
    });
    g.finish();

    let mut g = c.benchmark_group("table_build");
    for tol in [1e-5, 1e-6, 1e-8] {
        g.bench_with_input(BenchmarkId::from_parameter(tol), &tol, |b, &tol| {
            b.iter(|| {
                InverseTable::build(black_box(shape), (-3.5, 3.5), tol)
                    .unwrap()
                    .len()
            })
        });
    }
    g.finish();
}

fn likelihood(c: &mut Criterion) {
    let mut g = c.benchmark_group("loglik_n500");
    for variant in [Variant::TransformedLatent, Variant::TransformedError] {
        let spec = scenario(variant);
        let data = series(&spec, 500, 1);
        for (label, mode) in [
            ("table", InverseMode::default()),
            ("exact", InverseMode::Exact),
        ] {
            g.bench_function(format!("{variant}_{label}"), |b| {
                b.iter(|| match variant {
                    Variant::TransformedLatent => {
                        loglik_t_model(&spec, &data, mode).unwrap().value()
                    }
                    Variant::TransformedError => {
                        loglik_e_model(&spec, &data, 1, mode).unwrap().value()
                    }
                })
            });
        }
    }
    g.finish();
}

fn estimation(c: &mut Criterion) {
    let mut g = c.benchmark_group("fit_n500_p1");
    g.sample_size(10);
    for variant in [Variant::TransformedLatent, Variant::TransformedError] {
        let data = series(&scenario(variant), 500, 2);
        let config = FitConfig {
            multistart: 1,
            ..FitConfig::new(variant)
        };
        g.bench_function(variant.tag(), |b| {
            b.iter(|| fit(&data, 1, &config).unwrap().loglik)
        });
    }
    g.finish();
}

fn forecasting(c: &mut Criterion) {
    let spec = scenario(Variant::TransformedLatent);
    let data = series(&spec, 200, 3);
    let dist = predictive(&spec, &data, &[1.0, 0.0]).unwrap();
    let mut g = c.benchmark_group("forecast");
    g.bench_function("predictive", |b| {
        b.iter(|| predictive(&spec, black_box(&data), &[1.0, 0.0]).unwrap())
    });
    g.bench_function("min_length_interval", |b| {
        b.iter(|| interval(&dist, 0.95, IntervalKind::MinimumLength).unwrap())
    });
    g.bench_function("crps", |b| b.iter(|| crps(&dist, black_box(-1.0)).unwrap()));
    g.finish();
}

criterion_group!(benches, inverse, likelihood, estimation, forecasting);
criterion_main!(benches);
