//! Benchmarks for the hot paths of the analytical engine: the interference
//! kernel W(z), the Laguerre coefficient expansion, and the headline
//! spectral-efficiency evaluation.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use hetnet_core::network::interference_w;
use hetnet_core::performance::spectral_efficiency;
use hetnet_core::shadowing::ShadowingModel;
use hetnet_core::{laguerre_coeffs, KappaMuShadowedParams, NetworkConfig, NumericSettings, TierConfig};

fn fading() -> KappaMuShadowedParams {
    KappaMuShadowedParams::new(2.0, 2.0, 1.0, 1.0).unwrap()
}

fn network() -> NetworkConfig {
    NetworkConfig {
        tiers: vec![
            TierConfig {
                density: 1e-5,
                power: 1.0,
                fading: fading(),
                shadowing: ShadowingModel::Lognormal {
                    mu_db: 0.0,
                    sigma_db: 4.0,
                },
            },
            TierConfig {
                density: 5e-6,
                power: 0.01,
                fading: fading(),
                shadowing: ShadowingModel::Lognormal {
                    mu_db: 0.0,
                    sigma_db: 4.0,
                },
            },
        ],
        alpha: 4.0,
        tau: 1.0,
        noise_psd: 0.0,
        bandwidth: 1.0,
        allow_alpha_two: false,
    }
}

fn bench_w_kernel(c: &mut Criterion) {
    let p = fading();
    let s = NumericSettings::default();
    let mut group = c.benchmark_group("interference_w");
    for z in [0.1, 10.0, 1e4] {
        group.bench_function(format!("z={z}"), |b| {
            b.iter(|| interference_w(black_box(&p), black_box(z), 0.5, &s).unwrap().value)
        });
    }
    group.finish();
}

fn bench_laguerre_coeffs(c: &mut Criterion) {
    let p = fading();
    c.bench_function("laguerre_coeffs_n50", |b| {
        b.iter(|| laguerre_coeffs(black_box(&p), 50, 1e-10).unwrap())
    });
}

fn bench_rate(c: &mut Criterion) {
    let net = network();
    let s = NumericSettings::default();
    c.bench_function("spectral_efficiency_two_tier", |b| {
        b.iter(|| spectral_efficiency(black_box(&net), &s).unwrap().value)
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_w_kernel, bench_laguerre_coeffs, bench_rate
}
criterion_main!(benches);
