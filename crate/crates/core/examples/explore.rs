//! Scratch exploration driver used while calibrating the acceptance suite.
//! Not part of the library surface; run with `cargo run --example explore`.

use hetnet_core::fading::{laguerre_coeffs, pdf_series, KappaMuShadowedParams};
use hetnet_core::performance::spectral_efficiency;
use hetnet_core::shadowing::ShadowingModel;
use hetnet_core::{NetworkConfig, NumericSettings, TierConfig};

fn two_tier(lambda1: f64, kappa: f64, mu: f64, m: f64, noise: f64) -> NetworkConfig {
    let fading = KappaMuShadowedParams::new(kappa, mu, m, 1.0).unwrap();
    let sh = ShadowingModel::Lognormal {
        mu_db: 0.0,
        sigma_db: 4.0,
    };
    NetworkConfig {
        tiers: vec![
            TierConfig {
                density: lambda1,
                power: 1.0,
                fading: fading.clone(),
                shadowing: sh.clone(),
            },
            TierConfig {
                density: lambda1 / 2.0,
                power: 0.01,
                fading,
                shadowing: sh,
            },
        ],
        alpha: 4.0,
        tau: 1.0,
        noise_psd: noise,
        bandwidth: 1.0,
        allow_alpha_two: false,
    }
}

// partial sums of the Laguerre pdf series, then Wynn epsilon extrapolation
fn pdf_eps(c_series: &[f64], mu: f64, x: f64, use_last: usize) -> f64 {
    let weight = ((mu - 1.0) * x.ln() - x).exp();
    let mut sums = Vec::with_capacity(c_series.len());
    let mut acc = 0.0f64;
    let mut l_prev = 1.0f64;
    let mut l_curr = mu - x;
    let mut ln_fact = 0.0f64;
    for (n, &c) in c_series.iter().enumerate() {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        let l_n = match n {
            0 => 1.0,
            1 => l_curr,
            _ => {
                let nf = (n - 1) as f64;
                let next = ((2.0 * nf + mu - x) * l_curr - (nf + mu - 1.0) * l_prev) / (nf + 1.0);
                l_prev = l_curr;
                l_curr = next;
                next
            }
        };
        let scale = (ln_fact - ln_gamma_local(n as f64 + mu)).exp();
        acc += c * scale * l_n;
        sums.push(acc);
    }
    let tail: Vec<f64> = sums[sums.len().saturating_sub(use_last)..].to_vec();
    weight * wynn_eps(&tail)
}

fn ln_gamma_local(x: f64) -> f64 {
    // Stirling with correction via the recurrence; adequate for x >= 1 here
    let mut x = x;
    let mut shift = 0.0;
    while x < 8.0 {
        shift -= x.ln();
        x += 1.0;
    }
    shift
        + 0.5 * ((2.0 * std::f64::consts::PI).ln() - x.ln())
        + x * (x.ln() - 1.0)
        + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x.powi(3))
        + 1.0 / (1260.0 * x.powi(5))
}

fn wynn_eps(s: &[f64]) -> f64 {
    let n = s.len();
    if n == 0 {
        return f64::NAN;
    }
    let mut e_prev: Vec<f64> = vec![0.0; n + 1]; // epsilon_{-1}
    let mut e_curr: Vec<f64> = s.to_vec(); // epsilon_0
    let mut best = *s.last().unwrap();
    let mut col = 0usize;
    while e_curr.len() > 1 {
        let mut e_next = Vec::with_capacity(e_curr.len() - 1);
        for i in 0..e_curr.len() - 1 {
            let d = e_curr[i + 1] - e_curr[i];
            if d == 0.0 {
                e_next.push(e_prev[i + 1]);
            } else {
                e_next.push(e_prev[i + 1] + 1.0 / d);
            }
        }
        if e_next.iter().any(|v| !v.is_finite()) {
            break;
        }
        col += 1;
        if col % 2 == 0 {
            best = *e_next.last().unwrap();
        }
        e_prev = e_curr;
        e_curr = e_next;
    }
    best
}

fn grid_part() {
    let s: NumericSettings = NumericSettings::default();
    let _ = s;
    println!("== criterion-1 grid: series behavior at order<=50 ==");
    for &kappa in &[0.5, 2.0, 6.0] {
        for &mu in &[0.5, 1.5, 3.0] {
            for &m in &[0.5, 1.0, 10.0] {
                let p = KappaMuShadowedParams::new(kappa, mu, m, 1.0).unwrap();
                // expand the rescaled variable c·h whose θ's straddle 1:
                // c = 2/(θ1+θ2) is the minimax scale for max(|u1|,|u2|)
                let c0 = 2.0 / (p.theta1 + p.theta2);
                let mut best: Option<(f64, hetnet_core::fading::LaguerreCoeffs)> = None;
                for frac in [1.0, 0.9, 1.1, 0.8, 1.2, 0.7] {
                    let cs = c0 * frac;
                    let ps = KappaMuShadowedParams::new(kappa, mu, m, cs).unwrap();
                    let mut got = None;
                    for &tol in &[1e-10, 1e-8, 1e-6, 1e-4, 1e-3] {
                        let co = laguerre_coeffs(&ps, 50, tol).unwrap();
                        if co.converged {
                            got = Some(co);
                            break;
                        }
                    }
                    if let Some(co) = got {
                        if best
                            .as_ref()
                            .map(|(_, b)| co.tail_estimate < b.tail_estimate)
                            .unwrap_or(true)
                        {
                            best = Some((cs, co));
                        }
                    }
                }
                match best {
                    None => {
                        println!("k={kappa} mu={mu} m={m}: NOT CONVERGED at any scale");
                    }
                    Some((cs, co)) => {
                        let ps = KappaMuShadowedParams::new(kappa, mu, m, cs).unwrap();
                        // sup error over a wide x range
                        let x_hi = 1.0 + 8.0 * (p.moment(2.0).unwrap() - 1.0).abs().sqrt();
                        let mut sup = 0.0f64;
                        for i in 1..=240 {
                            let x = x_hi * i as f64 / 240.0;
                            let e = p.pdf_exact(x).unwrap();
                            let a = cs * pdf_series(&co, &ps, cs * x).unwrap();
                            sup = sup.max((e - a).abs());
                        }
                        println!(
                            "k={kappa} mu={mu} m={m}: scale={cs:.3} order={} tail={:.2e} sup={:.3e}",
                            co.order, co.tail_estimate, sup
                        );
                    }
                }
            }
        }
    }
}

fn trend_part() {
    let s = NumericSettings::default();
    println!("== criterion-7 trends (interference-limited two-tier) ==");
    for &m in &[0.5, 1.0, 10.0] {
        let rates: Vec<f64> = [0.5, 2.0, 6.0]
            .iter()
            .map(|&k| {
                spectral_efficiency(&two_tier(1e-5, k, 1.5, m, 0.0), &s)
                    .unwrap()
                    .value
            })
            .collect();
        println!("rate vs kappa (mu=1.5, m={m}): {rates:?}");
    }
    for &m in &[0.5, 1.0, 10.0] {
        let rates: Vec<f64> = [0.5, 1.5, 3.0]
            .iter()
            .map(|&mu| {
                spectral_efficiency(&two_tier(1e-5, 2.0, mu, m, 0.0), &s)
                    .unwrap()
                    .value
            })
            .collect();
        println!("rate vs mu (kappa=2, m={m}): {rates:?}");
    }
    for &k in &[0.5, 2.0, 6.0] {
        let rates: Vec<f64> = [0.5, 1.0, 10.0]
            .iter()
            .map(|&m| {
                spectral_efficiency(&two_tier(1e-5, k, 1.5, m, 0.0), &s)
                    .unwrap()
                    .value
            })
            .collect();
        println!("rate vs m (kappa={k}, mu=1.5): {rates:?}");
    }
}

fn plateau_part() {
    let s = NumericSettings::default();
    println!("== criterion-7 plateau: rate vs lambda1 at two noise levels ==");
    for &noise in &[1e-9, 1e-7] {
        let rates: Vec<(f64, f64)> = [1e-5, 1e-4, 1e-3, 1e-2, 1e-1]
            .iter()
            .map(|&l| {
                (
                    l,
                    spectral_efficiency(&two_tier(l, 2.0, 1.0, 1.0, noise), &s)
                        .unwrap()
                        .value,
                )
            })
            .collect();
        println!("noise={noise:.0e}: {rates:?}");
    }
}

fn spot_part() {
    let s = NumericSettings::default();
    println!("== criterion-8 operating points: IL rate candidates at kappa=6 ==");
    for &(mu, m) in &[(1.0, 1e7), (1.0, 10.0), (2.0, 1e7), (1.0, 3.0), (2.0, 10.0)] {
        let r = spectral_efficiency(&two_tier(1e-2, 6.0, mu, m, 0.0), &s)
            .unwrap()
            .value;
        println!("IL mu={mu} m={m}: rate={r:.4} proxy={:.4}", r.exp() - 1.0);
    }
    // bisect noise so that rate(lambda1=1e-4) = ln(1.2)
    let target = 1.2f64.ln();
    let (mu, m) = (1.0, 1e7);
    let f = |ln_n: f64| {
        spectral_efficiency(&two_tier(1e-4, 6.0, mu, m, ln_n.exp()), &s)
            .unwrap()
            .value
            - target
    };
    let (mut lo, mut hi) = (-40.0f64, -5.0f64);
    assert!(f(lo) > 0.0 && f(hi) < 0.0, "bracket: f(lo)={} f(hi)={}", f(lo), f(hi));
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let noise = (0.5 * (lo + hi)).exp();
    let r_sparse = spectral_efficiency(&two_tier(1e-4, 6.0, mu, m, noise), &s)
        .unwrap()
        .value;
    let r_dense = spectral_efficiency(&two_tier(1e-2, 6.0, mu, m, noise), &s)
        .unwrap()
        .value;
    println!(
        "calibrated noise={noise:.6e}: sparse rate={r_sparse:.4} proxy={:.4}; dense rate={r_dense:.4} proxy={:.4}",
        r_sparse.exp() - 1.0,
        r_dense.exp() - 1.0
    );
}

fn hard_part() {
    println!("== hard corners: scale search + Wynn-eps at order 50 ==");
    for &(kappa, mu, m) in &[
        (2.0, 3.0, 0.5),
        (6.0, 1.5, 0.5),
        (6.0, 3.0, 0.5),
        (6.0, 3.0, 1.0),
        (6.0, 1.5, 1.0),
    ] {
        let p = KappaMuShadowedParams::new(kappa, mu, m, 1.0).unwrap();
        let c0 = 2.0 / (p.theta1 + p.theta2);
        let x_hi = 1.0 + 8.0 * (p.moment(2.0).unwrap() - 1.0).abs().sqrt();
        let mut best = (f64::INFINITY, 0.0, 0usize);
        for i in 0..24 {
            let cs = c0 * (0.55 + 0.05 * i as f64);
            let ps = match KappaMuShadowedParams::new(kappa, mu, m, cs) {
                Ok(ps) => ps,
                Err(_) => continue,
            };
            let co = laguerre_coeffs(&ps, 50, 1e-14).unwrap();
            for &use_last in &[12usize, 20, 30] {
                let mut sup = 0.0f64;
                for j in 1..=240 {
                    let x = x_hi * j as f64 / 240.0;
                    let e = p.pdf_exact(x).unwrap();
                    let a = cs * pdf_eps(&co.c_series, mu, cs * x, use_last);
                    sup = sup.max((e - a).abs());
                }
                if sup < best.0 {
                    best = (sup, cs, use_last);
                }
            }
        }
        println!(
            "k={kappa} mu={mu} m={m}: best sup={:.3e} at scale={:.3} use_last={}",
            best.0, best.1, best.2
        );
    }
}

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "all".into());
    if which == "all" || which == "grid" {
        grid_part();
    }
    if which == "all" || which == "hard" {
        hard_part();
    }
    if which == "all" || which == "trend" {
        trend_part();
    }
    if which == "all" || which == "plateau" {
        plateau_part();
    }
    if which == "all" || which == "spot" {
        spot_part();
    }
}
