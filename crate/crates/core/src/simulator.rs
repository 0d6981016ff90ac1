//! Monte Carlo point-process simulator: an independent oracle that drops
//! Poisson base stations in a disc, applies shadowing and κ-μ shadowed
//! fading explicitly, and measures every metric from raw SINR samples.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::NetworkConfig;

/// How large-scale shadowing enters the dropped network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    /// Sample a shadowing factor χ per base station.
    ExplicitShadowing,
    /// Scale each tier's density by E[χ^δ] and set χ ≡ 1 (the displacement
    /// theorem's equivalent network).
    EquivalentDensity,
}

/// Optional conditioning on the serving link.
#[derive(Debug, Clone, Copy)]
pub struct DistanceBin {
    pub tier: usize,
    pub lo: f64,
    pub hi: f64,
}

/// Simulation run description.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub region_radius: f64,
    pub drops: u64,
    pub seed: u64,
    pub conditioning: Option<DistanceBin>,
    pub mode: SimMode,
}

/// One simulated downlink snapshot seen from the origin.
#[derive(Debug, Clone, Copy)]
pub struct DropResult {
    pub sinr: f64,
    pub serving_tier: usize,
    pub serving_distance: f64,
    /// Aggregate interference power (same units as received powers).
    pub interference: f64,
}

/// Per-tier density actually dropped in the given mode.
fn drop_density(net: &NetworkConfig, j: usize, mode: SimMode) -> Result<f64> {
    match mode {
        SimMode::ExplicitShadowing => Ok(net.tiers[j].density),
        SimMode::EquivalentDensity => net.equivalent_density(j),
    }
}

impl SimConfig {
    /// Radius giving ~2000 expected base stations, checked against the
    /// truncation-bias bound.
    pub fn auto(net: &NetworkConfig, drops: u64, seed: u64, mode: SimMode) -> Result<SimConfig> {
        net.validate()?;
        let mut total = 0.0;
        for j in 0..net.tiers.len() {
            total += drop_density(net, j, mode)?;
        }
        let mut radius = (2000.0 / (std::f64::consts::PI * total)).sqrt();
        // grow if the 2000-point disc still violates the bias bound
        for _ in 0..64 {
            let cfg = SimConfig {
                region_radius: radius,
                drops,
                seed,
                conditioning: None,
                mode,
            };
            match cfg.validate(net) {
                Ok(()) => return Ok(cfg),
                Err(_) => radius *= 1.3,
            }
        }
        Err(Error::domain(
            "simulator: could not satisfy the truncation-bias bound (alpha too close to 2?)",
        ))
    }

    /// Checks the region-truncation invariant: the analytically expected
    /// out-of-region interference must stay below 0.1% of the in-region
    /// mean (with the exclusion zone taken at the median serving distance).
    pub fn validate(&self, net: &NetworkConfig) -> Result<()> {
        net.validate()?;
        if !(self.region_radius > 0.0) || self.drops == 0 {
            return Err(Error::domain(
                "simulator: need region_radius > 0 and drops > 0",
            ));
        }
        let alpha = net.alpha;
        if alpha <= 2.05 {
            return Err(Error::domain(
                "simulator: truncation bias unbounded for alpha <= 2.05 (far field not integrable)",
            ));
        }
        // median distance to the nearest point of the pooled dropped process
        let mut total = 0.0;
        for j in 0..net.tiers.len() {
            total += drop_density(net, j, self.mode)?;
        }
        let r_med = (std::f64::consts::LN_2 / (std::f64::consts::PI * total)).sqrt();
        let r = self.region_radius;
        if r <= 2.0 * r_med {
            return Err(Error::domain(format!(
                "simulator: region radius {r} too small vs median serving distance {r_med}"
            )));
        }
        // E[I over an annulus (a, b)] = Σ_j 2πλ'_j E[χ_j] P_j ∫_a^b r^{1−α} dr
        let annulus = |a: f64, b: f64| -> Result<f64> {
            let mut s = 0.0;
            for j in 0..net.tiers.len() {
                let echi = match self.mode {
                    SimMode::ExplicitShadowing => net.tiers[j].shadowing.moment(1.0)?,
                    SimMode::EquivalentDensity => 1.0,
                };
                s += 2.0 * std::f64::consts::PI
                    * drop_density(net, j, self.mode)?
                    * echi
                    * net.tiers[j].power
                    * (a.powf(2.0 - alpha) - b.powf(2.0 - alpha))
                    / (alpha - 2.0);
            }
            Ok(s)
        };
        let inside = annulus(r_med, r)?;
        let outside = annulus(r, f64::INFINITY)?;
        if outside > 1e-3 * inside {
            return Err(Error::domain(format!(
                "simulator: truncation bias {:.2e} exceeds 0.1% of in-region mean {:.2e}",
                outside, inside
            )));
        }
        Ok(())
    }
}

/// One Poisson drop: base stations per tier, association by long-term power
/// (no fading), per-link fading, SINR per the system model.
pub fn simulate_drop<R: Rng + ?Sized>(
    net: &NetworkConfig,
    sim: &SimConfig,
    rng: &mut R,
) -> Result<DropResult> {
    let mut redraws = 0u64;
    simulate_drop_counted(net, sim, rng, &mut redraws)
}

fn simulate_drop_counted<R: Rng + ?Sized>(
    net: &NetworkConfig,
    sim: &SimConfig,
    rng: &mut R,
    redraws: &mut u64,
) -> Result<DropResult> {
    use rand_distr::{Distribution, Poisson};
    let area = std::f64::consts::PI * sim.region_radius * sim.region_radius;
    let alpha = net.alpha;
    'drop: loop {
        // (tier, distance, long-term received power P_j χ r^{−α})
        let mut pts: Vec<(usize, f64, f64)> = Vec::with_capacity(2048);
        for j in 0..net.tiers.len() {
            let lam = drop_density(net, j, sim.mode)? * area;
            let n = if lam > 1e-12 {
                Poisson::new(lam)
                    .map_err(|e| Error::domain(format!("poisson: {e:?}")))?
                    .sample(rng) as usize
            } else {
                0
            };
            for _ in 0..n {
                let r = sim.region_radius * rng.gen::<f64>().sqrt();
                let chi = match sim.mode {
                    SimMode::ExplicitShadowing => net.tiers[j].shadowing.sample(rng),
                    SimMode::EquivalentDensity => 1.0,
                };
                let q = net.tiers[j].power * chi * r.powf(-alpha);
                pts.push((j, r, q));
            }
        }
        if pts.is_empty() {
            *redraws += 1;
            if *redraws > 10_000 {
                return Err(Error::domain(
                    "simulator: empty region in 10000 consecutive draws",
                ));
            }
            continue 'drop;
        }
        // association: strongest long-term power, Eq.-style (no fading)
        let mut best = 0usize;
        for (i, p) in pts.iter().enumerate() {
            if p.2 > pts[best].2 {
                best = i;
            }
        }
        let (serving_tier, r_star, q_star) = pts[best];
        // exclusion-zone invariant of the equivalent network
        if sim.mode == SimMode::EquivalentDensity {
            let p_star = net.tiers[serving_tier].power;
            for &(j, r, _) in pts.iter() {
                let bound = (net.tiers[j].power / p_star).powf(1.0 / alpha) * r_star;
                if r < bound * (1.0 - 1e-9) {
                    return Err(Error::domain(
                        "simulator: exclusion-zone invariant violated",
                    ));
                }
            }
        }
        let mut interference = 0.0f64;
        let mut comp = 0.0f64;
        for (i, &(j, _, q)) in pts.iter().enumerate() {
            if i == best {
                continue;
            }
            let h = net.tiers[j].fading.sample(rng);
            let y = q * h - comp;
            let t = interference + y;
            comp = (t - interference) - y;
            interference = t;
        }
        let h_star = net.tiers[serving_tier].fading.sample(rng);
        let signal = q_star * h_star;
        let sinr = signal / (net.noise() + interference);
        return Ok(DropResult {
            sinr,
            serving_tier,
            serving_distance: r_star,
            interference,
        });
    }
}

/// Quantity estimated from the drop stream.
#[derive(Debug, Clone, Copy)]
pub enum SimMetric {
    /// E[ln(1 + SINR)]
    Rate,
    /// P(SINR < T)
    OutageAt(f64),
    /// E[SINR^r] (heavy-tailed; trimmed mean reported alongside)
    MomentOf(f64),
    /// E[e^{−s Î}], Î the interference normalized by the serving tier power
    LaplaceAt(f64),
}

/// Estimate with normal-approximation confidence interval.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub mean: f64,
    /// Half-width of the 95% confidence interval.
    pub ci_half_width: f64,
    /// Number of drops entering the estimate (after conditioning).
    pub n_effective: u64,
    /// 0.1% top-trimmed mean (MomentOf only; biased low by the trimming —
    /// see the field docs on `warning`).
    pub trimmed_mean: Option<f64>,
    pub empty_region_redraws: u64,
    pub warning: Option<String>,
}

const CHUNK: u64 = 4096;

/// Stream-split rule: chunk c of the drop stream uses the master seed with
/// ChaCha stream index c, so estimates are independent of how chunks are
/// distributed over threads.
fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

struct ChunkStats {
    sum: f64,
    sum_sq: f64,
    n: u64,
    redraws: u64,
    max_abs: f64,
    values: Vec<f64>,
}

/// Monte Carlo estimate of a metric with deterministic chunked streams.
pub fn estimate(net: &NetworkConfig, sim: &SimConfig, metric: SimMetric) -> Result<Estimate> {
    sim.validate(net)?;
    let keep_values = matches!(metric, SimMetric::MomentOf(_));
    let n_chunks = sim.drops.div_ceil(CHUNK);
    let chunks: Result<Vec<ChunkStats>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(sim.seed, c);
            let todo = CHUNK.min(sim.drops - c * CHUNK);
            let mut st = ChunkStats {
                sum: 0.0,
                sum_sq: 0.0,
                n: 0,
                redraws: 0,
                max_abs: 0.0,
                values: Vec::new(),
            };
            let mut comp = 0.0f64;
            for _ in 0..todo {
                let d = simulate_drop_counted(net, sim, &mut rng, &mut st.redraws)?;
                if let Some(bin) = &sim.conditioning {
                    if d.serving_tier != bin.tier
                        || d.serving_distance < bin.lo
                        || d.serving_distance >= bin.hi
                    {
                        continue;
                    }
                }
                let x = match metric {
                    SimMetric::Rate => d.sinr.ln_1p(),
                    SimMetric::OutageAt(t) => {
                        if d.sinr < t {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    SimMetric::MomentOf(r) => d.sinr.powf(r),
                    SimMetric::LaplaceAt(s) => {
                        (-s * d.interference / net.tiers[d.serving_tier].power).exp()
                    }
                };
                let y = x - comp;
                let t = st.sum + y;
                comp = (t - st.sum) - y;
                st.sum = t;
                st.sum_sq += x * x;
                st.max_abs = st.max_abs.max(x.abs());
                st.n += 1;
                if keep_values {
                    st.values.push(x);
                }
            }
            Ok(st)
        })
        .collect();
    let chunks = chunks?;
    // order-fixed reduction (chunk index order) with compensated summation
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut sum_sq = 0.0f64;
    let mut n = 0u64;
    let mut redraws = 0u64;
    let mut max_abs = 0.0f64;
    let mut values = Vec::new();
    for st in &chunks {
        let y = st.sum - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        sum_sq += st.sum_sq;
        n += st.n;
        redraws += st.redraws;
        max_abs = max_abs.max(st.max_abs);
    }
    if keep_values {
        for st in chunks {
            values.extend(st.values);
        }
    }
    if n == 0 {
        return Err(Error::domain(
            "simulator: no drops satisfied the conditioning bin",
        ));
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0) * nf / (nf - 1.0).max(1.0);
    let ci = 1.96 * (var / nf).sqrt();
    let mut warning = None;
    if max_abs * max_abs > 0.1 * sum_sq && n > 1000 {
        warning = Some(
            "heavy-tailed samples: a single drop dominates the variance; \
             the normal-approximation CI is unreliable"
                .into(),
        );
    }
    let trimmed_mean = if keep_values {
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let cut = ((values.len() as f64) * 0.999).floor() as usize;
        let kept = &values[..cut.max(1)];
        Some(kept.iter().sum::<f64>() / kept.len() as f64)
    } else {
        None
    };
    Ok(Estimate {
        mean,
        ci_half_width: ci,
        n_effective: n,
        trimmed_mean,
        empty_region_redraws: redraws,
        warning,
    })
}

/// Runs the drop stream sequentially, invoking `sink` per drop (for NDJSON
/// logging and custom statistics). Uses the same chunked streams as
/// `estimate`, so logs line up with estimates for the same seed.
pub fn run_drops(
    net: &NetworkConfig,
    sim: &SimConfig,
    mut sink: impl FnMut(&DropResult),
) -> Result<u64> {
    sim.validate(net)?;
    let n_chunks = sim.drops.div_ceil(CHUNK);
    let mut redraws = 0u64;
    for c in 0..n_chunks {
        let mut rng = chunk_rng(sim.seed, c);
        let todo = CHUNK.min(sim.drops - c * CHUNK);
        for _ in 0..todo {
            let d = simulate_drop_counted(net, sim, &mut rng, &mut redraws)?;
            sink(&d);
        }
    }
    Ok(redraws)
}

/// Writes one drop as a newline-delimited record with 17 significant digits.
pub fn write_drop_record<W: Write>(w: &mut W, d: &DropResult) -> std::io::Result<()> {
    writeln!(
        w,
        "{{\"tier\":{},\"distance\":{:.16e},\"sinr\":{:.16e},\"interference\":{:.16e}}}",
        d.serving_tier, d.serving_distance, d.sinr, d.interference
    )
}

/// Two-sample Kolmogorov–Smirnov statistic (inputs are sorted in place).
pub fn ks_statistic(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < na && j < nb {
        let x = a[i].min(b[j]);
        while i < na && a[i] <= x {
            i += 1;
        }
        while j < nb && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    d
}

/// Critical value of the two-sample KS test at significance `alpha_level`.
pub fn ks_critical(na: usize, nb: usize, alpha_level: f64) -> f64 {
    let c = (-0.5 * (alpha_level / 2.0).ln()).sqrt();
    c * ((na + nb) as f64 / (na as f64 * nb as f64)).sqrt()
}

/// Serving-tier fractions over the drop stream (for association checks).
pub fn association_fractions(net: &NetworkConfig, sim: &SimConfig) -> Result<Vec<f64>> {
    let mut counts = vec![0u64; net.tiers.len()];
    let mut total = 0u64;
    run_drops(net, sim, |d| {
        counts[d.serving_tier] += 1;
        total += 1;
    })?;
    Ok(counts
        .iter()
        .map(|&c| c as f64 / total.max(1) as f64)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fading::{from_named_model, NamedModel};
    use crate::network::TierConfig;
    use crate::shadowing::ShadowingModel;

    fn rayleigh_net(noise_psd: f64) -> NetworkConfig {
        NetworkConfig {
            tiers: vec![TierConfig {
                density: 1e-4,
                power: 1.0,
                fading: from_named_model(NamedModel::Rayleigh, 1.0).unwrap(),
                shadowing: ShadowingModel::None,
            }],
            alpha: 4.0,
            tau: 1.0,
            noise_psd,
            bandwidth: 1.0,
            allow_alpha_two: false,
        }
    }

    fn two_tier_lognormal() -> NetworkConfig {
        let fading = crate::fading::KappaMuShadowedParams::new(2.0, 1.0, 3.0, 1.0).unwrap();
        let shadow = ShadowingModel::Lognormal {
            mu_db: 0.0,
            sigma_db: 4.0,
        };
        NetworkConfig {
            tiers: vec![
                TierConfig {
                    density: 1e-4,
                    power: 1.0,
                    fading: fading.clone(),
                    shadowing: shadow.clone(),
                },
                TierConfig {
                    density: 5e-5,
                    power: 0.01,
                    fading,
                    shadowing: shadow,
                },
            ],
            alpha: 4.0,
            tau: 1.0,
            noise_psd: 0.0,
            bandwidth: 1.0,
            allow_alpha_two: false,
        }
    }

    #[test]
    fn deterministic_link_sinr() {
        // single BS at distance 1 with h = χ = 1 and noise N: sinr = 1/N
        let net = rayleigh_net(1e-7);
        let d = DropResult {
            sinr: 1.0 / net.noise(),
            serving_tier: 0,
            serving_distance: 1.0,
            interference: 0.0,
        };
        assert_eq!(d.sinr, 1.0 / net.noise());
    }

    #[test]
    fn auto_radius_satisfies_bias_bound() {
        let net = rayleigh_net(0.0);
        let sim = SimConfig::auto(&net, 100, 7, SimMode::ExplicitShadowing).unwrap();
        sim.validate(&net).unwrap();
        let expected_pts =
            std::f64::consts::PI * sim.region_radius * sim.region_radius * 1e-4;
        assert!(
            (expected_pts - 2000.0).abs() < 1.0 || expected_pts > 2000.0,
            "expected points {expected_pts}"
        );
    }

    #[test]
    fn determinism_same_seed() {
        let net = rayleigh_net(0.0);
        let mut sim = SimConfig::auto(&net, 2000, 42, SimMode::EquivalentDensity).unwrap();
        sim.region_radius *= 0.75; // smaller region for speed; bias bound still holds
        sim.validate(&net).unwrap();
        let a = estimate(&net, &sim, SimMetric::Rate).unwrap();
        let b = estimate(&net, &sim, SimMetric::Rate).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.ci_half_width.to_bits(), b.ci_half_width.to_bits());
    }

    #[test]
    fn outage_at_huge_threshold_is_one() {
        let net = rayleigh_net(0.0);
        let mut sim = SimConfig::auto(&net, 500, 3, SimMode::EquivalentDensity).unwrap();
        sim.region_radius *= 0.75;
        let e = estimate(&net, &sim, SimMetric::OutageAt(1e30)).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.ci_half_width, 0.0);
    }

    #[test]
    fn association_fractions_match_analytic() {
        let net = two_tier_lognormal();
        let mut sim = SimConfig::auto(&net, 4000, 11, SimMode::ExplicitShadowing).unwrap();
        sim.region_radius *= 0.6;
        sim.validate(&net).unwrap();
        let frac = association_fractions(&net, &sim).unwrap();
        for k in 0..2 {
            let p = crate::network::association_probability(&net, k).unwrap();
            let sigma = (p * (1.0 - p) / 4000.0).sqrt();
            assert!(
                (frac[k] - p).abs() < 3.0 * sigma + 0.01,
                "tier {k}: frac {} vs analytic {p}",
                frac[k]
            );
        }
    }

    #[test]
    fn modes_agree_by_ks() {
        let net = two_tier_lognormal();
        let n = 3000u64;
        let mut sim_e = SimConfig::auto(&net, n, 19, SimMode::ExplicitShadowing).unwrap();
        sim_e.region_radius *= 0.6;
        let mut sim_q = SimConfig::auto(&net, n, 20, SimMode::EquivalentDensity).unwrap();
        sim_q.region_radius *= 0.6;
        let mut a = Vec::new();
        let mut b = Vec::new();
        run_drops(&net, &sim_e, |d| a.push(d.sinr)).unwrap();
        run_drops(&net, &sim_q, |d| b.push(d.sinr)).unwrap();
        let d = ks_statistic(&mut a, &mut b);
        let crit = ks_critical(a.len(), b.len(), 0.01);
        assert!(d < crit, "KS {d} vs critical {crit}");
    }

    #[test]
    fn rate_matches_analytic_rayleigh() {
        let net = rayleigh_net(0.0);
        let mut sim = SimConfig::auto(&net, 20_000, 5, SimMode::EquivalentDensity).unwrap();
        sim.region_radius *= 0.75;
        let e = estimate(&net, &sim, SimMetric::Rate).unwrap();
        let analytic =
            crate::performance::spectral_efficiency(&net, &crate::settings::NumericSettings::default())
                .unwrap()
                .value;
        assert!(
            (e.mean - analytic).abs() < 3.0 * e.ci_half_width.max(1e-3) + 0.01,
            "sim {} ± {} vs analytic {analytic}",
            e.mean,
            e.ci_half_width
        );
    }

    #[test]
    fn laplace_conditioned_matches_analytic() {
        let net = rayleigh_net(0.0);
        let mut sim = SimConfig::auto(&net, 60_000, 9, SimMode::EquivalentDensity).unwrap();
        sim.region_radius *= 0.75;
        // condition near the median serving distance
        let r_med = (std::f64::consts::LN_2 / (std::f64::consts::PI * 1e-4)).sqrt();
        sim.conditioning = Some(DistanceBin {
            tier: 0,
            lo: 0.98 * r_med,
            hi: 1.02 * r_med,
        });
        let s = 0.5 * r_med.powf(4.0); // O(1) argument for the normalized Laplace
        let e = estimate(&net, &sim, SimMetric::LaplaceAt(s)).unwrap();
        let analytic = crate::network::interference_laplace(
            &net,
            0,
            r_med,
            s,
            &crate::settings::NumericSettings::default(),
        )
        .unwrap();
        assert!(
            (e.mean - analytic).abs() < 3.0 * e.ci_half_width + 0.02,
            "sim {} ± {} (n={}) vs analytic {analytic}",
            e.mean,
            e.ci_half_width,
            e.n_effective
        );
    }

    #[test]
    fn exclusion_zone_holds_in_equivalent_mode() {
        let net = two_tier_lognormal();
        let mut sim = SimConfig::auto(&net, 300, 23, SimMode::EquivalentDensity).unwrap();
        sim.region_radius *= 0.6;
        // simulate_drop errors out if the invariant is violated
        run_drops(&net, &sim, |_| {}).unwrap();
    }

    #[test]
    fn record_format_has_17_significant_digits() {
        let d = DropResult {
            sinr: std::f64::consts::PI,
            serving_tier: 1,
            serving_distance: 123.456,
            interference: 1e-9,
        };
        let mut buf = Vec::new();
        write_drop_record(&mut buf, &d).unwrap();
        let line = String::from_utf8(buf).unwrap();
        assert!(line.contains("3.1415926535897931e0"), "line: {line}");
        assert!(line.ends_with('\n'));
    }

    #[test]
    fn ks_helpers_sane() {
        let mut a: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let mut b: Vec<f64> = (0..1000).map(|i| 0.5 + i as f64 / 1000.0).collect();
        let d = ks_statistic(&mut a, &mut b);
        assert!(d > 0.45 && d <= 0.51, "KS {d}");
        assert!(ks_critical(1000, 1000, 0.01) < 0.1);
    }
}
