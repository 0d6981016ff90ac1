//! Large-scale shadowing laws (lognormal, gamma, inverse-Gaussian), their
//! fractional moments, samplers, and moment-matched parameter mappings.

use rand::Rng;
use rand_distr::{Distribution, Gamma as GammaDist, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::bessel::bessel_k_real_order;
use crate::specfun::gamma::ln_gamma;

/// dB-to-natural-log conversion constant, 10/ln 10. Kept explicit because a
/// silent ln/log10 mix-up is the classic bug in the lognormal moment formula.
pub const EPS0: f64 = 10.0 / std::f64::consts::LN_10;

/// Large-scale shadowing law. Lognormal parameters are in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum ShadowingModel {
    Lognormal { mu_db: f64, sigma_db: f64 },
    Gamma { shape: f64, scale: f64 },
    InverseGaussian { mean: f64, shape: f64 },
    None,
}

impl ShadowingModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ShadowingModel::Lognormal { sigma_db, .. } => {
                if sigma_db < 0.0 {
                    return Err(Error::domain("lognormal: sigma_db must be >= 0"));
                }
            }
            ShadowingModel::Gamma { shape, scale } => {
                if !(shape > 0.0 && scale > 0.0) {
                    return Err(Error::domain("gamma shadowing: shape, scale must be > 0"));
                }
            }
            ShadowingModel::InverseGaussian { mean, shape } => {
                if !(mean > 0.0 && shape > 0.0) {
                    return Err(Error::domain(
                        "inverse-Gaussian shadowing: mean, shape must be > 0",
                    ));
                }
            }
            ShadowingModel::None => {}
        }
        Ok(())
    }

    /// Fractional moment E[χ^j].
    pub fn moment(&self, j: f64) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            ShadowingModel::Lognormal { mu_db, sigma_db } => {
                let a = j * mu_db / EPS0;
                let b = j * sigma_db / EPS0;
                (a + 0.5 * b * b).exp()
            }
            ShadowingModel::Gamma { shape, scale } => {
                if j + shape <= 0.0 {
                    return Err(Error::domain(format!(
                        "gamma shadowing moment undefined for j = {j} with shape {shape}"
                    )));
                }
                (ln_gamma(j + shape) - ln_gamma(shape) + j * scale.ln()).exp()
            }
            ShadowingModel::InverseGaussian { mean, shape } => {
                let z = shape / mean;
                let bessel = bessel_k_real_order(0.5 - j, z)?;
                (z + 0.5 * (2.0 * shape / std::f64::consts::PI).ln() + (j - 0.5) * mean.ln())
                    .exp()
                    * bessel
            }
            ShadowingModel::None => 1.0,
        })
    }

    /// Density at x > 0 (None is a unit point mass, reported as 0 density).
    pub fn pdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        if !(x > 0.0) {
            return Err(Error::domain("shadowing pdf: x must be > 0"));
        }
        Ok(match *self {
            ShadowingModel::Lognormal { mu_db, sigma_db } => {
                let d = EPS0 * x.ln() - mu_db;
                EPS0 / (x * sigma_db * (2.0 * std::f64::consts::PI).sqrt())
                    * (-d * d / (2.0 * sigma_db * sigma_db)).exp()
            }
            ShadowingModel::Gamma { shape, scale } => {
                ((shape - 1.0) * x.ln() - x / scale - ln_gamma(shape) - shape * scale.ln()).exp()
            }
            ShadowingModel::InverseGaussian { mean, shape } => {
                let d = x - mean;
                (shape / (2.0 * std::f64::consts::PI * x * x * x)).sqrt()
                    * (-shape * d * d / (2.0 * mean * mean * x)).exp()
            }
            ShadowingModel::None => 0.0,
        })
    }

    /// One draw of χ. Inverse-Gaussian uses the Michael–Schucany–Haas
    /// transformation-with-rejection scheme.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ShadowingModel::Lognormal { mu_db, sigma_db } => {
                let g: f64 = StandardNormal.sample(rng);
                let db = mu_db + sigma_db * g;
                10f64.powf(db / 10.0)
            }
            ShadowingModel::Gamma { shape, scale } => {
                GammaDist::new(shape, scale).unwrap().sample(rng)
            }
            ShadowingModel::InverseGaussian { mean, shape } => {
                let nu: f64 = StandardNormal.sample(rng);
                let y = nu * nu;
                let x = mean + mean * mean * y / (2.0 * shape)
                    - mean / (2.0 * shape)
                        * (4.0 * mean * shape * y + mean * mean * y * y).sqrt();
                let u: f64 = rng.gen();
                if u <= mean / (mean + x) {
                    x
                } else {
                    mean * mean / x
                }
            }
            ShadowingModel::None => 1.0,
        }
    }
}

/// Which two moments the lognormal → gamma / inverse-Gaussian mapping
/// equates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum MatchMode {
    /// Mean and variance (the default mapping).
    MeanVariance,
    /// Mean and the fractional δ-moment that enters the network formulas.
    MeanDeltaMoment { delta: f64 },
}

/// Result of moment-matching a lognormal law.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MatchedShadowing {
    pub gamma: ShadowingModel,
    pub inverse_gaussian: ShadowingModel,
    pub mode: MatchMode,
    /// Relative residuals of the two matched moments, (gamma, inverse-Gaussian).
    pub gamma_residual: f64,
    pub ig_residual: f64,
}

/// Maps a lognormal shadowing law to gamma and inverse-Gaussian laws with
/// matching moments.
pub fn match_to_lognormal(mu_db: f64, sigma_db: f64, mode: MatchMode) -> Result<MatchedShadowing> {
    if sigma_db <= 0.0 {
        return Err(Error::domain("match_to_lognormal: sigma_db must be > 0"));
    }
    let ln = ShadowingModel::Lognormal { mu_db, sigma_db };
    let mean = ln.moment(1.0)?;
    match mode {
        MatchMode::MeanVariance => {
            let m2 = ln.moment(2.0)?;
            let var = m2 - mean * mean;
            let gamma = ShadowingModel::Gamma {
                shape: mean * mean / var,
                scale: var / mean,
            };
            let ig = ShadowingModel::InverseGaussian {
                mean,
                shape: mean * mean * mean / var,
            };
            let g_res = rel_residual(gamma.moment(2.0)?, m2);
            let ig_res = rel_residual(ig.moment(2.0)?, m2);
            Ok(MatchedShadowing {
                gamma,
                inverse_gaussian: ig,
                mode,
                gamma_residual: g_res,
                ig_residual: ig_res,
            })
        }
        MatchMode::MeanDeltaMoment { delta } => {
            if !(delta > 0.0 && delta < 1.0) {
                return Err(Error::domain(
                    "match_to_lognormal: delta must lie in (0, 1)",
                ));
            }
            let target = ln.moment(delta)?;
            // gamma: fix kθ = mean, solve shape k so the δ-moment matches
            let g_obj = |k: f64| -> Result<f64> {
                let theta = mean / k;
                ShadowingModel::Gamma { shape: k, scale: theta }.moment(delta)
            };
            let k = solve_monotone(&g_obj, target, 1e-6, 1e9)?;
            let gamma = ShadowingModel::Gamma {
                shape: k,
                scale: mean / k,
            };
            // inverse-Gaussian: fix the mean, solve the shape λ
            let ig_obj = |lam: f64| -> Result<f64> {
                ShadowingModel::InverseGaussian { mean, shape: lam }.moment(delta)
            };
            let lam = solve_monotone(&ig_obj, target, 1e-9 * mean, 1e9 * mean)?;
            let ig = ShadowingModel::InverseGaussian { mean, shape: lam };
            Ok(MatchedShadowing {
                gamma,
                inverse_gaussian: ig,
                mode,
                gamma_residual: rel_residual(gamma.moment(delta)?, target),
                ig_residual: rel_residual(ig.moment(delta)?, target),
            })
        }
    }
}

fn rel_residual(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

/// Bisection for a monotone objective; the bracket is widened from the
/// supplied bounds if needed.
fn solve_monotone<F: Fn(f64) -> Result<f64>>(f: &F, target: f64, lo: f64, hi: f64) -> Result<f64> {
    let mut a = lo;
    let mut b = hi;
    let fa = f(a)? - target;
    let fb = f(b)? - target;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::no_convergence(
            "match_to_lognormal: moment target not bracketed",
        ));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m)? - target;
        if fm == 0.0 || (b - a) < 1e-14 * m.abs() {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::integrate::integrate_zero_to_inf;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eps0_constant() {
        assert_relative_eq!(EPS0, 4.342944819032518, max_relative = 1e-15);
    }

    #[test]
    fn lognormal_half_moment_fixture() {
        let m = ShadowingModel::Lognormal { mu_db: 0.0, sigma_db: 4.0 }
            .moment(0.5)
            .unwrap();
        // exp(0.5·(2/ε0)²)
        let expect = (0.5 * (2.0 / EPS0) * (2.0 / EPS0)).exp();
        assert_relative_eq!(m, expect, max_relative = 1e-14);
        assert_relative_eq!(m, 1.11186, max_relative = 1e-4);
    }

    #[test]
    fn gamma_first_moment() {
        let m = ShadowingModel::Gamma { shape: 2.3, scale: 0.7 }.moment(1.0).unwrap();
        assert_relative_eq!(m, 2.3 * 0.7, max_relative = 1e-12);
    }

    #[test]
    fn ig_moments_closed_forms() {
        let ig = ShadowingModel::InverseGaussian { mean: 1.4, shape: 3.0 };
        assert_relative_eq!(ig.moment(1.0).unwrap(), 1.4, max_relative = 1e-10);
        // E[X²] = μ² + μ³/λ
        let m2 = 1.4f64.powi(2) + 1.4f64.powi(3) / 3.0;
        assert_relative_eq!(ig.moment(2.0).unwrap(), m2, max_relative = 1e-10);
    }

    #[test]
    fn none_moment_is_unity() {
        for j in [0.3, 1.0, 5.0] {
            assert_eq!(ShadowingModel::None.moment(j).unwrap(), 1.0);
        }
    }

    #[test]
    fn pdfs_normalize() {
        let laws = [
            ShadowingModel::Lognormal { mu_db: 0.0, sigma_db: 4.0 },
            ShadowingModel::Gamma { shape: 1.7, scale: 0.9 },
            ShadowingModel::InverseGaussian { mean: 1.2, shape: 2.5 },
        ];
        for law in laws {
            let total = integrate_zero_to_inf(|x| law.pdf(x).unwrap_or(0.0), 1e-11);
            assert!((total - 1.0).abs() < 1e-8, "{law:?}: {total}");
        }
    }

    #[test]
    fn exponential_special_case() {
        let law = ShadowingModel::Gamma { shape: 1.0, scale: 0.8 };
        for x in [0.2, 1.0, 3.0] {
            assert_relative_eq!(law.pdf(x).unwrap(), (-x / 0.8).exp() / 0.8, max_relative = 1e-13);
        }
    }

    #[test]
    fn lognormal_mode_location() {
        let law = ShadowingModel::Lognormal { mu_db: 0.0, sigma_db: 4.0 };
        // analytic mode exp((μ_l − σ_l²/ε0)/ε0)
        let mode = ((0.0 - 16.0 / EPS0) / EPS0).exp();
        // grid argmax around the analytic mode
        let mut best = (0.0, 0.0);
        for i in 1..4000 {
            let x = i as f64 * 1e-3;
            let p = law.pdf(x).unwrap();
            if p > best.1 {
                best = (x, p);
            }
        }
        assert!((best.0 - mode).abs() < 2e-3, "grid {} vs analytic {mode}", best.0);
        assert!(mode < law.moment(1.0).unwrap(), "right skew: mode below mean");
    }

    #[test]
    fn moments_match_quadrature() {
        let laws = [
            ShadowingModel::Lognormal { mu_db: 1.0, sigma_db: 3.0 },
            ShadowingModel::Gamma { shape: 2.0, scale: 0.5 },
            ShadowingModel::InverseGaussian { mean: 0.9, shape: 2.0 },
        ];
        for law in laws {
            for j in [0.4, 0.5, 1.0, 2.0] {
                let quad = integrate_zero_to_inf(|x| x.powf(j) * law.pdf(x).unwrap_or(0.0), 1e-12);
                let m = law.moment(j).unwrap();
                assert!(
                    ((m - quad) / m).abs() < 1e-7,
                    "{law:?} j={j}: closed {m} vs quad {quad}"
                );
            }
        }
    }

    #[test]
    fn samplers_match_moments() {
        let laws = [
            ShadowingModel::Lognormal { mu_db: 0.0, sigma_db: 4.0 },
            ShadowingModel::Gamma { shape: 2.0, scale: 0.5 },
            ShadowingModel::InverseGaussian { mean: 1.1, shape: 2.2 },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for law in laws {
            for j in [0.5, 1.0] {
                let n = 1_000_000usize;
                let mut sum = 0.0;
                let mut sumsq = 0.0;
                for _ in 0..n {
                    let v = law.sample(&mut rng).powf(j);
                    sum += v;
                    sumsq += v * v;
                }
                let mean = sum / n as f64;
                let var = (sumsq / n as f64 - mean * mean).max(0.0);
                let sigma = (var / n as f64).sqrt();
                let exact = law.moment(j).unwrap();
                assert!(
                    (mean - exact).abs() < 3.5 * sigma,
                    "{law:?} j={j}: {mean} vs {exact} ± {sigma}"
                );
            }
        }
        assert_eq!(ShadowingModel::None.sample(&mut rng), 1.0);
    }

    #[test]
    fn mean_variance_matching_identities() {
        let m = match_to_lognormal(0.0, 4.0, MatchMode::MeanVariance).unwrap();
        let ln = ShadowingModel::Lognormal { mu_db: 0.0, sigma_db: 4.0 };
        let mean = ln.moment(1.0).unwrap();
        let var = ln.moment(2.0).unwrap() - mean * mean;
        if let ShadowingModel::Gamma { shape, scale } = m.gamma {
            assert_relative_eq!(shape * scale, mean, max_relative = 1e-12);
            assert_relative_eq!(shape * scale * scale, var, max_relative = 1e-12);
        } else {
            panic!("expected gamma");
        }
        if let ShadowingModel::InverseGaussian { mean: mu, shape } = m.inverse_gaussian {
            assert_relative_eq!(mu, mean, max_relative = 1e-12);
            assert_relative_eq!(shape, mean * mean * mean / var, max_relative = 1e-12);
        } else {
            panic!("expected inverse-Gaussian");
        }
        assert!(m.gamma_residual < 1e-10 && m.ig_residual < 1e-10);
    }

    #[test]
    fn delta_moments_spread_with_sigma() {
        let delta = 0.5;
        for (sigma, spread_ok) in [(2.0, true), (8.0, false)] {
            let m = match_to_lognormal(0.0, sigma, MatchMode::MeanVariance).unwrap();
            let ln = ShadowingModel::Lognormal { mu_db: 0.0, sigma_db: sigma }
                .moment(delta)
                .unwrap();
            let g = m.gamma.moment(delta).unwrap();
            let ig = m.inverse_gaussian.moment(delta).unwrap();
            let worst = ((g - ln) / ln).abs().max(((ig - ln) / ln).abs());
            if spread_ok {
                assert!(worst < 0.01, "sigma {sigma}: spread {worst}");
            } else {
                assert!(worst > 0.05, "sigma {sigma}: spread {worst}");
            }
        }
    }

    #[test]
    fn delta_moment_matching_mode() {
        let delta = 0.5;
        let m = match_to_lognormal(0.0, 6.0, MatchMode::MeanDeltaMoment { delta }).unwrap();
        let target = ShadowingModel::Lognormal { mu_db: 0.0, sigma_db: 6.0 }
            .moment(delta)
            .unwrap();
        assert!(m.gamma_residual < 1e-9, "gamma residual {}", m.gamma_residual);
        assert!(m.ig_residual < 1e-9, "IG residual {}", m.ig_residual);
        assert_relative_eq!(m.gamma.moment(delta).unwrap(), target, max_relative = 1e-8);
        assert_relative_eq!(
            m.inverse_gaussian.moment(delta).unwrap(),
            target,
            max_relative = 1e-8
        );
    }
}
