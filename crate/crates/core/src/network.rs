//! K-tier PPP model bookkeeping and the interference characterization:
//! association probabilities, serving-distance law, the W(z) kernel, the
//! interference Laplace transform, and stable-law moments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fading::KappaMuShadowedParams;
use crate::settings::NumericSettings;
use crate::shadowing::ShadowingModel;
use crate::specfun::gamma::{gamma_fn, ln_gamma, lower_incomplete_gamma_reg};
use crate::specfun::hyper::{appell_f2, gauss_2f1, ln_kummer_1f1_pos};
use crate::specfun::laguerre::gauss_laguerre_general;

/// One network tier: an independent homogeneous PPP of base stations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierConfig {
    /// BS density λ_k (per unit area).
    pub density: f64,
    /// Transmit power P_k (watts).
    pub power: f64,
    pub fading: KappaMuShadowedParams,
    pub shadowing: ShadowingModel,
}

/// The K-tier downlink model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub tiers: Vec<TierConfig>,
    /// Path-loss exponent α; α > 2 in the supported regime.
    pub alpha: f64,
    /// Path-loss intercept τ.
    pub tau: f64,
    /// Noise power spectral density N₀.
    pub noise_psd: f64,
    /// Bandwidth W; total noise power N = N₀·W.
    pub bandwidth: f64,
    /// The W(z) kernel carries a 1/(1−δ) factor that diverges as α → 2;
    /// α = 2 is therefore rejected unless this flag is set.
    #[serde(default)]
    pub allow_alpha_two: bool,
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tiers.is_empty() {
            return Err(Error::config("network needs at least one tier"));
        }
        for (k, t) in self.tiers.iter().enumerate() {
            if !(t.density > 0.0) || !(t.power > 0.0) {
                return Err(Error::config(format!(
                    "tier {k}: density and power must be > 0"
                )));
            }
            t.shadowing.validate()?;
        }
        if self.alpha <= 2.0 {
            if self.alpha == 2.0 && self.allow_alpha_two {
                // tolerated only on request; every δ-dependent formula has a
                // removable or genuine singularity at δ = 1
            } else {
                return Err(Error::config(format!(
                    "alpha must be > 2 (got {}); alpha = 2 needs allow_alpha_two",
                    self.alpha
                )));
            }
        }
        if !(self.tau > 0.0) || self.noise_psd < 0.0 || !(self.bandwidth > 0.0) {
            return Err(Error::config(
                "tau, bandwidth must be > 0 and noise_psd >= 0",
            ));
        }
        Ok(())
    }

    /// δ = 2/α.
    pub fn delta(&self) -> f64 {
        2.0 / self.alpha
    }

    /// Total noise power N = N₀·W.
    pub fn noise(&self) -> f64 {
        self.noise_psd * self.bandwidth
    }

    /// Normalized noise N̂ = N/(τ·P_k) seen from tier k.
    pub fn normalized_noise(&self, k: usize) -> f64 {
        self.noise() / (self.tau * self.tiers[k].power)
    }

    /// Equivalent (displacement-theorem) density λ_j·E[χ_j^δ].
    pub fn equivalent_density(&self, j: usize) -> Result<f64> {
        let d = self.delta();
        Ok(self.tiers[j].density * self.tiers[j].shadowing.moment(d)?)
    }

    /// λ₀ = Σ_j λ_j E[χ_j^δ] P̂_j^δ, with powers normalized to tier k.
    pub fn lambda0(&self, k: usize) -> Result<f64> {
        let d = self.delta();
        let pk = self.tiers[k].power;
        let mut sum = 0.0;
        for j in 0..self.tiers.len() {
            let p_hat = self.tiers[j].power / pk;
            sum += self.equivalent_density(j)? * p_hat.powf(d);
        }
        Ok(sum)
    }
}

/// Probability that the typical UE associates with tier k.
pub fn association_probability(net: &NetworkConfig, k: usize) -> Result<f64> {
    net.validate()?;
    Ok(net.equivalent_density(k)? / net.lambda0(k)?)
}

/// Density of the serving distance conditioned on association with tier k.
pub fn serving_distance_pdf(net: &NetworkConfig, k: usize, r: f64) -> Result<f64> {
    net.validate()?;
    if r < 0.0 {
        return Err(Error::domain("serving_distance_pdf: r must be >= 0"));
    }
    let l0 = net.lambda0(k)?;
    Ok(2.0 * std::f64::consts::PI * l0 * r * (-std::f64::consts::PI * l0 * r * r).exp())
}

/// W(z) evaluation with a quadrature error estimate.
#[derive(Debug, Clone, Copy)]
pub struct WEval {
    pub value: f64,
    /// |order-N − order-2N| (relative to max(|value|, 1)).
    pub error_estimate: f64,
    /// Set when the error estimate exceeds 1e-7.
    pub warning: bool,
}

/// The interference kernel W(z) for one tier's fading law.
///
/// Default evaluation is the Gauss-Laguerre quadrature form with the order
/// doubled once for an error estimate; the Appell-series closed form is the
/// cross-check path (`interference_w_appell`).
pub fn interference_w(
    fading: &KappaMuShadowedParams,
    z: f64,
    delta: f64,
    settings: &NumericSettings,
) -> Result<WEval> {
    if z < 0.0 {
        return Err(Error::domain("interference_w: z must be >= 0"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!(
            "interference_w: delta must lie in (0,1), got {delta}"
        )));
    }
    if z == 0.0 {
        return Ok(WEval {
            value: 0.0,
            error_estimate: 0.0,
            warning: false,
        });
    }
    let lo = w_quadrature(fading, z, delta, settings.quad_order)?;
    let hi = w_quadrature(fading, z, delta, settings.quad_order * 2)?;
    let err = (hi - lo).abs() / hi.abs().max(1.0);
    Ok(WEval {
        value: hi,
        error_estimate: err,
        warning: err > 1e-7,
    })
}

/// Order-N Gauss-Laguerre evaluation of the W(z) integral.
///
/// Two transformations make the rule converge spectrally:
/// - the algebraic small-argument factor of γ(1−δ, ·) is pulled out, leaving
///   the entire function g(w) = γ(1−δ, w)/w^{1−δ}, and the leftover x^μ power
///   is absorbed into a generalized Laguerre weight x^μ e^{−x};
/// - the confluent factor grows like e^{cx} (c = μκ/(μκ+m)), so the
///   integration variable is rescaled by 1−c to realign the integrand decay
///   with the Laguerre weight, and the ₁F₁ factor is carried in log space.
///
/// The subtracted bracket is exactly 1 − L_h(z).
fn w_quadrature(p: &KappaMuShadowedParams, z: f64, delta: f64, order: usize) -> Result<f64> {
    let (t1, mu, m) = (p.theta1, p.mu, p.m);
    if z * t1 > 1e3 {
        // saturated regime: γ(1−δ, zh) ≈ Γ(1−δ) over the bulk of h, where the
        // quadrature loses its spectral accuracy. Use the exact decomposition
        // W = z^δ Γ(1−δ) E[h^δ] − (1 − L(z)) − E[(zh)^δ Γ(1−δ, zh)], whose
        // last term is dominated by h ~ 1/z where the pdf is
        // C h^{μ−1}(1 + B₁h + …):
        // E[(zh)^δ Γ(1−δ, zh)] ≈ C z^{−μ} [Γ(μ+1)/(μ+δ) +
        //                                   B₁ Γ(μ+2)/((μ+1+δ) z)].
        let ehd = p.moment(delta)?;
        let c_pdf = ((m - mu) * t1.ln() - m * p.theta2.ln() - ln_gamma(mu)).exp();
        let b1 = -1.0 / t1 + (m / mu) * (p.theta2 - t1) / (t1 * p.theta2);
        let r_corr = c_pdf
            * z.powf(-mu)
            * (gamma_fn(mu + 1.0)? / (mu + delta)
                + b1 * gamma_fn(mu + 2.0)? / ((mu + 1.0 + delta) * z));
        return Ok(z.powf(delta) * gamma_fn(1.0 - delta)? * ehd - (1.0 - p.laplace(z)) - r_corr);
    }
    if z * t1 > 3.0 {
        // the knee of γ(1−δ, z θ₁ x) sits at x ~ 1/(zθ₁) ≪ 1 here and the
        // fixed rule cannot resolve it; integrate adaptively instead with the
        // exponential decay mapped out via x = −ln v / (1−c)
        return w_adaptive(p, z, delta);
    }
    let c = mu * p.kappa / (mu * p.kappa + m); // equals 1 − θ1/θ2
    let omc = 1.0 - c;
    let rule = gauss_laguerre_general(order, mu)?;
    let ln_pref = (t1 * z).ln() + (m - mu - 1.0) * omc.ln() - ln_gamma(mu);
    let gamma_top = gamma_fn(1.0 - delta)?;
    let mut sum = 0.0f64;
    for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
        let x = u / omc; // original integration variable
        let y = c * x; // ₁F₁ argument
        let ln_conf = if y > 0.0 {
            ln_kummer_1f1_pos(m, mu, y)? - y
        } else {
            0.0
        };
        // g(w) = γ(1−δ, w)/w^{1−δ}, entire in w; → 1/(1−δ) at w → 0
        let warg = t1 * z * x;
        let g = if warg < 1e-280 {
            1.0 / (1.0 - delta)
        } else {
            gamma_top * lower_incomplete_gamma_reg(1.0 - delta, warg)? * warg.powf(delta - 1.0)
        };
        sum += w * ln_conf.exp() * g;
    }
    let front = ln_pref.exp() * sum;
    Ok(front - (1.0 - p.laplace(z)))
}

/// Adaptive evaluation of the W(z) integral for the mid-saturation band.
///
/// Same integrand as `w_quadrature` in the original variable,
/// W + (1 − L) = t₁z(1−c)^m/Γ(μ) ∫ x^μ e^{−x} ₁F₁(m;μ;cx) g(t₁zx) dx,
/// integrated adaptively on a scanned finite support so the γ(1−δ, ·) knee
/// at x ~ 1/(zθ₁) is resolved regardless of z.
fn w_adaptive(p: &KappaMuShadowedParams, z: f64, delta: f64) -> Result<f64> {
    use crate::specfun::integrate::adaptive_simpson;
    let (t1, mu, m) = (p.theta1, p.mu, p.m);
    let c = mu * p.kappa / (mu * p.kappa + m);
    let gamma_top = gamma_fn(1.0 - delta)?;
    let err: std::cell::RefCell<Option<Error>> = std::cell::RefCell::new(None);
    let integrand = |x: f64| -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let y = c * x;
        let ln_conf = if y > 0.0 {
            match ln_kummer_1f1_pos(m, mu, y) {
                Ok(l) => l - x,
                Err(e) => {
                    if err.borrow().is_none() {
                        *err.borrow_mut() = Some(e);
                    }
                    return 0.0;
                }
            }
        } else {
            -x
        };
        let warg = t1 * z * x;
        let g = if warg < 1e-280 {
            1.0 / (1.0 - delta)
        } else {
            match lower_incomplete_gamma_reg(1.0 - delta, warg) {
                Ok(pg) => gamma_top * pg * warg.powf(delta - 1.0),
                Err(e) => {
                    if err.borrow().is_none() {
                        *err.borrow_mut() = Some(e);
                    }
                    return 0.0;
                }
            }
        };
        let v = (mu * x.ln() + ln_conf).exp() * g;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    // scan for the peak and a cutoff where the integrand is ~1e-18 of it
    let mut xmax = 16.0f64;
    let mut peak;
    loop {
        peak = 0.0f64;
        let n = 64;
        for i in 1..=n {
            peak = peak.max(integrand(xmax * i as f64 / n as f64));
        }
        if integrand(xmax) <= 1e-18 * peak || xmax > 1e6 {
            break;
        }
        xmax *= 2.0;
    }
    let integral = adaptive_simpson(&integrand, 0.0, xmax, 1e-12 * (peak * xmax).max(1e-280));
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    let ln_front = (t1 * z).ln() + m * (-c).ln_1p() - ln_gamma(mu);
    Ok(ln_front.exp() * integral - (1.0 - p.laplace(z)))
}

/// W evaluated on a truncated Taylor jet in z (for s-derivatives of the
/// radial kernel in the outage series).
///
/// Mirrors `w_quadrature` with jet arithmetic; the z-independent confluent
/// factor stays scalar, while the incomplete-gamma factor, the prefactor,
/// and the Laplace bracket are propagated as jets.
pub fn interference_w_jet(
    fading: &KappaMuShadowedParams,
    z: &crate::specfun::jet::Jet,
    delta: f64,
    order: usize,
) -> Result<crate::specfun::jet::Jet> {
    use crate::specfun::jet::{lower_inc_gamma_reg_jet, Jet};
    if !(z.value() > 0.0) {
        return Err(Error::domain("interference_w_jet: need z > 0"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain("interference_w_jet: delta must lie in (0,1)"));
    }
    let (t1, mu, m) = (fading.theta1, fading.mu, fading.m);
    let c = mu * fading.kappa / (mu * fading.kappa + m);
    let omc = 1.0 - c;
    let rule = gauss_laguerre_general(order, mu)?;
    let gamma_top = gamma_fn(1.0 - delta)?;
    let jet_order = z.order();
    let mut sum = Jet::constant(0.0, jet_order);
    for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
        let x = u / omc;
        let y = c * x;
        let ln_conf = if y > 0.0 {
            ln_kummer_1f1_pos(m, mu, y)? - y
        } else {
            0.0
        };
        let warg = z.scale(t1 * x);
        let g = if warg.value() < 1e-280 {
            Jet::constant(1.0 / (1.0 - delta), jet_order)
        } else {
            lower_inc_gamma_reg_jet(1.0 - delta, &warg)?
                .mul(&warg.powf(delta - 1.0))
                .scale(gamma_top)
        };
        sum = sum.add(&g.scale(w * ln_conf.exp()));
    }
    let ln_pref = z
        .ln()
        .add_scalar(t1.ln() + (m - mu - 1.0) * omc.ln() - ln_gamma(mu));
    let front = ln_pref.exp().mul(&sum);
    let laplace = laplace_jet(fading, z);
    Ok(front.add(&laplace).add_scalar(-1.0))
}

/// The fading Laplace transform L_h(z) on a jet, same grouping as the
/// scalar path.
pub fn laplace_jet(
    fading: &KappaMuShadowedParams,
    z: &crate::specfun::jet::Jet,
) -> crate::specfun::jet::Jet {
    let (t1, t2, mu, m) = (fading.theta1, fading.theta2, fading.mu, fading.m);
    let a = z.scale(t1).add_scalar(1.0).ln().scale(-mu);
    let inner = z
        .scale(-(t2 - t1))
        .div(&z.scale(t2).add_scalar(1.0))
        .add_scalar(1.0)
        .ln()
        .scale(m);
    a.add(&inner).exp()
}

/// Closed-form W(z) through the Appell F₂ series.
///
/// Only valid inside the series' convergence region |A|+|B| < 1; callers
/// should use it as a cross-check when |A|+|B| ≤ 0.95 and fall back to the
/// quadrature otherwise.
pub fn interference_w_appell(fading: &KappaMuShadowedParams, z: f64, delta: f64) -> Result<f64> {
    if z < 0.0 || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain("interference_w_appell: bad z or delta"));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let (t1, t2, mu, m) = (fading.theta1, fading.theta2, fading.mu, fading.m);
    let a = (1.0 - t1 / t2) / (1.0 + t1 * z);
    let b = t1 * z / (1.0 + t1 * z);
    let f2 = appell_f2(mu + 1.0, m, 1.0, mu, 2.0 - delta, a, b)?;
    let front = mu * t1 * z / (1.0 - delta)
        * (m * (t1 / t2).ln() - (mu + 1.0) * (t1 * z).ln_1p()).exp()
        * f2;
    Ok(front - (1.0 - fading.laplace(z)))
}

/// Appell-series argument magnitude |A|+|B|, the cross-check gate.
pub fn appell_argument_size(fading: &KappaMuShadowedParams, z: f64) -> f64 {
    let (t1, t2) = (fading.theta1, fading.theta2);
    let a = (1.0 - t1 / t2) / (1.0 + t1 * z);
    let b = t1 * z / (1.0 + t1 * z);
    a.abs() + b.abs()
}

/// The classical fading rows with a simplified W(z).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpecialWModel {
    Rayleigh,
    NakagamiM { m: f64 },
    OneSidedGaussian,
    KappaMu { kappa: f64, mu: f64 },
    Rician { k: f64 },
}

/// Simplified closed forms of W(z) for the classical rows; fast paths and
/// test oracles for `interference_w`.
pub fn interference_w_special(
    model: SpecialWModel,
    z: f64,
    delta: f64,
    h_bar: f64,
) -> Result<f64> {
    if z < 0.0 || !(delta > 0.0 && delta < 1.0) || !(h_bar > 0.0) {
        return Err(Error::domain("interference_w_special: bad arguments"));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    Ok(match model {
        SpecialWModel::Rayleigh => {
            h_bar * delta * z / (1.0 - delta)
                * gauss_2f1(1.0, 1.0 - delta, 2.0 - delta, -h_bar * z)?
        }
        SpecialWModel::NakagamiM { m } => {
            h_bar * z / (1.0 - delta)
                * gauss_2f1(m + 1.0, 1.0 - delta, 2.0 - delta, -h_bar * z / m)?
                - (1.0 - (1.0 + h_bar * z / m).powf(-m))
        }
        SpecialWModel::OneSidedGaussian => {
            h_bar * z / (1.0 - delta)
                * gauss_2f1(1.5, 1.0 - delta, 2.0 - delta, -2.0 * h_bar * z)?
                - (1.0 - 1.0 / (1.0 + 2.0 * h_bar * z).sqrt())
        }
        SpecialWModel::KappaMu { kappa, mu } => {
            kappa_mu_row_w(kappa, mu, h_bar / (mu * (1.0 + kappa)), z, delta)?
        }
        SpecialWModel::Rician { k } => kappa_mu_row_w(k, 1.0, h_bar / (1.0 + k), z, delta)?,
    })
}

/// W(z) for κ-μ fading (no dominant-component shadowing) as a Poisson
/// mixture of gamma rows.
///
/// Conditioned on the cluster count p ~ Poisson(μκ), the channel power is
/// gamma with shape μ+p and scale θ1, so W is the Poisson average of the
/// Nakagami-row closed form at that shape.  (The naive m→∞ limit of the
/// shadowed-fading kernel drops the dominant-component term and is wrong;
/// this mixture is the correct degenerate-shadowing limit.)
fn kappa_mu_row_w(kappa: f64, mu: f64, theta1: f64, z: f64, delta: f64) -> Result<f64> {
    let lam = mu * kappa;
    let mut sum = 0.0f64;
    let mut tail_mass = 1.0f64;
    let mut p = 0usize;
    loop {
        let pf = p as f64;
        let lnw = if lam > 0.0 {
            -lam + pf * lam.ln() - ln_gamma(pf + 1.0)
        } else if p == 0 {
            0.0
        } else {
            f64::NEG_INFINITY
        };
        let w = lnw.exp();
        let shape = mu + pf;
        // gamma(shape, θ1) row: shape·θ1z/(1−δ)·₂F₁(...) − [1 − (1+θ1z)^{−shape}]
        let bracket = shape * theta1 * z / (1.0 - delta)
            * gauss_2f1(shape + 1.0, 1.0 - delta, 2.0 - delta, -theta1 * z)?
            - (1.0 - (-shape * (theta1 * z).ln_1p()).exp());
        sum += w * bracket;
        tail_mass = (tail_mass - w).max(0.0);
        p += 1;
        // the bracket increases slowly (~shape^δ) with the cluster count, so
        // past the Poisson bulk the remaining mass bounds the tail
        if pf >= lam && tail_mass * bracket.abs().max(1.0) < 1e-14 * sum.abs().max(1e-300) {
            break;
        }
        if p > 20_000 {
            return Err(Error::no_convergence(
                "kappa_mu_row_w: Poisson mixture did not converge",
            ));
        }
    }
    Ok(sum)
}

/// Laplace transform of the aggregate interference conditioned on serving
/// tier k at distance r, evaluated at s (interference normalized by τP_k).
pub fn interference_laplace(
    net: &NetworkConfig,
    k: usize,
    r: f64,
    s: f64,
    settings: &NumericSettings,
) -> Result<f64> {
    net.validate()?;
    if !(r > 0.0) || s < 0.0 {
        return Err(Error::domain(
            "interference_laplace: need r > 0 and s >= 0",
        ));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    let d = net.delta();
    let z = s * r.powf(-net.alpha);
    let pk = net.tiers[k].power;
    let mut exponent = 0.0;
    for j in 0..net.tiers.len() {
        let p_hat = net.tiers[j].power / pk;
        let w = interference_w(&net.tiers[j].fading, z, d, settings)?;
        exponent += std::f64::consts::PI
            * r
            * r
            * net.equivalent_density(j)?
            * p_hat.powf(d)
            * w.value;
    }
    Ok((-exponent).exp())
}

/// Outcome of an interference-moment query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InterferenceMoment {
    Finite(f64),
    /// Order j ≥ δ: the stable-law moment is infinite.
    Divergent,
}

/// j-th moment of the aggregate far-field interference (stable-law form).
///
/// The stable description of the interference has dispersion coefficient
/// lim z^{−δ}W(z), evaluated here by quadrature at large z. In that limit
/// the exclusion zone is immaterial, so the moment does not depend on the
/// serving distance; the argument is kept for interface symmetry with the
/// conditional operations.
pub fn interference_moment(
    net: &NetworkConfig,
    k: usize,
    _serving_distance: f64,
    j: f64,
    settings: &NumericSettings,
) -> Result<InterferenceMoment> {
    net.validate()?;
    if !(j > 0.0) {
        return Err(Error::domain("interference_moment: j must be > 0"));
    }
    let d = net.delta();
    if j >= d {
        return Ok(InterferenceMoment::Divergent);
    }
    let c = laplace_exponent_coefficient(net, k, settings)?;
    // E[I^j] = Γ(1−j/δ)/Γ(1−j) · c^{j/δ} for exp(−c s^δ)-Laplace stable laws
    let value =
        (ln_gamma(1.0 - j / d) - ln_gamma(1.0 - j)).exp() * c.powf(j / d);
    Ok(InterferenceMoment::Finite(value))
}

/// Coefficient c of the far-field Laplace exponent L_I(s) = exp(−c·s^δ):
/// c = Σ_j πλ_j E[χ_j^δ] P̂_j^δ · lim_{z→∞} z^{−δ} W_j(z).
fn laplace_exponent_coefficient(
    net: &NetworkConfig,
    k: usize,
    _settings: &NumericSettings,
) -> Result<f64> {
    let d = net.delta();
    let pk = net.tiers[k].power;
    let mut c = 0.0;
    for j in 0..net.tiers.len() {
        // exact limit: z^{−δ} W(z) → Γ(1−δ)·E[h^δ] as z → ∞
        let w_limit = gamma_fn(1.0 - d)? * net.tiers[j].fading.moment(d)?;
        let p_hat = net.tiers[j].power / pk;
        c += std::f64::consts::PI * net.equivalent_density(j)? * p_hat.powf(d) * w_limit;
    }
    Ok(c)
}

/// Stable-distribution parameters (stability, skew, drift, dispersion) of
/// the aggregate interference at argument z.
pub fn stable_params(
    net: &NetworkConfig,
    k: usize,
    z: f64,
    settings: &NumericSettings,
) -> Result<(f64, f64, f64, f64)> {
    net.validate()?;
    if !(z > 0.0) {
        return Err(Error::domain("stable_params: z must be > 0"));
    }
    let d = net.delta();
    let pk = net.tiers[k].power;
    let mut disp = 0.0;
    for j in 0..net.tiers.len() {
        let p_hat = net.tiers[j].power / pk;
        let w = interference_w(&net.tiers[j].fading, z, d, settings)?;
        disp += std::f64::consts::PI
            * net.equivalent_density(j)?
            * p_hat.powf(d)
            * z.powf(-d)
            * w.value;
    }
    disp *= (std::f64::consts::FRAC_PI_2 * d).cos().recip();
    Ok((d, 1.0, 0.0, disp))
}
