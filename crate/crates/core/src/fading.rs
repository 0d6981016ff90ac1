//! The κ-μ shadowed fading law: exact statistics, Laguerre-series expansion,
//! finite gamma mixture for integer parameters, named special cases and an
//! exact sampler.

use rand::Rng;
use rand_distr::{Distribution, Gamma as GammaDist, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::gamma::{ln_gamma, lower_incomplete_gamma_reg, real_binomial};
use crate::specfun::hyper::{gauss_2f1, kummer_1f1};

/// Surrogate used to represent the κ → 0 limit with a single code path.
pub const KAPPA_ZERO: f64 = 1e-12;
/// Surrogate used to represent the m → ∞ limit (κ-μ fading without LOS
/// shadowing); the induced error is O(1/m).
pub const M_INFINITY: f64 = 1e7;

/// Parameters of the κ-μ shadowed distribution, with the derived scale
/// parameters θ₁ and θ₂ kept alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaMuShadowedParams {
    pub kappa: f64,
    pub mu: f64,
    pub m: f64,
    pub mean_power: f64,
    #[serde(skip, default)]
    pub theta1: f64,
    #[serde(skip, default)]
    pub theta2: f64,
    /// Records limit substitutions applied by `from_named_model`.
    #[serde(skip, default)]
    pub provenance: Option<&'static str>,
}

impl KappaMuShadowedParams {
    pub fn new(kappa: f64, mu: f64, m: f64, mean_power: f64) -> Result<Self> {
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::domain(format!("kappa must be >= 0, got {kappa}")));
        }
        if !(mu > 0.0 && m > 0.0 && mean_power > 0.0) {
            return Err(Error::domain(format!(
                "mu, m, mean_power must be > 0, got {mu}, {m}, {mean_power}"
            )));
        }
        let theta1 = mean_power / (mu * (1.0 + kappa));
        let theta2 = (mu * kappa + m) * mean_power / (mu * (1.0 + kappa) * m);
        Ok(KappaMuShadowedParams {
            kappa,
            mu,
            m,
            mean_power,
            theta1,
            theta2,
            provenance: None,
        })
    }

    /// Recomputes θ₁/θ₂ after deserialization.
    pub fn normalized(&self) -> Result<Self> {
        let mut p = Self::new(self.kappa, self.mu, self.m, self.mean_power)?;
        p.provenance = self.provenance;
        Ok(p)
    }

    /// Exact PDF of the channel power.
    pub fn pdf_exact(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(format!("pdf_exact: x must be > 0, got {x}")));
        }
        let (t1, t2, mu, m) = (self.theta1, self.theta2, self.mu, self.m);
        let log_pref =
            (m - mu) * t1.ln() - m * t2.ln() + (mu - 1.0) * x.ln() - x / t1 - ln_gamma(mu);
        let hyp = kummer_1f1(m, mu, (t2 - t1) * x / (t1 * t2))?;
        Ok(log_pref.exp() * hyp)
    }

    /// j-th moment E[h^j] for real j > 0 (j = 0 returns 1).
    pub fn moment(&self, j: f64) -> Result<f64> {
        if j < 0.0 {
            return Err(Error::domain(format!("moment: j must be >= 0, got {j}")));
        }
        if j == 0.0 {
            return Ok(1.0);
        }
        let (t1, t2, mu, m) = (self.theta1, self.theta2, self.mu, self.m);
        let log_pref =
            (m - mu) * t1.ln() + (mu + j - m) * t2.ln() + ln_gamma(mu + j) - ln_gamma(mu);
        let hyp = gauss_2f1(mu - m, mu + j, mu, -mu * self.kappa / m)?;
        Ok(log_pref.exp() * hyp)
    }

    /// Laplace transform E[e^{−s h}], computed in log domain.
    ///
    /// The grouping keeps the m → ∞ surrogate accurate: the large exponent
    /// multiplies a log1p of a small ratio instead of a difference of logs.
    pub fn laplace(&self, s: f64) -> f64 {
        debug_assert!(s >= 0.0);
        let (t1, t2, mu, m) = (self.theta1, self.theta2, self.mu, self.m);
        let log_l = -mu * (t1 * s).ln_1p() + m * (-(t2 - t1) * s / (1.0 + t2 * s)).ln_1p();
        log_l.exp()
    }

    /// One draw of the channel power h.
    ///
    /// Conditional construction: ξ² ~ Gamma(m, 1/m) (unit-mean Nakagami-m
    /// power), P ~ Poisson(μκξ²), h ~ Gamma(μ+P, θ₁). This matches the
    /// Laplace transform for all real μ, m > 0.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let xi2 = GammaDist::new(self.m, 1.0 / self.m).unwrap().sample(rng);
        let lambda = self.mu * self.kappa * xi2;
        let p = if lambda > 1e-300 {
            // rand_distr's Poisson can return −1 for extremely small means;
            // clamp to the valid support
            let draw: f64 = Poisson::new(lambda).unwrap().sample(rng);
            if draw.is_finite() {
                draw.max(0.0)
            } else {
                0.0
            }
        } else {
            0.0
        };
        GammaDist::new(self.mu + p, self.theta1).unwrap().sample(rng)
    }
}

/// Truncated coefficient sets of the Laguerre series expansion.
#[derive(Debug, Clone)]
pub struct LaguerreCoeffs {
    /// Expansion order N (C has length N+1).
    pub order: usize,
    /// C_n, the Laguerre-basis projection coefficients.
    pub c_series: Vec<f64>,
    /// c_{i,n} triangular array, row n holds i = 0..=n.
    pub c_in: Vec<Vec<f64>>,
    /// b_{i,n} triangular array, row n holds i = 0..=n.
    pub b_in: Vec<Vec<f64>>,
    pub converged: bool,
    /// Magnitude of the last normalized terms; a truncation-error proxy.
    pub tail_estimate: f64,
}

/// Computes the Laguerre expansion coefficients C_n (the alternating
/// binomial-moment sum, evaluated through its cancellation-free
/// generating-function regrouping with compensated summation), stopping
/// when the normalized coefficient magnitude stays below `tol` for 3
/// consecutive orders.
pub fn laguerre_coeffs(
    p: &KappaMuShadowedParams,
    max_order: usize,
    tol: f64,
) -> Result<LaguerreCoeffs> {
    if max_order > 120 {
        return Err(Error::domain(format!(
            "laguerre_coeffs: max_order must be <= 120, got {max_order}"
        )));
    }
    let mu = p.mu;
    // C_n = E[L_n^{(μ-1)}(h)] is the alternating binomial-moment sum; its
    // generating function is f(t) = Σ_n C_n t^n = (1-u1·t)^{m-μ} (1-u2·t)^{-m}
    // with u1 = 1-θ1, u2 = 1-θ2.  Expanding each binomial factor separately
    // fails for large m (the factor coefficients grow like m^n/n! and their
    // Cauchy product cancels catastrophically even though C_n stays O(1)),
    // so the coefficients are generated directly from the first-order ODE
    //     (1-u1·t)(1-u2·t) f' = [p0 + p1·t] f,
    //     p0 = m·u2 - (m-μ)·u1,  p1 = -μ·u1·u2,
    // whose power-series form is the three-term forward recurrence below.
    // C_n ~ max(|u1|,|u2|)^n is the dominant solution of that recurrence, so
    // forward iteration is stable; the expansion converges iff
    // max(|u1|,|u2|) < 1.
    let u1 = 1.0 - p.theta1;
    let u2 = 1.0 - p.theta2;
    // m·(u2-u1) = -m·(θ2-θ1) = -θ1·μ·κ exactly, which avoids the m·ε_round
    // amplification of forming the difference at large m
    let p0 = -p.theta1 * mu * p.kappa + mu * u1;
    let p1 = -mu * u1 * u2;
    let u_sum = u1 + u2;
    let u_prod = u1 * u2;
    let mut c_series: Vec<f64> = Vec::with_capacity(max_order + 1);
    let mut small_streak = 0usize;
    let mut tail = f64::INFINITY;
    let mut converged = false;
    let mut ln_fact = 0.0f64; // ln n!
    for n in 0..=max_order {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        let sum = match n {
            0 => 1.0,
            1 => p0,
            _ => {
                let nf = (n - 1) as f64;
                ((u_sum * nf + p0) * c_series[n - 1] + (p1 - u_prod * (nf - 1.0)) * c_series[n - 2])
                    / (nf + 1.0)
            }
        };
        if !sum.is_finite() {
            // divergent expansion (e.g. θ2 ≥ 2); fail loudly rather than
            // emit noise
            c_series.push(sum);
            return Ok(finish_coeffs(p, c_series, false, f64::INFINITY));
        }
        c_series.push(sum);
        // normalized magnitude, the natural size of the n-th series term
        let norm = sum.abs() * (ln_fact - ln_gamma(n as f64 + mu)).exp();
        if n > 0 {
            if norm < tol {
                small_streak += 1;
                tail = tail.min(norm).max(norm);
                if small_streak >= 3 {
                    converged = true;
                    tail = norm;
                    break;
                }
            } else {
                small_streak = 0;
            }
        }
    }
    if !converged {
        tail = c_series
            .last()
            .map(|c| {
                let n = c_series.len() - 1;
                c.abs() * (ln_gamma(n as f64 + 1.0) - ln_gamma(n as f64 + mu)).exp()
            })
            .unwrap_or(f64::INFINITY);
    }
    Ok(finish_coeffs(p, c_series, converged, tail))
}

fn finish_coeffs(
    p: &KappaMuShadowedParams,
    c_series: Vec<f64>,
    converged: bool,
    tail: f64,
) -> LaguerreCoeffs {
    let mu = p.mu;
    let order = c_series.len() - 1;
    let mut c_in = Vec::with_capacity(order + 1);
    let mut b_in = Vec::with_capacity(order + 1);
    for n in 0..=order {
        let mut crow = Vec::with_capacity(n + 1);
        let mut brow = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let binom = real_binomial(n as f64, i as f64).unwrap();
            crow.push(sign * c_series[n] * binom * (-ln_gamma(mu + i as f64)).exp());
            let cnext = if n + 1 <= order { c_series[n + 1] } else { 0.0 };
            brow.push(sign * cnext * binom * (-ln_gamma(mu + i as f64 + 1.0)).exp());
        }
        c_in.push(crow);
        b_in.push(brow);
    }
    LaguerreCoeffs {
        order,
        c_series,
        c_in,
        b_in,
        converged,
        tail_estimate: tail,
    }
}

/// Series PDF of Lemma-style expansion, evaluated through the Laguerre
/// recurrence (mathematically identical to the double sum, numerically
/// stabler).
pub fn pdf_series(coeffs: &LaguerreCoeffs, p: &KappaMuShadowedParams, x: f64) -> Result<f64> {
    if !coeffs.converged {
        return Err(Error::no_convergence(
            "pdf_series: coefficient set did not converge",
        ));
    }
    if x < 0.0 {
        return Err(Error::domain("pdf_series: x must be >= 0"));
    }
    if x == 0.0 {
        return Ok(if p.mu > 1.0 {
            0.0
        } else if p.mu == 1.0 {
            coeffs
                .c_series
                .iter()
                .enumerate()
                .map(|(n, &c)| c * (ln_gamma(n as f64 + 1.0) - ln_gamma(n as f64 + 1.0)).exp())
                .sum()
        } else {
            f64::INFINITY
        });
    }
    let mu = p.mu;
    let weight = ((mu - 1.0) * x.ln() - x).exp();
    // Σ_n [n! C_n / Γ(n+μ)] L_n^{μ-1}(x)
    let mut acc = 0.0f64;
    let mut l_prev = 1.0f64; // L_0
    let mut l_curr = mu - x; // L_1^{μ-1}
    for (n, &c) in coeffs.c_series.iter().enumerate() {
        let l_n = match n {
            0 => 1.0,
            1 => l_curr,
            _ => {
                let nf = (n - 1) as f64;
                let next =
                    ((2.0 * nf + mu - x) * l_curr - (nf + mu - 1.0) * l_prev) / (nf + 1.0);
                l_prev = l_curr;
                l_curr = next;
                next
            }
        };
        let scale = (ln_gamma(n as f64 + 1.0) - ln_gamma(n as f64 + mu)).exp();
        acc += c * scale * l_n;
    }
    Ok(acc * weight)
}

/// Series CDF; clamped to [0, 1].
pub fn cdf_series(coeffs: &LaguerreCoeffs, p: &KappaMuShadowedParams, x: f64) -> Result<f64> {
    if !coeffs.converged {
        return Err(Error::no_convergence(
            "cdf_series: coefficient set did not converge",
        ));
    }
    if x < 0.0 {
        return Err(Error::domain("cdf_series: x must be >= 0"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let mu = p.mu;
    let base = lower_incomplete_gamma_reg(mu, x)?;
    // Σ_{n>=1} Γ(n) C_n / Γ(n+μ) · x^μ e^{-x} L_{n-1}^{μ}(x)
    let weight = (mu * x.ln() - x).exp();
    let mut acc = 0.0f64;
    let mut l_prev = 1.0f64; // L_0^{μ}
    let mut l_curr = mu + 1.0 - x; // L_1^{μ}
    for n in 1..coeffs.c_series.len() {
        let k = n - 1; // Laguerre degree
        let l_k = match k {
            0 => 1.0,
            1 => l_curr,
            _ => {
                let kf = (k - 1) as f64;
                let next = ((2.0 * kf + mu + 1.0 - x) * l_curr - (kf + mu) * l_prev)
                    / (kf + 1.0);
                l_prev = l_curr;
                l_curr = next;
                next
            }
        };
        let scale = (ln_gamma(n as f64) - ln_gamma(n as f64 + mu)).exp();
        acc += coeffs.c_series[n] * scale * l_k;
    }
    Ok((base + acc * weight).clamp(0.0, 1.0))
}

/// A finite mixture of gamma densities (weights may be signed but sum to 1).
#[derive(Debug, Clone)]
pub struct GammaMixture {
    /// (weight, shape, scale) triples.
    pub components: Vec<(f64, f64, f64)>,
}

impl GammaMixture {
    pub fn pdf(&self, x: f64) -> f64 {
        self.components
            .iter()
            .map(|&(w, k, th)| {
                w * ((k - 1.0) * x.ln() - x / th - ln_gamma(k) - k * th.ln()).exp()
            })
            .sum()
    }

    pub fn laplace(&self, s: f64) -> f64 {
        self.components
            .iter()
            .map(|&(w, k, th)| w * (1.0 + th * s).powf(-k))
            .sum()
    }
}

/// Escalating-order variant of [`laguerre_coeffs`]: doubles the expansion
/// order (up to the basis cap of 120) until the coefficient tail converges,
/// returning the last attempt either way. Useful when the caller's default
/// order is too small for slowly converging parameter corners (|1−θ| → 1).
pub fn laguerre_coeffs_auto(
    p: &KappaMuShadowedParams,
    start_order: usize,
    tol: f64,
) -> Result<LaguerreCoeffs> {
    let mut order = start_order.clamp(8, 120);
    loop {
        let c = laguerre_coeffs(p, order, tol)?;
        if c.converged || order >= 120 {
            return Ok(c);
        }
        order = (order * 2).min(120);
    }
}

/// Finite gamma-mixture representation for integer μ and m, obtained by
/// partial-fraction decomposition of the Laplace transform.
pub fn gamma_mixture(p: &KappaMuShadowedParams) -> Result<GammaMixture> {
    let mu_i = p.mu.round();
    let m_i = p.m.round();
    if (p.mu - mu_i).abs() > 1e-9 || (p.m - m_i).abs() > 1e-9 {
        return Err(Error::domain(format!(
            "gamma_mixture requires integer mu and m, got {}, {}",
            p.mu, p.m
        )));
    }
    let (mu, m) = (mu_i as i64, m_i as i64);
    if m - mu > 1000 || mu > 1000 {
        // the decomposition has ~|m-μ| components; beyond this it is both
        // slow and numerically pointless (the series route covers large m)
        return Err(Error::domain(format!(
            "gamma_mixture: partial-fraction size too large for mu = {}, m = {}",
            p.mu, p.m
        )));
    }
    let (t1, t2) = (p.theta1, p.theta2);
    let mut components = Vec::new();
    if m >= mu {
        // (1+θ1 s)^{m-μ} (1+θ2 s)^{-m}; expand the polynomial in (1+θ2 s)
        let a = 1.0 - t1 / t2;
        let b = t1 / t2;
        let deg = (m - mu) as usize;
        for j in 0..=deg {
            let w = real_binomial(deg as f64, j as f64)?
                * a.powi((deg - j) as i32)
                * b.powi(j as i32);
            components.push((w, (m - j as i64) as f64, t2));
        }
    } else {
        // product of two pole families, classical partial fractions
        let pord = (mu - m) as usize; // multiplicity at the θ1 pole
        let qord = m as usize; // multiplicity at the θ2 pole
        // θ1 poles: expand (1+θ2 s)^{-q} in powers of u = 1+θ1 s
        let c = 1.0 - t2 / t1;
        let d = t2 / t1;
        let mut tk = c.powi(-(qord as i32)); // k = 0 term
        for k in 0..pord {
            if k > 0 {
                let kf = k as f64;
                tk *= -(qord as f64 + kf - 1.0) / kf * d / c;
            }
            components.push((tk, (pord - k) as f64, t1));
        }
        // θ2 poles: expand (1+θ1 s)^{-p} in powers of v = 1+θ2 s
        let c2 = 1.0 - t1 / t2;
        let d2 = t1 / t2;
        let mut tk = c2.powi(-(pord as i32));
        for k in 0..qord {
            if k > 0 {
                let kf = k as f64;
                tk *= -(pord as f64 + kf - 1.0) / kf * d2 / c2;
            }
            components.push((tk, (qord - k) as f64, t2));
        }
    }
    let mix = GammaMixture { components };
    // residual check against the exact Laplace transform
    let mut s = 0.123;
    for _ in 0..20 {
        let exact = p.laplace(s);
        if (mix.laplace(s) - exact).abs() > 1e-9 * exact.max(1e-12) {
            return Err(Error::no_convergence(format!(
                "gamma_mixture: partial-fraction residual too large at s = {s}"
            )));
        }
        s = (s * 1.618 + 0.05) % 12.0 + 0.01;
    }
    Ok(mix)
}

/// Classical fading models expressible inside the κ-μ shadowed family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NamedModel {
    Rayleigh,
    /// Rice with K-factor.
    Rice { k: f64 },
    NakagamiM { m: f64 },
    /// Hoyt (Nakagami-q), 0 < q <= 1.
    Hoyt { q: f64 },
    OneSidedGaussian,
    KappaMu { kappa: f64, mu: f64 },
    EtaMu { eta: f64, mu: f64 },
    RicianShadowed { k: f64, m: f64 },
}

/// Parameter mapping of the named special cases; the κ → 0 and m → ∞
/// limits are realized by the surrogates `KAPPA_ZERO` and `M_INFINITY`.
pub fn from_named_model(model: NamedModel, mean_power: f64) -> Result<KappaMuShadowedParams> {
    let (kappa, mu, m, prov): (f64, f64, f64, Option<&'static str>) = match model {
        NamedModel::Rayleigh => (KAPPA_ZERO, 1.0, 1.0, Some("kappa->0 as 1e-12")),
        NamedModel::Rice { k } => {
            if k < 0.0 {
                return Err(Error::domain("Rice: K must be >= 0"));
            }
            (k, 1.0, M_INFINITY, Some("m->inf as 1e7"))
        }
        NamedModel::NakagamiM { m } => {
            if m <= 0.0 {
                return Err(Error::domain("Nakagami: m must be > 0"));
            }
            (KAPPA_ZERO, m, m, Some("kappa->0 as 1e-12"))
        }
        NamedModel::Hoyt { q } => {
            if !(q > 0.0 && q <= 1.0) {
                return Err(Error::domain("Hoyt: q must be in (0, 1]"));
            }
            ((1.0 - q * q) / (2.0 * q * q), 1.0, 0.5, None)
        }
        NamedModel::OneSidedGaussian => (KAPPA_ZERO, 0.5, 0.5, Some("kappa->0 as 1e-12")),
        NamedModel::KappaMu { kappa, mu } => {
            if kappa < 0.0 || mu <= 0.0 {
                return Err(Error::domain("KappaMu: need kappa >= 0, mu > 0"));
            }
            (kappa, mu, M_INFINITY, Some("m->inf as 1e7"))
        }
        NamedModel::EtaMu { eta, mu } => {
            if eta <= 0.0 || mu <= 0.0 {
                return Err(Error::domain("EtaMu: need eta > 0, mu > 0"));
            }
            ((1.0 - eta) / (2.0 * eta), 2.0 * mu, mu, None)
        }
        NamedModel::RicianShadowed { k, m } => {
            if k < 0.0 || m <= 0.0 {
                return Err(Error::domain("RicianShadowed: need K >= 0, m > 0"));
            }
            (k, 1.0, m, None)
        }
    };
    let mut p = KappaMuShadowedParams::new(kappa, mu, m, mean_power)?;
    p.provenance = prov;
    Ok(p)
}
