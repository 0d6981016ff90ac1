//! Modified Bessel function of the second kind with real order.
//!
//! Temme's series for small argument, Steed's continued fraction for large,
//! followed by upward recurrence in the order.

use crate::error::{Error, Result};
use crate::specfun::gamma::ln_gamma;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const EPS: f64 = 1e-16;
const MAX_IT: usize = 10_000;

/// Temme's Γ₁ and Γ₂ auxiliary functions for |u| ≤ 1/2.
///
/// Γ₁(u) = [1/Γ(1−u) − 1/Γ(1+u)]/(2u), Γ₂(u) = [1/Γ(1−u) + 1/Γ(1+u)]/2.
fn temme_gammas(u: f64) -> (f64, f64, f64, f64) {
    let gampl = (-ln_gamma(1.0 + u)).exp();
    let gammi = (-ln_gamma(1.0 - u)).exp();
    let gam1 = if u.abs() < 1e-5 {
        // even Taylor expansion around u = 0 avoids cancellation
        -EULER_GAMMA + 0.042_002_635_034_095_24 * u * u
    } else {
        (gammi - gampl) / (2.0 * u)
    };
    let gam2 = 0.5 * (gammi + gampl);
    (gam1, gam2, gampl, gammi)
}

/// K_ν(x) for real ν and x > 0; symmetric under ν → −ν.
pub fn bessel_k_real_order(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("bessel_k: x must be > 0, got {x}")));
    }
    let nu = nu.abs();
    if x < 1e-8 && nu > 50.0 {
        return Err(Error::domain(format!(
            "bessel_k: overflow regime (x = {x}, nu = {nu})"
        )));
    }
    let nl = (nu + 0.5).floor() as usize;
    let mu = nu - nl as f64; // |mu| <= 1/2
    let xi = 1.0 / x;

    let (mut k_mu, mut k_mu1) = if x < 2.0 {
        temme_series(mu, x)?
    } else {
        steed_cf2(mu, x)?
    };
    for i in 1..=nl {
        let next = (mu + i as f64) * 2.0 * xi * k_mu1 + k_mu;
        k_mu = k_mu1;
        k_mu1 = next;
    }
    if !k_mu.is_finite() {
        return Err(Error::domain(format!(
            "bessel_k({nu}, {x}) overflowed during recurrence"
        )));
    }
    Ok(k_mu)
}

/// Series evaluation of (K_mu, K_{mu+1}) for x < 2.
fn temme_series(mu: f64, x: f64) -> Result<(f64, f64)> {
    let x2 = 0.5 * x;
    let pimu = std::f64::consts::PI * mu;
    let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
    let d0 = -x2.ln();
    let e = mu * d0;
    let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
    let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d0);
    let mut sum = ff;
    let ee = e.exp();
    let mut p = 0.5 * ee / gampl;
    let mut q = 0.5 / (ee * gammi);
    let mut c = 1.0;
    let d = x2 * x2;
    let mut sum1 = p;
    let mu2 = mu * mu;
    for i in 1..=MAX_IT {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - mu2);
        c *= d / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        sum1 += c * (p - fi * ff);
        if del.abs() < sum.abs() * EPS {
            return Ok((sum, sum1 * 2.0 / x));
        }
    }
    Err(Error::no_convergence("bessel_k Temme series"))
}

/// Steed's continued fraction CF2 for x ≥ 2, returns (K_mu, K_{mu+1}).
fn steed_cf2(mu: f64, x: f64) -> Result<(f64, f64)> {
    let mu2 = mu * mu;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu2;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..=MAX_IT {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            let h = a1 * h;
            let k_mu = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s;
            let k_mu1 = k_mu * (mu + x + 0.5 - h) / x;
            return Ok((k_mu, k_mu1));
        }
    }
    Err(Error::no_convergence("bessel_k continued fraction"))
}
