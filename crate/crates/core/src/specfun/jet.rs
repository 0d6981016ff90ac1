//! Truncated univariate Taylor-polynomial ("jet") arithmetic.
//!
//! Propagating jets through an expression yields exact higher derivatives
//! without symbolic differentiation, which is how the outage series obtains
//! the s-derivatives of the radial kernel.

use crate::error::Result;
use crate::specfun::erf::erfcx;
use crate::specfun::gamma::{ln_gamma, lower_incomplete_gamma_reg};

/// Taylor coefficients c[k] of f(x₀ + ε) = Σ c[k] ε^k, truncated at `len - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub c: Vec<f64>,
}

impl Jet {
    pub fn constant(v: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = v;
        Jet { c }
    }

    /// The identity function expanded at `v`.
    pub fn variable(v: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = v;
        if order >= 1 {
            c[1] = 1.0;
        }
        Jet { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// n-th derivative of the underlying function at the expansion point.
    pub fn derivative(&self, n: usize) -> f64 {
        let mut fact = 1.0f64;
        for k in 2..=n {
            fact *= k as f64;
        }
        self.c[n] * fact
    }

    pub fn scale(&self, a: f64) -> Jet {
        Jet {
            c: self.c.iter().map(|x| a * x).collect(),
        }
    }

    pub fn add(&self, other: &Jet) -> Jet {
        debug_assert_eq!(self.c.len(), other.c.len());
        Jet {
            c: self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        debug_assert_eq!(self.c.len(), other.c.len());
        Jet {
            c: self.c.iter().zip(&other.c).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add_scalar(&self, v: f64) -> Jet {
        let mut c = self.c.clone();
        c[0] += v;
        Jet { c }
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        debug_assert_eq!(self.c.len(), other.c.len());
        let n = self.c.len();
        let mut c = vec![0.0; n];
        for i in 0..n {
            for j in 0..n - i {
                c[i + j] += self.c[i] * other.c[j];
            }
        }
        Jet { c }
    }

    pub fn div(&self, other: &Jet) -> Jet {
        debug_assert_eq!(self.c.len(), other.c.len());
        debug_assert!(other.c[0] != 0.0);
        let n = self.c.len();
        let mut c = vec![0.0; n];
        for k in 0..n {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc -= other.c[j] * c[k - j];
            }
            c[k] = acc / other.c[0];
        }
        Jet { c }
    }

    pub fn recip(&self) -> Jet {
        Jet::constant(1.0, self.order()).div(self)
    }

    pub fn exp(&self) -> Jet {
        let n = self.c.len();
        let mut c = vec![0.0; n];
        c[0] = self.c[0].exp();
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.c[j] * c[k - j];
            }
            c[k] = acc / k as f64;
        }
        Jet { c }
    }

    pub fn ln(&self) -> Jet {
        debug_assert!(self.c[0] > 0.0);
        let n = self.c.len();
        let mut c = vec![0.0; n];
        c[0] = self.c[0].ln();
        for k in 1..n {
            let mut acc = self.c[k];
            for j in 1..k {
                acc -= (k - j) as f64 / k as f64 * self.c[j] * c[k - j];
            }
            c[k] = acc / self.c[0];
        }
        Jet { c }
    }

    /// Real power, requires a positive constant term.
    pub fn powf(&self, p: f64) -> Jet {
        self.ln().scale(p).exp()
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    /// Composes outer Taylor coefficients `g` (expanded at `self.value()`)
    /// with this jet.
    pub fn compose(&self, g: &[f64]) -> Jet {
        let n = self.c.len();
        debug_assert!(g.len() >= n);
        let mut shifted = self.clone();
        shifted.c[0] = 0.0;
        let mut result = Jet::constant(g[n - 1], self.order());
        for k in (0..n - 1).rev() {
            result = result.mul(&shifted).add_scalar(g[k]);
        }
        result
    }
}

/// erfcx applied to a jet via the ODE erfcx'(x) = 2x·erfcx(x) − 2/√π.
pub fn erfcx_jet(x: &Jet) -> Jet {
    let n = x.c.len();
    let x0 = x.value();
    let mut g = vec![0.0; n];
    g[0] = erfcx(x0);
    let two_over_sqrt_pi = 2.0 / std::f64::consts::PI.sqrt();
    for k in 0..n - 1 {
        // (k+1) g_{k+1} = 2 x0 g_k + 2 g_{k-1} - (2/√π)·[k = 0]
        let mut rhs = 2.0 * x0 * g[k];
        if k >= 1 {
            rhs += 2.0 * g[k - 1];
        }
        if k == 0 {
            rhs -= two_over_sqrt_pi;
        }
        g[k + 1] = rhs / (k + 1) as f64;
    }
    x.compose(&g)
}

/// Regularized lower incomplete gamma P(s, u) applied to a jet in u.
pub fn lower_inc_gamma_reg_jet(s: f64, u: &Jet) -> Result<Jet> {
    let n = u.c.len();
    let u0 = u.value();
    let mut g = vec![0.0; n];
    g[0] = lower_incomplete_gamma_reg(s, u0)?;
    if n > 1 {
        // P'(u) = u^{s-1} e^{-u} / Γ(s); expand the derivative as a jet at u0
        let v = Jet::variable(u0, n - 2);
        let h = v
            .ln()
            .scale(s - 1.0)
            .sub(&v)
            .add_scalar(-ln_gamma(s))
            .exp();
        for k in 0..n - 1 {
            g[k + 1] = h.c[k] / (k + 1) as f64;
        }
    }
    Ok(u.compose(&g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exp_coefficients() {
        let x = Jet::variable(0.0, 4);
        let e = x.exp();
        let expect = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0];
        for (a, b) in e.c.iter().zip(expect) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn division_inverts_multiplication() {
        let x = Jet::variable(1.3, 6);
        let a = x.exp().mul(&x.add_scalar(2.0));
        let back = a.div(&x.add_scalar(2.0));
        for (u, v) in back.c.iter().zip(&x.exp().c) {
            assert_relative_eq!(*u, *v, max_relative = 1e-12);
        }
    }

    #[test]
    fn powf_derivatives_match_finite_differences() {
        let f = |s: f64| (1.0 + 2.0 * s).powf(1.7);
        let jet = Jet::variable(1.0, 3).scale(2.0).add_scalar(1.0).powf(1.7);
        let h = 1e-5;
        let d1 = (f(1.0 + h) - f(1.0 - h)) / (2.0 * h);
        let d2 = (f(1.0 + h) - 2.0 * f(1.0) + f(1.0 - h)) / (h * h);
        assert_relative_eq!(jet.derivative(1), d1, max_relative = 1e-8);
        assert_relative_eq!(jet.derivative(2), d2, max_relative = 1e-5);
    }

    #[test]
    fn erfcx_jet_derivative() {
        let x = Jet::variable(0.8, 3);
        let f = erfcx_jet(&x);
        let h = 1e-6;
        let d1 = (erfcx(0.8 + h) - erfcx(0.8 - h)) / (2.0 * h);
        assert_relative_eq!(f.value(), erfcx(0.8), max_relative = 1e-13);
        assert_relative_eq!(f.derivative(1), d1, max_relative = 1e-8);
    }

    #[test]
    fn incomplete_gamma_jet_derivative() {
        let s = 1.6;
        let u = Jet::variable(2.0, 3);
        let p = lower_inc_gamma_reg_jet(s, &u).unwrap();
        let h = 1e-6;
        let fd = (lower_incomplete_gamma_reg(s, 2.0 + h).unwrap()
            - lower_incomplete_gamma_reg(s, 2.0 - h).unwrap())
            / (2.0 * h);
        assert_relative_eq!(p.derivative(1), fd, max_relative = 1e-8);
    }

    #[test]
    fn composition_chain_rule() {
        // d/ds exp(s^2) at s0 = 0.7
        let s = Jet::variable(0.7, 2);
        let f = s.mul(&s).exp();
        let expect = 2.0 * 0.7 * (0.7f64 * 0.7).exp();
        assert_relative_eq!(f.derivative(1), expect, max_relative = 1e-12);
    }
}
