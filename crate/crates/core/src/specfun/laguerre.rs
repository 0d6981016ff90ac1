//! Gauss-Laguerre quadrature — classical (weight e^{−x}) and generalized
//! (weight x^a e^{−x}) — with a shared per-(order, exponent) cache.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::specfun::gamma::ln_gamma;

/// Nodes and weights of a Gauss-Laguerre rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// ∫₀^∞ e^{−x} f(x) dx ≈ Σ wₙ f(xₙ)
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

fn cache() -> &'static Mutex<HashMap<(usize, u64), Arc<QuadratureRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Arc<QuadratureRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Classical Gauss-Laguerre rule (weight e^{−x}) of the given order
/// (1 ≤ order ≤ 256).
pub fn gauss_laguerre(order: usize) -> Result<Arc<QuadratureRule>> {
    gauss_laguerre_general(order, 0.0)
}

/// Generalized Gauss-Laguerre rule for the weight x^a e^{−x}, a > −1.
///
/// Nodes are found by Newton iteration on the generalized Laguerre
/// recurrence, polished to the rounding-noise floor.
pub fn gauss_laguerre_general(order: usize, a: f64) -> Result<Arc<QuadratureRule>> {
    if order == 0 || order > 256 {
        return Err(Error::domain(format!(
            "gauss_laguerre: order must be in 1..=256, got {order}"
        )));
    }
    if !(a > -1.0) || !a.is_finite() {
        return Err(Error::domain(format!(
            "gauss_laguerre: weight exponent must be > -1, got {a}"
        )));
    }
    let key = (order, a.to_bits());
    if let Some(rule) = cache().lock().unwrap().get(&key) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(compute_rule(order, a)?);
    cache().lock().unwrap().insert(key, rule.clone());
    Ok(rule)
}

/// Evaluates (L_n^{(a)}(x), d/dx L_n^{(a)}(x), L_{n-1}^{(a)}(x)).
fn laguerre_and_deriv(n: usize, a: f64, x: f64) -> (f64, f64, f64) {
    let mut p1 = 1.0f64;
    let mut p2 = 0.0f64;
    for k in 1..=n {
        let kf = k as f64;
        let p3 = p2;
        p2 = p1;
        p1 = ((2.0 * kf - 1.0 + a - x) * p2 - (kf - 1.0 + a) * p3) / kf;
    }
    // (L_n^{(a)})'(x) = (n L_n^{(a)}(x) − (n+a) L_{n-1}^{(a)}(x)) / x
    let dp = ((n as f64) * p1 - (n as f64 + a) * p2) / x;
    (p1, dp, p2)
}

fn compute_rule(n: usize, a: f64) -> Result<QuadratureRule> {
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..n {
        // initial guesses from Stroud & Secrest via Numerical Recipes
        if i == 0 {
            z = (1.0 + a) * (3.0 + 0.92 * a) / (1.0 + 2.4 * nf + 1.8 * a);
        } else if i == 1 {
            z += (15.0 + 6.25 * a) / (1.0 + 0.9 * a + 2.5 * nf);
        } else {
            let ai = (i - 1) as f64;
            z += ((1.0 + 2.55 * ai) / (1.9 * ai) + 1.26 * ai * a / (1.0 + 3.5 * ai))
                * (z - nodes[i - 2])
                / (1.0 + 0.3 * a);
        }
        let mut converged = false;
        let mut last_dz = f64::INFINITY;
        for _ in 0..100 {
            let (p, dp, _) = laguerre_and_deriv(n, a, z);
            let dz = p / dp;
            z -= dz;
            // quadratic convergence makes the final |dz| the error bound; stop
            // on the rounding-noise floor where |dz| stalls
            if dz.abs() <= 1e-13 * z.abs() || dz.abs() >= last_dz {
                converged = true;
                break;
            }
            last_dz = dz.abs();
        }
        if !converged {
            return Err(Error::no_convergence(format!(
                "gauss_laguerre({n}, {a}): Newton did not converge for node {i}"
            )));
        }
        nodes[i] = z;
        let (_, dp, p2) = laguerre_and_deriv(n, a, z);
        // w_i = −Γ(n+a)/(Γ(n)·n·L'_n(x_i)·L_{n−1}(x_i))  (Stroud & Secrest)
        weights[i] = -(ln_gamma(nf + a) - ln_gamma(nf)).exp() / (dp * nf * p2);
    }
    Ok(QuadratureRule {
        order: n,
        nodes,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn order_one() {
        let r = gauss_laguerre(1).unwrap();
        assert_relative_eq!(r.nodes[0], 1.0, max_relative = 1e-13);
        assert_relative_eq!(r.weights[0], 1.0, max_relative = 1e-13);
    }

    #[test]
    fn order_two_roots() {
        let r = gauss_laguerre(2).unwrap();
        let s2 = std::f64::consts::SQRT_2;
        assert_relative_eq!(r.nodes[0], 2.0 - s2, max_relative = 1e-12);
        assert_relative_eq!(r.nodes[1], 2.0 + s2, max_relative = 1e-12);
    }

    #[test]
    fn weights_sum_to_one() {
        for n in [1, 2, 4, 8, 16, 32, 64, 128, 256] {
            let r = gauss_laguerre(n).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-11, "order {n}: weight sum {s}");
        }
    }

    #[test]
    fn nodes_increasing_positive() {
        for n in [4, 16, 64, 256] {
            let r = gauss_laguerre(n).unwrap();
            let mut prev = 0.0;
            for &x in &r.nodes {
                assert!(x > prev);
                prev = x;
            }
        }
    }

    #[test]
    fn polynomial_exactness() {
        // order N integrates x^k exactly (= k!) for k <= 2N-1
        for n in [1usize, 2, 4, 8, 16, 32] {
            let r = gauss_laguerre(n).unwrap();
            let mut factorial = 1.0f64;
            for k in 0..=(2 * n - 1) {
                if k > 0 {
                    factorial *= k as f64;
                }
                let got = r.integrate(|x| x.powi(k as i32));
                assert_relative_eq!(got, factorial, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn cubic_moment_order_16() {
        let r = gauss_laguerre(16).unwrap();
        assert!((r.integrate(|x| x.powi(3)) - 6.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_order() {
        assert!(gauss_laguerre(0).is_err());
        assert!(gauss_laguerre(257).is_err());
        assert!(gauss_laguerre_general(8, -1.0).is_err());
    }

    #[test]
    fn generalized_weight_sums() {
        use crate::specfun::gamma::gamma_fn;
        // Σ w_i = ∫ x^a e^{−x} dx = Γ(1+a)
        for a in [-0.5, 0.5, 1.5, 3.2] {
            for n in [4usize, 16, 64, 128] {
                let r = gauss_laguerre_general(n, a).unwrap();
                let s: f64 = r.weights.iter().sum();
                let expect = gamma_fn(1.0 + a).unwrap();
                assert_relative_eq!(s, expect, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn generalized_polynomial_exactness() {
        use crate::specfun::gamma::gamma_fn;
        let a = 0.7;
        for n in [2usize, 8, 32] {
            let r = gauss_laguerre_general(n, a).unwrap();
            for k in 0..=(2 * n - 1).min(20) {
                let got = r.integrate(|x| x.powi(k as i32));
                let expect = gamma_fn(a + k as f64 + 1.0).unwrap();
                assert_relative_eq!(got, expect, max_relative = 1e-9);
            }
        }
    }
}
