//! Adaptive quadrature helpers used by the metric integrals.

/// Adaptive Simpson on [a, b] with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// ∫₀^∞ f(x) dx via the substitution x = t/(1−t) on (0, 1).
pub fn integrate_zero_to_inf<F: Fn(f64) -> f64>(f: F, tol: f64) -> f64 {
    let g = |t: f64| {
        if t <= 0.0 || t >= 1.0 {
            return 0.0;
        }
        let x = t / (1.0 - t);
        let jac = 1.0 / ((1.0 - t) * (1.0 - t));
        let v = f(x) * jac;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    // split near the endpoints where rate-style integrands concentrate
    adaptive_simpson(&g, 1e-12, 0.5, 0.5 * tol) + adaptive_simpson(&g, 0.5, 1.0 - 1e-12, 0.5 * tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn simpson_polynomial() {
        let v = adaptive_simpson(&|x| x * x * x, 0.0, 2.0, 1e-12);
        assert_relative_eq!(v, 4.0, max_relative = 1e-10);
    }

    #[test]
    fn semi_infinite_exponential() {
        let v = integrate_zero_to_inf(|x| (-x).exp(), 1e-12);
        assert_relative_eq!(v, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn semi_infinite_gamma_integral() {
        let v = integrate_zero_to_inf(|x| x.powf(2.5) * (-x).exp(), 1e-12);
        // Γ(3.5) = 3.32335097044784255118
        assert_relative_eq!(v, 3.32335097044784255118, max_relative = 1e-8);
    }
}
