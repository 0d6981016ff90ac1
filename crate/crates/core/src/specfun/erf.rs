//! Scaled complementary error function.

/// erf(x) by Maclaurin series, adequate for |x| < 2.
fn erf_series(x: f64) -> f64 {
    let two_over_sqrt_pi = 2.0 / std::f64::consts::PI.sqrt();
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for k in 1..200 {
        let kf = k as f64;
        term *= -x2 / kf;
        let add = term / (2.0 * kf + 1.0);
        sum += add;
        if add.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    two_over_sqrt_pi * sum
}

/// Laplace continued fraction for erfcx(x), x ≥ 2.
fn erfcx_cf(x: f64) -> f64 {
    // erfcx(x) = (1/√π) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let mut f = 0.0;
    // 60 levels are far more than needed at x >= 2
    for k in (1..=60).rev() {
        f = (k as f64 / 2.0) / (x + f);
    }
    1.0 / (std::f64::consts::PI.sqrt() * (x + f))
}

/// e^{x²} erfc(x) for x ≥ 0.
pub fn erfcx(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < 2.0 {
        (x * x).exp() * (1.0 - erf_series(x))
    } else {
        erfcx_cf(x)
    }
}

/// erfc(x) for x ≥ 0.
pub fn erfc(x: f64) -> f64 {
    if x < 2.0 {
        1.0 - erf_series(x)
    } else {
        (-x * x).exp() * erfcx_cf(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn erfcx_at_zero() {
        assert_eq!(erfcx(0.0), 1.0);
    }

    #[test]
    fn erfcx_asymptote() {
        let x = 50.0;
        let asym = 1.0 / (x * std::f64::consts::PI.sqrt());
        assert_relative_eq!(erfcx(x), asym, max_relative = 2e-4);
    }

    #[test]
    fn erfcx_fixtures() {
        // mpmath references (quadrature oracle for erfc)
        assert_relative_eq!(erfcx(1.0), 0.42758357615580700441, max_relative = 1e-12);
        assert_relative_eq!(erfcx(3.7), 0.14743499753718507911, max_relative = 1e-12);
        assert_relative_eq!(erfcx(12.0), 0.04685422101489376262, max_relative = 1e-12);
    }

    #[test]
    fn erfcx_strictly_decreasing() {
        let mut prev = erfcx(0.0);
        for i in 1..=400 {
            let v = erfcx(i as f64 * 0.1);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn erfc_continuity_at_branch_switch() {
        assert_relative_eq!(erfc(1.999_999), erfc(2.000_001), max_relative = 1e-5);
    }
}
