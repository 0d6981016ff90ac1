//! Hypergeometric functions: ₁F₁, ₂F₁ and Appell's F₂ double series.

use crate::error::{Error, Result};
use crate::specfun::gamma::ln_gamma;

const TOL: f64 = 1e-14;
const MAX_TERMS: usize = 100_000;

fn is_nonpositive_int(a: f64) -> bool {
    a <= 0.0 && a == a.round()
}

/// Confluent hypergeometric function ₁F₁(a; b; x), b > 0.
///
/// Negative arguments go through the Kummer transformation
/// ₁F₁(a;b;x) = e^x ₁F₁(b−a;b;−x) so the summed series has a nonnegative
/// argument and no alternating cancellation.
pub fn kummer_1f1(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::domain(format!("kummer_1f1: b must be > 0, got {b}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x < 0.0 && !is_nonpositive_int(a) {
        return Ok(x.exp() * kummer_1f1_series(b - a, b, -x)?);
    }
    kummer_1f1_series(a, b, x)
}

fn kummer_1f1_series(a: f64, b: f64, x: f64) -> Result<f64> {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut small_streak = 0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) / (b + kf) * x / (kf + 1.0);
        sum += term;
        if term == 0.0 {
            return Ok(sum); // terminating (polynomial) case
        }
        if term.abs() <= TOL * sum.abs() {
            small_streak += 1;
            if small_streak >= 2 {
                return Ok(sum);
            }
        } else {
            small_streak = 0;
        }
    }
    Err(Error::no_convergence(format!(
        "kummer_1f1({a}, {b}, {x}) did not converge in {MAX_TERMS} terms"
    )))
}

/// ln ₁F₁(a; b; x) for a, b > 0 and x ≥ 0.
///
/// All series terms are positive, so the sum is rescaled into log space
/// whenever it threatens to overflow; usable far beyond the f64 range of
/// the plain series (e.g. ₁F₁ arguments in the thousands).
pub fn ln_kummer_1f1_pos(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && x >= 0.0) {
        return Err(Error::domain(format!(
            "ln_kummer_1f1_pos: need a, b > 0 and x >= 0, got {a}, {b}, {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    const MAX_TERMS_POS: usize = 2_000_000;
    let mut log_scale = 0.0f64;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut small_streak = 0;
    for k in 0..MAX_TERMS_POS {
        let kf = k as f64;
        term *= (a + kf) / (b + kf) * x / (kf + 1.0);
        sum += term;
        if sum > 1e250 {
            log_scale += sum.ln();
            term /= sum;
            sum = 1.0;
        }
        if term <= TOL * sum {
            small_streak += 1;
            if small_streak >= 2 {
                return Ok(log_scale + sum.ln());
            }
        } else {
            small_streak = 0;
        }
    }
    Err(Error::no_convergence(format!(
        "ln_kummer_1f1_pos({a}, {b}, {x}) did not converge in {MAX_TERMS_POS} terms"
    )))
}

/// Gauss hypergeometric function ₂F₁(a, b; c; z) for z < 1, c > 0.
///
/// Negative arguments are mapped through the Pfaff transformation
/// ₂F₁(a,b;c;z) = (1−z)^{−a} ₂F₁(a, c−b; c; z/(z−1)) into [0, 1).
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::domain(format!("gauss_2f1: c must be > 0, got {c}")));
    }
    if !(z < 1.0) {
        return Err(Error::domain(format!("gauss_2f1: z must be < 1, got {z}")));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    // terminating series needs no transformation
    if is_nonpositive_int(a) || is_nonpositive_int(b) {
        return gauss_2f1_series(a, b, c, z);
    }
    if z < 0.0 {
        // apply Pfaff on whichever upper parameter gives the milder prefactor
        let (p, q) = if a.abs() <= b.abs() { (a, b) } else { (b, a) };
        let w = z / (z - 1.0);
        return Ok((1.0 - z).powf(-p) * gauss_2f1_pos(p, c - q, c, w)?);
    }
    gauss_2f1_pos(a, b, c, z)
}

/// Γ(x) for any non-integer real x, via reflection for x ≤ 0.
fn gamma_real(x: f64) -> Result<f64> {
    if x > 0.0 {
        return Ok(ln_gamma(x).exp());
    }
    if is_nonpositive_int(x) {
        return Err(Error::domain(format!("gamma_real: pole at {x}")));
    }
    let pi = std::f64::consts::PI;
    Ok(pi / ((pi * x).sin() * ln_gamma(1.0 - x).exp()))
}

/// ₂F₁ for z ∈ [0, 1): direct series, or the 1−z connection formula when z
/// is close to 1 and c−a−b is not an integer (where the direct series
/// converges too slowly).
fn gauss_2f1_pos(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let s = c - a - b;
    if z <= 0.95 || (s - s.round()).abs() < 1e-8 {
        return gauss_2f1_series(a, b, c, z);
    }
    let gc = gamma_real(c)?;
    let t1 = gc * gamma_real(s)? / (gamma_real(c - a)? * gamma_real(c - b)?)
        * gauss_2f1_series(a, b, 1.0 - s, 1.0 - z)?;
    let t2 = (1.0 - z).powf(s) * gc * gamma_real(-s)? / (gamma_real(a)? * gamma_real(b)?)
        * gauss_2f1_series(c - a, c - b, 1.0 + s, 1.0 - z)?;
    Ok(t1 + t2)
}

fn gauss_2f1_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut small_streak = 0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / (c + kf) * z / (kf + 1.0);
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        if term.abs() <= TOL * sum.abs() {
            small_streak += 1;
            if small_streak >= 2 {
                return Ok(sum);
            }
        } else {
            small_streak = 0;
        }
    }
    Err(Error::no_convergence(format!(
        "gauss_2f1({a}, {b}, {c}, {z}) did not converge in {MAX_TERMS} terms"
    )))
}

/// Appell's F₂ double hypergeometric series, summed by diagonal blocks.
///
/// Requires |x| + |y| < 1 (the convergence region of the double series).
pub fn appell_f2(
    alpha: f64,
    beta: f64,
    beta2: f64,
    gamma1: f64,
    gamma2: f64,
    x: f64,
    y: f64,
) -> Result<f64> {
    if !(gamma1 > 0.0 && gamma2 > 0.0) {
        return Err(Error::domain(format!(
            "appell_f2: gamma1, gamma2 must be > 0, got {gamma1}, {gamma2}"
        )));
    }
    if x.abs() + y.abs() >= 1.0 {
        return Err(Error::divergent(format!(
            "appell_f2: |x|+|y| = {} >= 1",
            x.abs() + y.abs()
        )));
    }
    const MAX_BLOCKS: usize = 10_000;
    const BLOCK_TOL: f64 = 1e-12;

    // diag[m] = term(m, s-m) on the current diagonal m+n = s
    let mut diag = vec![1.0f64];
    let mut sum = 1.0f64;
    let mut small_streak = 0;
    for s in 0..MAX_BLOCKS {
        let sf = s as f64;
        let mut next = vec![0.0f64; s + 2];
        for (m, &t) in diag.iter().enumerate() {
            let n = sf - m as f64;
            // increment n by one
            next[m] = t * (alpha + sf) * (beta2 + n) / ((n + 1.0) * (gamma2 + n)) * y;
        }
        // new corner term (m = s+1, n = 0)
        next[s + 1] =
            diag[s] * (alpha + sf) * (beta + sf) / ((sf + 1.0) * (gamma1 + sf)) * x;
        let block: f64 = next.iter().sum();
        sum += block;
        diag = next;
        if block.abs() <= BLOCK_TOL * sum.abs() {
            small_streak += 1;
            if small_streak >= 3 {
                return Ok(sum);
            }
        } else {
            small_streak = 0;
        }
    }
    Err(Error::no_convergence(format!(
        "appell_f2 did not converge in {MAX_BLOCKS} diagonal blocks (x={x}, y={y})"
    )))
}
