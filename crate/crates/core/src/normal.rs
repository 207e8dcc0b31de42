//! Standard-normal helpers.

use libm::erfc;
use statrs::function::erf::erfc_inv;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Standard normal CDF.
#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Upper tail `1 - cdf(x)`, accurate for large positive `x`.
#[inline]
pub fn sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Standard normal quantile. Returns `-inf` at 0 and `+inf` at 1.
#[inline]
pub fn probit(p: f64) -> f64 {
    if p <= 0.0 {
        f64::NEG_INFINITY
    } else if p >= 1.0 {
        f64::INFINITY
    } else {
        -SQRT_2 * erfc_inv(2.0 * p)
    }
}

/// `ln cdf(x)`, finite for every finite `x`.
pub fn log_cdf(x: f64) -> f64 {
    if x > -30.0 {
        cdf(x).ln()
    } else {
        // asymptotic Mills-ratio expansion, relative error below 1e-10 here
        let x2 = x * x;
        -0.5 * x2 - (-x).ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() + (1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2)).ln()
    }
}

/// `ln(cdf(x) / sf(x))`.
pub fn log_odds(x: f64) -> f64 {
    log_cdf(x) - log_cdf(-x)
}

/// Mass of the standard normal on `(a, b]`, computed in the tail that keeps
/// precision.
pub fn interval_mass(a: f64, b: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    if a > 0.0 {
        sf(a) - sf(b)
    } else if b < 0.0 {
        cdf(b) - cdf(a)
    } else {
        1.0 - cdf(a) - sf(b)
    }
}
