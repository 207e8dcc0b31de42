//! Univariate truncated normal sampling on half-open intervals `(lower, upper]`.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::normal;

/// Beyond this many standard deviations the inverse-CDF route loses
/// precision and exponential rejection takes over.
const TAIL_START: f64 = 4.0;

/// Probability mass below which a two-sided interval is treated as a point.
pub const MIN_INTERVAL_MASS: f64 = 1e-14;

/// Draws from `N(mu, sigma^2)` truncated to `(lower, upper]`.
///
/// Either endpoint may be infinite. The returned value always satisfies
/// `lower < z <= upper`. Intervals whose normal mass is below
/// [`MIN_INTERVAL_MASS`] outside the exponential-tail regime return the
/// interval midpoint.
pub fn sample<R: Rng + ?Sized>(rng: &mut R, mu: f64, sigma: f64, lower: f64, upper: f64) -> f64 {
    debug_assert!(lower < upper, "empty interval ({lower}, {upper}]");
    debug_assert!(sigma > 0.0);
    let a = (lower - mu) / sigma;
    let b = (upper - mu) / sigma;
    let x = match standard(rng, a, b) {
        Some(x) => mu + sigma * x,
        None => 0.5 * (lower + upper),
    };
    clamp_into(x, lower, upper)
}

fn clamp_into(x: f64, lower: f64, upper: f64) -> f64 {
    if x <= lower {
        let up = lower.next_up();
        if up <= upper {
            up
        } else {
            upper
        }
    } else if x > upper {
        upper
    } else {
        x
    }
}

/// Standard normal on `(a, b]`; `None` signals the midpoint fallback.
fn standard<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> Option<f64> {
    if b <= -TAIL_START {
        return standard(rng, -b, -a).map(|x| -x);
    }
    if a >= TAIL_START {
        return Some(right_tail(rng, a, b));
    }
    let mass = normal::interval_mass(a, b);
    if !(mass >= MIN_INTERVAL_MASS) {
        return None;
    }
    let u: f64 = rng.random();
    let x = if a > 0.0 {
        let (lo, hi) = (normal::sf(b), normal::sf(a));
        -normal::probit(lo + u * (hi - lo))
    } else {
        let (lo, hi) = (normal::cdf(a), normal::cdf(b));
        normal::probit(lo + u * (hi - lo))
    };
    Some(x)
}

/// `a >= TAIL_START`; `b` may be infinite.
fn right_tail<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> f64 {
    let width = b - a;
    if width < 1.0 / a {
        // narrow slab: uniform proposal, acceptance >= exp(-1 - w^2/2)
        loop {
            let x = a + width * rng.random::<f64>();
            let log_accept = -0.5 * (x - a) * (x + a);
            if rng.random::<f64>().ln() < log_accept {
                return x;
            }
        }
    }
    // Robert (1995) translated-exponential proposal with the optimal rate
    let lambda = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let e: f64 = Exp1.sample(rng);
        let x = a + e / lambda;
        let d = x - lambda;
        if x <= b && rng.random::<f64>().ln() < -0.5 * d * d {
            return x;
        }
    }
}
