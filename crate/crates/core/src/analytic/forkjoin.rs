//! Single-class (n, n) fork-join background: the lower-bound root and the
//! unpooled tandem rates used to approximate the pooled tandem chain.

use crate::error::{Error, Result};

const ETA_TOLERANCE: f64 = 1e-12;
const ETA_LOWER: f64 = 1e-300;
const ETA_UPPER_GAP: f64 = 1e-9;

/// Smallest root in (0, 1) of `x = exp(-mu (1 - x) / lambda)`.
///
/// `x = 1` always solves the equation; the bracket stops short of it so the
/// bisection converges to the nontrivial root.
pub fn forkjoin_eta(lambda: f64, mu: f64) -> Result<f64> {
    if !(lambda > 0.0 && mu > 0.0 && lambda.is_finite() && mu.is_finite()) {
        return Err(Error::Domain(format!(
            "rates must be positive and finite (lambda = {lambda}, mu = {mu})"
        )));
    }
    if lambda >= mu {
        return Err(Error::Domain(format!(
            "no root below 1 when lambda >= mu (lambda = {lambda}, mu = {mu})"
        )));
    }
    let h = |x: f64| x - (-mu * (1.0 - x) / lambda).exp();
    let mut lo = ETA_LOWER;
    let mut hi = 1.0 - ETA_UPPER_GAP;
    if h(lo) > 0.0 {
        // exp(-mu/lambda) underflowed: the root is numerically zero.
        return Ok(0.0);
    }
    if h(hi) <= 0.0 {
        return Err(Error::Domain(format!(
            "load lambda/mu = {} too close to 1 to separate the roots",
            lambda / mu
        )));
    }
    while hi - lo > ETA_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Service rates `(n - i) mu - (n - i - 1) lambda` for levels `i = 0..n` of
/// the unpooled tandem queue. The last level is served at `mu`.
pub fn unpooled_rates(n: usize, lambda: f64, mu: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let k = (n - i) as f64;
            k * mu - (k - 1.0) * lambda
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eta_reference_points() {
        let eta = forkjoin_eta(0.6, 1.0).unwrap();
        assert_abs_diff_eq!(eta, 0.324243266418988, epsilon = 1e-10);
        assert!((eta - (-(1.0 - eta) / 0.6f64).exp()).abs() <= 1e-10);

        let small = forkjoin_eta(0.1, 1.0).unwrap();
        // Light load: the root sits just above exp(-mu / lambda).
        assert_abs_diff_eq!(small, 4.542055534648269e-5, epsilon = 1e-10);

        assert!(forkjoin_eta(0.3, 1.0).unwrap() < eta);
    }

    #[test]
    fn eta_domain() {
        assert!(forkjoin_eta(1.0, 1.0).is_err());
        assert!(forkjoin_eta(2.0, 1.0).is_err());
        assert!(forkjoin_eta(0.0, 1.0).is_err());
    }

    #[test]
    fn eta_near_critical_load() {
        let eta = forkjoin_eta(0.99, 1.0).unwrap();
        assert!(eta < 1.0 - 1e-9);
        assert!((eta - (-(1.0 - eta) / 0.99f64).exp()).abs() <= 1e-10);
    }

    #[test]
    fn unpooled_rate_examples() {
        let r = unpooled_rates(2, 0.6, 1.0);
        assert_abs_diff_eq!(r[0], 1.4, epsilon = 1e-12);
        assert_abs_diff_eq!(r[1], 1.0, epsilon = 1e-12);
        assert_eq!(unpooled_rates(1, 0.3, 2.5), vec![2.5]);
        let r = unpooled_rates(3, 0.064, 1.0);
        for (got, want) in r.iter().zip([2.872, 1.936, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        assert!(unpooled_rates(0, 0.5, 1.0).is_empty());
    }
}
