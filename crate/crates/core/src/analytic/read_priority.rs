//! Mean request counts when reads preempt writes.
//!
//! Reads behave as independent M/M/1 queues, one per server, so `q(n)` is
//! exact. Writes are approximated by a chain of uncoupled M/M/1 stages whose
//! rates are thinned by the probability that a server holds no reads.

use serde::{Deserialize, Serialize};

use super::forkjoin::unpooled_rates;
use super::special::digamma;
use crate::error::{Error, Result};
use crate::params::{DerivedLoads, SystemParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpBreakdown {
    pub mean_write: f64,
    pub mean_read: f64,
    pub total: f64,
    /// Effective write rate at the primary.
    pub mu0: f64,
    /// Effective rates of the n tandem stages; the last one equals `mu0`.
    pub beta: Vec<f64>,
    pub delta_n: f64,
}

/// `q(n) = (n + 1) rho_r / (n + 1 - rho_r)`.
pub fn rp_mean_read(loads: &DerivedLoads, n: usize) -> Result<f64> {
    let m = n as f64 + 1.0;
    if loads.rho_r >= m {
        return Err(Error::Unstable(format!(
            "read load {} >= number of servers {m}",
            loads.rho_r
        )));
    }
    Ok(m * loads.rho_r / (m - loads.rho_r))
}

/// Primary rate `mu0` and tandem rates `beta` after thinning by the idle
/// probability `1 - rho_r / (n + 1)`.
pub fn rp_effective_rates(params: &SystemParams) -> (f64, Vec<f64>) {
    let l = params.loads();
    let idle = 1.0 - l.rho_r / (params.n as f64 + 1.0);
    let mu0 = params.mu_w * idle;
    let beta = unpooled_rates(params.n, params.lambda_w, params.mu_w)
        .into_iter()
        .map(|g| g * idle)
        .collect();
    (mu0, beta)
}

/// `p(n)`, the approximate mean number of unique writes, as a sum of M/M/1
/// means over the primary and the n tandem stages.
pub fn rp_mean_write(params: &SystemParams) -> Result<f64> {
    let (mu0, beta) = rp_effective_rates(params);
    let lw = params.lambda_w;
    if mu0 <= lw {
        return Err(Error::Unstable(format!(
            "effective primary write rate {mu0} <= lambda_w = {lw}"
        )));
    }
    // beta is decreasing, so the terms arrive smallest first.
    let tandem: f64 = beta.iter().map(|&b| lw / (b - lw)).sum();
    Ok(lw / (mu0 - lw) + tandem)
}

/// `Δ_n = 1 - rho_r nu / (n + 1 - rho_r)`.
pub fn rp_delta(loads: &DerivedLoads, n: usize) -> f64 {
    1.0 - loads.rho_r * loads.nu / (n as f64 + 1.0 - loads.rho_r)
}

/// `p(n)` through the digamma closed form. Agrees with [`rp_mean_write`] to
/// rounding error.
pub fn rp_mean_write_digamma(loads: &DerivedLoads, n: usize) -> Result<f64> {
    if loads.rho_w >= 1.0 {
        return Err(Error::Unstable(format!("write load {} >= 1", loads.rho_w)));
    }
    let m = n as f64 + 1.0;
    let nu = loads.nu;
    let head_denom = m - loads.rho_r * (1.0 + nu);
    let delta = rp_delta(loads, n);
    if head_denom <= 0.0 || delta <= 0.0 {
        return Err(Error::Unstable(format!("unstable at n = {n}")));
    }
    let head = m * nu / head_denom;
    if n == 0 {
        return Ok(head);
    }
    let tail = m * nu * (digamma(delta + n as f64)? - digamma(delta)?) / (m - loads.rho_r);
    Ok(head + tail)
}

pub fn rp_breakdown(params: &SystemParams) -> Result<RpBreakdown> {
    params.ensure_stable()?;
    let l = params.loads();
    let mean_write = rp_mean_write(params)?;
    let mean_read = rp_mean_read(&l, params.n)?;
    let (mu0, beta) = rp_effective_rates(params);
    Ok(RpBreakdown {
        mean_write,
        mean_read,
        total: mean_write + mean_read,
        mu0,
        beta,
        delta_n: rp_delta(&l, params.n),
    })
}

/// Sufficient condition for a strictly positive optimal redundancy.
pub fn rp_nonzero_redundancy(loads: &DerivedLoads) -> Result<bool> {
    let (rr, rw) = (loads.rho_r, loads.rho_w);
    if !(rw > 0.0) || rr < 0.0 || rr + rw >= 1.0 {
        return Err(Error::Domain(format!(
            "needs rho_w > 0 and rho_r + rho_w < 1 (rho_r = {rr}, rho_w = {rw})"
        )));
    }
    let lhs = 2.0 - rr / (1.0 - rr - rw);
    let rhs = rr * rr / (1.0 - rr) * (1.0 / rw - 2.0 / (2.0 - rr));
    Ok(lhs < rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn mean_read_examples() {
        let l = DerivedLoads::from_loads(0.36, 0.6, 10.0, 2);
        assert_abs_diff_eq!(rp_mean_read(&l, 2).unwrap(), 0.409091, epsilon = 1e-6);
        let l = DerivedLoads::from_loads(0.0, 0.6, 10.0, 7);
        assert_eq!(rp_mean_read(&l, 7).unwrap(), 0.0);
        let l = DerivedLoads::from_loads(0.5, 0.2, 1.0, 0);
        assert_abs_diff_eq!(rp_mean_read(&l, 0).unwrap(), 1.0, epsilon = 1e-12);
        let l = DerivedLoads::from_loads(1.5, 0.2, 1.0, 0);
        assert!(rp_mean_read(&l, 0).is_err());
    }

    #[test]
    fn effective_rate_examples() {
        let p = SystemParams::new(3.6, 0.6, 10.0, 1.0, 2).unwrap();
        let (mu0, beta) = rp_effective_rates(&p);
        assert_abs_diff_eq!(mu0, 0.88, epsilon = 1e-12);
        assert_abs_diff_eq!(beta[0], 1.232, epsilon = 1e-12);
        assert_abs_diff_eq!(beta[1], 0.88, epsilon = 1e-12);

        let p = SystemParams::new(0.0, 0.6, 10.0, 1.0, 2).unwrap();
        let (_, beta) = rp_effective_rates(&p);
        assert_eq!(beta, unpooled_rates(2, 0.6, 1.0));

        let p = SystemParams::new(3.6, 0.6, 10.0, 1.0, 0).unwrap();
        let (mu0, beta) = rp_effective_rates(&p);
        assert_abs_diff_eq!(mu0, 0.64, epsilon = 1e-12);
        assert!(beta.is_empty());
    }

    #[test]
    fn mean_write_examples() {
        let p = SystemParams::new(3.6, 0.6, 10.0, 1.0, 2).unwrap();
        // 0.6/0.28 + 0.6/0.28 + 0.6/0.632
        let hand = 0.6 / 0.28 + 0.6 / 0.28 + 0.6 / 0.632;
        assert_abs_diff_eq!(rp_mean_write(&p).unwrap(), hand, epsilon = 1e-12);
        assert_abs_diff_eq!(rp_mean_write(&p).unwrap(), 5.23508, epsilon = 1e-4);
        assert_relative_eq!(
            rp_mean_write_digamma(&p.loads(), 2).unwrap(),
            hand,
            max_relative = 1e-9
        );

        let p = SystemParams::new(0.0, 0.6, 10.0, 1.0, 0).unwrap();
        assert_abs_diff_eq!(rp_mean_write(&p).unwrap(), 1.5, epsilon = 1e-12);
        let p = SystemParams::new(3.6, 0.6, 10.0, 1.0, 0).unwrap();
        assert_abs_diff_eq!(rp_mean_write(&p).unwrap(), 15.0, epsilon = 1e-9);
    }

    #[test]
    fn mean_write_unstable() {
        let p = SystemParams::new(5.0, 0.6, 10.0, 1.0, 0).unwrap();
        assert!(matches!(rp_mean_write(&p), Err(Error::Unstable(_))));
        assert!(rp_mean_write_digamma(&p.loads(), 0).is_err());
    }

    #[test]
    fn breakdown_holds_digamma_parameter() {
        let p = SystemParams::new(3.6, 0.6, 10.0, 1.0, 2).unwrap();
        let b = rp_breakdown(&p).unwrap();
        assert_abs_diff_eq!(b.delta_n, 0.795455, epsilon = 1e-6);
        assert_eq!(*b.beta.last().unwrap(), b.mu0);
        assert_abs_diff_eq!(b.total, 5.6442, epsilon = 1e-4);
    }

    #[test]
    fn nonzero_redundancy_examples() {
        let l = DerivedLoads::from_loads(0.36, 0.6, 10.0, 0);
        assert!(rp_nonzero_redundancy(&l).unwrap());
        let l = DerivedLoads::from_loads(0.36, 0.192, 10.0, 0);
        assert!(!rp_nonzero_redundancy(&l).unwrap());
        let l = DerivedLoads::from_loads(1e-9, 0.5, 10.0, 0);
        assert!(!rp_nonzero_redundancy(&l).unwrap());
        let l = DerivedLoads::from_loads(0.5, 0.6, 10.0, 0);
        assert!(rp_nonzero_redundancy(&l).is_err());
    }
}
