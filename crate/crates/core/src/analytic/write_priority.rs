//! Mean request counts when writes preempt reads.
//!
//! Writes never see reads here, so the write side is a primary M/M/1 queue
//! feeding an (n, n) fork-join of secondaries. The write mean `f(n)` uses the
//! unpooled tandem approximation (which coincides with the fork-join upper
//! bound); the read mean `g(n)` is exact.

use serde::{Deserialize, Serialize};

use super::forkjoin::forkjoin_eta;
use super::special::harmonic;
use crate::error::{Error, Result};
use crate::params::{DerivedLoads, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WpBreakdown {
    pub mean_write: f64,
    pub mean_read: f64,
    pub total: f64,
    pub lower_bound_total: f64,
    pub upper_bound_total: f64,
    pub eta: f64,
}

fn check_write_load(rho_w: f64) -> Result<()> {
    if rho_w >= 1.0 {
        Err(Error::Unstable(format!("write load {rho_w} >= 1")))
    } else if rho_w < 0.0 || !rho_w.is_finite() {
        Err(Error::Domain(format!("invalid write load {rho_w}")))
    } else {
        Ok(())
    }
}

/// `f(n) = rho_w / (1 - rho_w) * (1 + H_n)`.
pub fn wp_mean_write(loads: &DerivedLoads, n: usize) -> Result<f64> {
    check_write_load(loads.rho_w)?;
    Ok(loads.rho_w / (1.0 - loads.rho_w) * (1.0 + harmonic(n)))
}

/// `g(n) = (n + 1) E[R_0]`, the exact mean number of reads summed over all
/// servers.
pub fn wp_mean_read(params: &SystemParams) -> Result<f64> {
    let l = params.loads();
    check_write_load(l.rho_w)?;
    let m = params.n as f64 + 1.0;
    let denom = m * (1.0 - l.rho_w) - l.rho_r;
    if denom <= 0.0 {
        return Err(Error::Unstable(format!(
            "(n+1)(1 - rho_w) = {} <= rho_r = {}",
            m * (1.0 - l.rho_w),
            l.rho_r
        )));
    }
    let per_server = l.rho_r / denom * (1.0 + l.alpha * l.rho_w / (1.0 - l.rho_w));
    Ok(m * per_server)
}

/// Smooth surrogates `(f~, g~)` used by the closed-form optimizer: the
/// harmonic sum replaced by `ln(n + 1)` and `1/(1 - x)` by `1 + x`.
pub fn wp_approx_forms(loads: &DerivedLoads, n: usize) -> Result<(f64, f64)> {
    check_write_load(loads.rho_w)?;
    let m = n as f64 + 1.0;
    if m * (1.0 - loads.rho_w) <= loads.rho_r {
        return Err(Error::Unstable(format!("unstable at n = {n}")));
    }
    let nu = loads.nu;
    let f = nu * (1.0 + m.ln());
    let s = loads.rho_r / (1.0 - loads.rho_w);
    let g = s * (1.0 + loads.alpha * nu) * (1.0 + s / m);
    Ok((f, g))
}

/// Real stationary point of `f~ + g~`; negative means zero redundancy.
pub fn wp_xstar(loads: &DerivedLoads) -> Result<f64> {
    if loads.rho_w <= 0.0 {
        return Err(Error::Domain("x* needs a positive write load".into()));
    }
    check_write_load(loads.rho_w)?;
    let nu = loads.nu;
    let a = loads.rho_r * (1.0 + nu);
    Ok(a * a * (1.0 / nu + loads.alpha) - 1.0)
}

/// Whether the optimal redundancy is zero.
pub fn wp_zero_redundancy(loads: &DerivedLoads) -> bool {
    let s = loads.rho_r / (1.0 - loads.rho_w);
    s * s * ((1.0 - loads.rho_w) / loads.rho_w + loads.alpha) < 1.0
}

/// Write load beyond which the optimal redundancy starts growing again.
/// Diagnostic only.
pub fn wp_write_load_threshold(alpha: f64, rho_r: f64) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(Error::Domain(format!(
            "threshold needs alpha > 1, got {alpha}"
        )));
    }
    if !(0.0..1.0).contains(&rho_r) {
        return Err(Error::Domain(format!(
            "read load must be in [0, 1), got {rho_r}"
        )));
    }
    let a1 = alpha - 1.0;
    let root = (-3.0 + (9.0 + 8.0 * a1).sqrt()) / (4.0 * a1);
    Ok(root.min(1.0 - rho_r))
}

/// Lower and upper bounds on the total mean number of requests. The upper
/// bound equals `f(n) + g(n)`.
pub fn wp_bounds(params: &SystemParams) -> Result<(f64, f64)> {
    let b = wp_breakdown(params)?;
    Ok((b.lower_bound_total, b.upper_bound_total))
}

pub fn wp_breakdown(params: &SystemParams) -> Result<WpBreakdown> {
    params.ensure_stable()?;
    let l = params.loads();
    let mean_write = wp_mean_write(&l, params.n)?;
    let mean_read = wp_mean_read(params)?;
    let (eta, fork_lower) = if params.n == 0 || l.rho_w == 0.0 {
        (0.0, 0.0)
    } else {
        let eta = forkjoin_eta(params.lambda_w, params.mu_w)?;
        (eta, l.rho_w * harmonic(params.n) / (1.0 - eta))
    };
    let primary = l.rho_w / (1.0 - l.rho_w);
    let total = mean_write + mean_read;
    Ok(WpBreakdown {
        mean_write,
        mean_read,
        total,
        lower_bound_total: primary + fork_lower + mean_read,
        upper_bound_total: total,
        eta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn loads(rho_r: f64, rho_w: f64, alpha: f64, n: usize) -> DerivedLoads {
        DerivedLoads::from_loads(rho_r, rho_w, alpha, n)
    }

    #[test]
    fn mean_write_examples() {
        assert_abs_diff_eq!(
            wp_mean_write(&loads(0.0, 0.6, 1.0, 0), 0).unwrap(),
            1.5,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            wp_mean_write(&loads(0.0, 0.6, 1.0, 3), 3).unwrap(),
            4.25,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            wp_mean_write(&loads(0.0, 0.5, 1.0, 1), 1).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert!(matches!(
            wp_mean_write(&loads(0.0, 1.0, 1.0, 1), 1),
            Err(Error::Unstable(_))
        ));
    }

    #[test]
    fn mean_read_examples() {
        let p = SystemParams::new(3.0, 0.6, 10.0, 1.0, 2).unwrap();
        assert_abs_diff_eq!(wp_mean_read(&p).unwrap(), 16.0, epsilon = 1e-9);
        let p = SystemParams::new(0.5, 0.0, 1.0, 1.0, 0).unwrap();
        assert_abs_diff_eq!(wp_mean_read(&p).unwrap(), 1.0, epsilon = 1e-12);
        let p = SystemParams::new(3.6, 0.6, 10.0, 1.0, 5).unwrap();
        assert_abs_diff_eq!(wp_mean_read(&p).unwrap(), 16.9412, epsilon = 1e-4);
        let p = SystemParams::new(9.0, 0.6, 10.0, 1.0, 0).unwrap();
        assert!(matches!(wp_mean_read(&p), Err(Error::Unstable(_))));
    }

    #[test]
    fn surrogate_examples() {
        let (f, _) = wp_approx_forms(&loads(0.0, 0.6, 10.0, 0), 0).unwrap();
        assert_abs_diff_eq!(f, 1.5, epsilon = 1e-12);
        let (f, g) = wp_approx_forms(&loads(0.28, 0.6, 10.0, 4), 4).unwrap();
        assert_abs_diff_eq!(f, 3.91416, epsilon = 1e-5);
        assert_abs_diff_eq!(g, 12.768, epsilon = 1e-9);
        let (f, g) = wp_approx_forms(&loads(0.28, 0.6, 10.0, 5), 5).unwrap();
        assert_abs_diff_eq!(f, 4.18764, epsilon = 1e-5);
        assert_abs_diff_eq!(g, 12.5067, epsilon = 1e-4);
    }

    #[test]
    fn xstar_examples() {
        assert_abs_diff_eq!(
            wp_xstar(&loads(0.36, 0.6, 10.0, 0)).unwrap(),
            7.64,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            wp_xstar(&loads(0.12, 0.6, 10.0, 0)).unwrap(),
            -0.04,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            wp_xstar(&loads(0.28, 0.6, 10.0, 0)).unwrap(),
            4.2267,
            epsilon = 1e-4
        );
        assert!(matches!(
            wp_xstar(&loads(0.3, 0.0, 10.0, 0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn zero_redundancy_examples() {
        assert!(wp_zero_redundancy(&loads(0.12, 0.6, 10.0, 0)));
        assert!(!wp_zero_redundancy(&loads(0.36, 0.6, 10.0, 0)));
        assert!(wp_zero_redundancy(&loads(0.0, 0.5, 1.0, 0)));
    }

    #[test]
    fn threshold_examples() {
        assert_abs_diff_eq!(
            wp_write_load_threshold(10.0, 0.36).unwrap(),
            1.0 / 6.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            wp_write_load_threshold(10.0, 0.9).unwrap(),
            0.1,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            wp_write_load_threshold(2.0, 0.0).unwrap(),
            (-3.0 + 17f64.sqrt()) / 4.0,
            epsilon = 1e-12
        );
        assert!(wp_write_load_threshold(1.0, 0.2).is_err());
    }

    #[test]
    fn bound_examples() {
        let p = SystemParams::new(0.0, 0.6, 10.0, 1.0, 3).unwrap();
        let (lo, hi) = wp_bounds(&p).unwrap();
        assert_abs_diff_eq!(lo, 3.1277, epsilon = 2e-3);
        assert_abs_diff_eq!(hi, 4.25, epsilon = 1e-12);

        let p = SystemParams::new(0.0, 0.6, 10.0, 1.0, 2).unwrap();
        let (lo, hi) = wp_bounds(&p).unwrap();
        assert_abs_diff_eq!(lo, 2.8318, epsilon = 2e-3);
        assert_abs_diff_eq!(hi, 3.75, epsilon = 1e-12);

        let p = SystemParams::new(0.0, 0.3, 10.0, 1.0, 0).unwrap();
        let (lo, hi) = wp_bounds(&p).unwrap();
        assert_abs_diff_eq!(lo, hi, epsilon = 1e-15);
        assert_abs_diff_eq!(lo, 0.3 / 0.7, epsilon = 1e-12);
    }
}
