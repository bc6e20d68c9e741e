//! Latency-optimal number of secondary servers.

use serde::{Deserialize, Serialize};

use super::read_priority::{rp_mean_read, rp_mean_write};
use super::write_priority::{wp_approx_forms, wp_mean_read, wp_mean_write, wp_xstar};
use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Hard cap on the number of candidates a scan evaluates.
pub const SCAN_CAP: usize = 1_000_000;
/// Consecutive increases past the incumbent that end a scan.
pub const SCAN_PATIENCE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OptimizerMethod {
    /// Compare the smooth surrogates at the floor and ceiling of x*.
    ClosedForm,
    /// Scan the exact write-priority objective over n.
    ExactScan,
    /// Scan the read-priority objective over n.
    NumericScan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalRedundancy {
    pub n_star: usize,
    pub total_servers: usize,
    /// Only set by [`OptimizerMethod::ClosedForm`].
    pub x_star: Option<f64>,
    pub mean_at_n_star: f64,
    pub method: OptimizerMethod,
}

impl OptimalRedundancy {
    fn new(n_star: usize, mean: f64, x_star: Option<f64>, method: OptimizerMethod) -> Self {
        Self {
            n_star,
            total_servers: n_star + 1,
            x_star,
            mean_at_n_star: mean,
            method,
        }
    }
}

/// Minimizes `objective` over n = 0, 1, 2, ... The scan ends once the
/// objective has risen strictly on each of the last [`SCAN_PATIENCE`] steps
/// and all of them sit above the incumbent minimum.
pub fn scan_minimum<F>(mut objective: F) -> Result<(usize, f64)>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut best_n = 0;
    let mut best = objective(0)?;
    let mut prev = best;
    let mut rising = 0;
    for n in 1..SCAN_CAP {
        let v = objective(n)?;
        if v < best {
            best = v;
            best_n = n;
            rising = 0;
        } else if v > prev {
            rising += 1;
        } else {
            rising = 0;
        }
        prev = v;
        if rising >= SCAN_PATIENCE {
            return Ok((best_n, best));
        }
    }
    Err(Error::ScanCap { cap: SCAN_CAP })
}

/// Optimal redundancy under write priority.
pub fn wp_optimal_n(params: &SystemParams, method: OptimizerMethod) -> Result<OptimalRedundancy> {
    params.ensure_stable_for_all_n()?;
    match method {
        OptimizerMethod::ClosedForm => wp_closed_form(params),
        OptimizerMethod::ExactScan => {
            let (n, v) = scan_minimum(|n| wp_exact_objective(params, n))?;
            Ok(OptimalRedundancy::new(n, v, None, method))
        }
        OptimizerMethod::NumericScan => Err(Error::Domain(
            "the numeric scan applies to read priority; use ExactScan".into(),
        )),
    }
}

pub fn wp_exact_objective(params: &SystemParams, n: usize) -> Result<f64> {
    let p = params.with_n(n);
    Ok(wp_mean_write(&p.loads(), n)? + wp_mean_read(&p)?)
}

fn wp_closed_form(params: &SystemParams) -> Result<OptimalRedundancy> {
    let loads = params.loads();
    let x = wp_xstar(&loads)?;
    let surrogate = |n: usize| -> Result<f64> {
        let (f, g) = wp_approx_forms(&loads.with_n(n), n)?;
        Ok(f + g)
    };
    let n_star = if x < 0.0 {
        0
    } else {
        let lo = x.floor() as usize;
        let hi = x.ceil() as usize;
        // Ties go to fewer servers.
        if surrogate(hi)? < surrogate(lo)? {
            hi
        } else {
            lo
        }
    };
    Ok(OptimalRedundancy::new(
        n_star,
        surrogate(n_star)?,
        Some(x),
        OptimizerMethod::ClosedForm,
    ))
}

pub fn rp_objective(params: &SystemParams, n: usize) -> Result<f64> {
    let p = params.with_n(n);
    Ok(rp_mean_write(&p)? + rp_mean_read(&p.loads(), n)?)
}

/// Optimal redundancy under read priority, by scanning `p(n) + q(n)`.
pub fn rp_optimal_n(params: &SystemParams) -> Result<OptimalRedundancy> {
    params.ensure_stable_for_all_n()?;
    let (n, v) = scan_minimum(|n| rp_objective(params, n))?;
    Ok(OptimalRedundancy::new(
        n,
        v,
        None,
        OptimizerMethod::NumericScan,
    ))
}
