//! Discrete-event simulation of the primary-secondary read-write system.
//!
//! Reads are routed to one of the `n + 1` servers; writes are served by the
//! primary, then forked to every secondary and depart once all of them have
//! served it. Each server holds a FCFS queue per class and serves the
//! priority class first.

pub mod dist;
pub mod engine;
pub mod stats;

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

pub use dist::{load_samples, parse_samples, sample, ServiceDistribution};
pub use engine::{run_replication, ReplicationMetrics, ReplicationTrace};
pub use stats::mean_ci95;

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::Priority;

pub const DEFAULT_HORIZON: f64 = 2e5;
pub const DEFAULT_WARMUP_FRACTION: f64 = 0.2;
pub const DEFAULT_REPLICATIONS: usize = 20;
/// Relative Little's law gap tolerated on a stable run.
pub const LITTLE_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preemption {
    PreemptiveResume,
    NonPreemptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Routing {
    UniformRandom,
    /// One global counter over all servers, starting at the primary.
    RoundRobin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub priority: Priority,
    pub preemption: Preemption,
    pub routing: Routing,
}

impl PolicyConfig {
    pub fn new(priority: Priority, preemption: Preemption, routing: Routing) -> Self {
        Self {
            priority,
            preemption,
            routing,
        }
    }

    /// Preemptive-resume priority with uniform random routing.
    pub fn analytic(priority: Priority) -> Self {
        Self::new(
            priority,
            Preemption::PreemptiveResume,
            Routing::UniformRandom,
        )
    }

    /// Non-preemptive priority with round-robin routing.
    pub fn practical(priority: Priority) -> Self {
        Self::new(priority, Preemption::NonPreemptive, Routing::RoundRobin)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Arrival rates and `n`. The service rates only matter through the
    /// distributions below.
    pub params: SystemParams,
    pub policy: PolicyConfig,
    pub read_dist: ServiceDistribution,
    pub write_dist: ServiceDistribution,
    pub horizon: f64,
    pub warmup_fraction: f64,
    pub replications: usize,
    pub seed: u64,
    /// Record per-secondary completion orders and an event digest.
    pub trace: bool,
}

impl SimConfig {
    /// Exponential services at `params.mu_r` and `params.mu_w`, default run
    /// length.
    pub fn exponential(params: SystemParams, policy: PolicyConfig) -> Result<Self> {
        params.validate()?;
        let cfg = Self {
            params,
            policy,
            read_dist: ServiceDistribution::exponential(params.mu_r)?,
            write_dist: ServiceDistribution::exponential(params.mu_w)?,
            horizon: DEFAULT_HORIZON,
            warmup_fraction: DEFAULT_WARMUP_FRACTION,
            replications: DEFAULT_REPLICATIONS,
            seed: 0,
            trace: false,
        };
        Ok(cfg)
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self {
            params: self.params.with_n(n),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        for (name, v) in [("lambda_r", p.lambda_r), ("lambda_w", p.lambda_w)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        self.read_dist.validate()?;
        self.write_dist.validate()?;
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(Error::InvalidParameter(format!(
                "warmup_fraction must lie in [0, 1), got {}",
                self.warmup_fraction
            )));
        }
        if self.replications == 0 {
            return Err(Error::InvalidParameter(
                "replications must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// `1 - rho_w - rho_r / (n + 1)` with loads taken from the service
    /// distribution means.
    pub fn stability_margin(&self) -> f64 {
        let p = &self.params;
        let rho_r = p.lambda_r * self.read_dist.mean();
        let rho_w = p.lambda_w * self.write_dist.mean();
        1.0 - rho_w - rho_r / (p.n as f64 + 1.0)
    }
}

/// 95% confidence halfwidths of the aggregated metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiHalfwidths {
    pub mean_total: f64,
    pub mean_read: f64,
    pub mean_write: f64,
    pub sojourn_read: f64,
    pub sojourn_write: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub mean_total: f64,
    pub mean_read: f64,
    pub mean_write: f64,
    pub sojourn_read: f64,
    pub sojourn_write: f64,
    /// `None` with a single replication.
    pub ci_halfwidth: Option<CiHalfwidths>,
    pub effective_lambda_read: f64,
    pub effective_lambda_write: f64,
    pub events_processed: u64,
    pub replications: usize,
    pub seed: u64,
    pub stability_margin: f64,
    /// Largest relative Little's law gap over replications, reads then
    /// writes. See [`SimResult::satisfies_littles_law`].
    pub littles_law_gap: (f64, f64),
    pub traces: Vec<ReplicationTrace>,
}

impl SimResult {
    pub fn from_replications(config: &SimConfig, reps: Vec<ReplicationMetrics>) -> Result<Self> {
        if reps.is_empty() {
            return Err(Error::InvalidParameter(
                "no replications to aggregate".into(),
            ));
        }
        let column =
            |f: fn(&ReplicationMetrics) -> f64| mean_ci95(&reps.iter().map(f).collect::<Vec<_>>());
        let (mean_read, h_read) = column(|r| r.mean_read);
        let (mean_write, h_write) = column(|r| r.mean_write);
        let (mean_total, h_total) = column(|r| r.mean_total);
        let (sojourn_read, h_sr) = column(|r| r.sojourn_read);
        let (sojourn_write, h_sw) = column(|r| r.sojourn_write);
        let ci_halfwidth = match (h_total, h_read, h_write, h_sr, h_sw) {
            (Some(t), Some(r), Some(w), Some(sr), Some(sw)) => Some(CiHalfwidths {
                mean_total: t,
                mean_read: r,
                mean_write: w,
                sojourn_read: sr,
                sojourn_write: sw,
            }),
            _ => None,
        };
        let littles_law_gap = reps
            .iter()
            .map(|r| r.littles_law_gaps())
            .fold((0.0f64, 0.0f64), |acc, g| (acc.0.max(g.0), acc.1.max(g.1)));
        let result = Self {
            mean_total,
            mean_read,
            mean_write,
            sojourn_read,
            sojourn_write,
            ci_halfwidth,
            effective_lambda_read: column(|r| r.effective_lambda_read).0,
            effective_lambda_write: column(|r| r.effective_lambda_write).0,
            events_processed: reps.iter().map(|r| r.events_processed).sum(),
            replications: reps.len(),
            seed: config.seed,
            stability_margin: config.stability_margin(),
            littles_law_gap,
            traces: reps.into_iter().filter_map(|r| r.trace).collect(),
        };
        debug_assert!(
            (result.mean_total - result.mean_read - result.mean_write).abs()
                <= 1e-9 * result.mean_total.max(1.0)
        );
        Ok(result)
    }

    pub fn is_stable(&self) -> bool {
        self.stability_margin > 0.0
    }

    pub fn satisfies_littles_law(&self) -> bool {
        self.littles_law_gap.0 <= LITTLE_TOLERANCE && self.littles_law_gap.1 <= LITTLE_TOLERANCE
    }

    /// Little's law mean latency over both classes.
    pub fn mean_latency(&self) -> f64 {
        let lambda = self.effective_lambda_read + self.effective_lambda_write;
        if lambda > 0.0 {
            self.mean_total / lambda
        } else {
            0.0
        }
    }
}

/// Seed of replication `index` derived from the master seed (SplitMix64
/// finalizer over the pair).
pub fn replication_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Runs `config.replications` independent replications and aggregates them.
/// Unstable configurations still run; check [`SimResult::is_stable`].
pub fn run(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let one = |i: usize| run_replication(config, replication_seed(config.seed, i as u64));
    #[cfg(feature = "parallel")]
    let reps: Vec<ReplicationMetrics> = {
        use rayon::prelude::*;
        (0..config.replications).into_par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let reps: Vec<ReplicationMetrics> = (0..config.replications).map(one).collect();
    SimResult::from_replications(config, reps)
}

/// Simulated minimizer of `mean_total` over `n_range`. Unstable `n` are
/// skipped and do not appear in the curve.
pub fn empirical_optimal_n(
    base: &SimConfig,
    n_range: RangeInclusive<usize>,
) -> Result<(usize, Vec<(usize, SimResult)>)> {
    let mut curve = Vec::new();
    for n in n_range.clone() {
        let cfg = base.with_n(n);
        if cfg.stability_margin() <= 0.0 {
            continue;
        }
        curve.push((n, run(&cfg)?));
    }
    let best = curve
        .iter()
        .min_by(|a, b| a.1.mean_total.total_cmp(&b.1.mean_total))
        .map(|(n, _)| *n)
        .ok_or_else(|| {
            Error::Unstable(format!(
                "no n in {}..={} is stable",
                n_range.start(),
                n_range.end()
            ))
        })?;
    Ok((best, curve))
}
