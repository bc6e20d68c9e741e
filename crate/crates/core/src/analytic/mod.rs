//! Closed-form latency models, bounds, and optimal-redundancy solvers for
//! both priority disciplines.

pub mod forkjoin;
pub mod optimize;
pub mod read_priority;
pub mod special;
pub mod write_priority;

pub use forkjoin::{forkjoin_eta, unpooled_rates};
pub use optimize::{
    rp_objective, rp_optimal_n, scan_minimum, wp_exact_objective, wp_optimal_n, OptimalRedundancy,
    OptimizerMethod,
};
pub use read_priority::{
    rp_breakdown, rp_delta, rp_effective_rates, rp_mean_read, rp_mean_write, rp_mean_write_digamma,
    rp_nonzero_redundancy, RpBreakdown,
};
pub use special::{digamma, harmonic};
pub use write_priority::{
    wp_approx_forms, wp_bounds, wp_breakdown, wp_mean_read, wp_mean_write, wp_write_load_threshold,
    wp_xstar, wp_zero_redundancy, WpBreakdown,
};
