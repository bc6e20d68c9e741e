//! Exact stationary analysis of truncated Markov chains, used as ground
//! truth for the closed-form approximations on small instances.

pub mod generator;
pub mod read_priority;
pub mod stationary;
pub mod tandem;

pub use generator::{Generator, StateLayout, DEFAULT_STATE_LIMIT};
pub use read_priority::{build_rp_generator, HeadServer, RpCaps, RpLumpedState};
pub use stationary::{
    expected_counts, stationary, stationary_with, ExpectedCounts, SolverOptions, StationaryResult,
    TRUSTED_TRUNCATION_MASS,
};
pub use tandem::{available_servers, build_wp_tandem_generator, TandemChain};
