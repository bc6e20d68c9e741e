//! Read/write latency versus redundancy in primary-secondary replicated
//! databases.
//!
//! Writes land on a primary and are then replicated to `n` secondaries; a
//! write completes once every secondary has applied it. Reads go to any of
//! the `n + 1` servers. More replicas spread the read load but make each
//! write wait on more servers. This crate quantifies that tradeoff three
//! ways:
//!
//! - [`analytic`]: closed-form mean request counts, bounds and the optimal
//!   replica count under read or write priority;
//! - [`oracle`]: exact stationary solutions of truncated Markov chains for
//!   small instances;
//! - [`sim`]: a discrete-event simulator with preemptive or non-preemptive
//!   priority, random or round-robin routing, and general service laws.

pub mod analytic;
pub mod error;
pub mod oracle;
pub mod params;
pub mod sim;

pub use error::{Error, Result};
pub use params::{derive_loads, DerivedLoads, SystemParams};

/// Which request class is served first at every server.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Priority {
    ReadPriority,
    WritePriority,
}
