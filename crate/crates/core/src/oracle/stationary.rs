//! Stationary distribution of a truncated generator.
//!
//! The solver restricts itself to the states reachable from the empty
//! state, which form the unique closed class of every chain built here, and
//! runs Gauss-Seidel sweeps on `pi Q = 0` with alternating direction.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::generator::Generator;
use crate::error::{Error, Result};

/// Truncation mass above which oracle readings are not trusted.
pub const TRUSTED_TRUNCATION_MASS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop once `max_j |(pi Q)_j|` falls below this.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-13,
            max_sweeps: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryResult {
    pub pi: Vec<f64>,
    /// Probability of states with some capped coordinate at its cap.
    pub truncation_mass: f64,
    pub mean_writes: f64,
    pub mean_reads: f64,
    pub residual: f64,
    pub sweeps: usize,
}

impl StationaryResult {
    pub fn is_trusted(&self) -> bool {
        self.truncation_mass <= TRUSTED_TRUNCATION_MASS
    }
}

pub fn stationary(g: &Generator) -> Result<StationaryResult> {
    stationary_with(g, SolverOptions::default())
}

pub fn stationary_with(g: &Generator, opts: SolverOptions) -> Result<StationaryResult> {
    let n = g.len();
    let reachable = reachable_from(g, g.origin);
    let active: Vec<usize> = (0..n).filter(|&i| reachable[i]).collect();
    let (in_ptr, in_src, in_rate) = g.incoming();

    let mut pi = vec![0.0; n];
    let (residual, sweeps) = if active.len() == 1 {
        pi[active[0]] = 1.0;
        (0.0, 0)
    } else {
        if let Some(&i) = active.iter().find(|&&i| g.diagonal[i] >= 0.0) {
            return Err(Error::Singular(format!(
                "state {:?} is absorbing inside the recurrent class",
                g.state(i)
            )));
        }
        let start = 1.0 / active.len() as f64;
        for &i in &active {
            pi[i] = start;
        }
        let update = |pi: &mut [f64], j: usize| {
            let span = in_ptr[j]..in_ptr[j + 1];
            let inflow: f64 = in_src[span.clone()]
                .iter()
                .zip(&in_rate[span])
                .map(|(&i, &r)| pi[i as usize] * r)
                .sum();
            pi[j] = inflow / -g.diagonal[j];
        };
        let mut sweeps = 0;
        let mut residual = f64::INFINITY;
        while sweeps < opts.max_sweeps {
            for _ in 0..4 {
                if sweeps % 2 == 0 {
                    active.iter().for_each(|&j| update(&mut pi, j));
                } else {
                    active.iter().rev().for_each(|&j| update(&mut pi, j));
                }
                sweeps += 1;
            }
            normalize(&mut pi);
            residual = balance_residual(g, &pi, &active, &in_ptr, &in_src, &in_rate);
            if residual <= opts.tolerance {
                break;
            }
        }
        if residual > opts.tolerance {
            return Err(Error::NoConvergence {
                iterations: sweeps,
                residual,
            });
        }
        (residual, sweeps)
    };

    let mut truncation_mass = 0.0;
    let mut mean_writes = 0.0;
    let mut mean_reads = 0.0;
    for &i in &active {
        let s = g.state(i);
        let p = pi[i];
        if g.layout.on_boundary(&s) {
            truncation_mass += p;
        }
        mean_writes += p * g.layout.write_coords.iter().map(|&k| s[k]).sum::<usize>() as f64;
        mean_reads += p * g.layout.read_coords.iter().map(|&k| s[k]).sum::<usize>() as f64;
    }
    Ok(StationaryResult {
        pi,
        truncation_mass,
        mean_writes,
        mean_reads,
        residual,
        sweeps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedCounts {
    pub mean_writes: f64,
    pub mean_reads: f64,
    /// False when the truncation mass exceeds [`TRUSTED_TRUNCATION_MASS`];
    /// the means are then biased low and the caps should be raised.
    pub trusted: bool,
}

pub fn expected_counts(res: &StationaryResult) -> ExpectedCounts {
    ExpectedCounts {
        mean_writes: res.mean_writes,
        mean_reads: res.mean_reads,
        trusted: res.is_trusted(),
    }
}

fn normalize(pi: &mut [f64]) {
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);
}

fn balance_residual(
    g: &Generator,
    pi: &[f64],
    active: &[usize],
    in_ptr: &[usize],
    in_src: &[u32],
    in_rate: &[f64],
) -> f64 {
    active
        .iter()
        .map(|&j| {
            let span = in_ptr[j]..in_ptr[j + 1];
            let inflow: f64 = in_src[span.clone()]
                .iter()
                .zip(&in_rate[span])
                .map(|(&i, &r)| pi[i as usize] * r)
                .sum();
            (inflow + pi[j] * g.diagonal[j]).abs()
        })
        .fold(0.0, f64::max)
}

fn reachable_from(g: &Generator, start: usize) -> Vec<bool> {
    let mut seen = vec![false; g.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(i) = queue.pop_front() {
        for (j, _) in g.row(i) {
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::tandem::TandemChain;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_state_chain() {
        let (a, b) = (2.0, 3.0);
        let g = Generator::from_transitions(2, [(0, 1, a), (1, 0, b)]).unwrap();
        let res = stationary(&g).unwrap();
        assert_abs_diff_eq!(res.pi[0], b / (a + b), epsilon = 1e-12);
        assert_abs_diff_eq!(res.pi[1], a / (a + b), epsilon = 1e-12);
    }

    #[test]
    fn mm1_mean_from_single_level() {
        let g = TandemChain::new(1, 0.6, 1.0, 60).build().unwrap();
        let res = stationary(&g).unwrap();
        assert_abs_diff_eq!(res.mean_writes, 1.5, epsilon = 1e-3);
        assert!(res.truncation_mass < 1e-6);
        assert_abs_diff_eq!(res.pi.iter().sum::<f64>(), 1.0, epsilon = 1e-10);
        assert!(res.residual <= 1e-8);
    }

    #[test]
    fn zero_arrivals_collapse_to_empty_state() {
        let g = TandemChain::new(2, 0.0, 1.0, 10).build().unwrap();
        let res = stationary(&g).unwrap();
        let counts = expected_counts(&res);
        assert_eq!((counts.mean_writes, counts.mean_reads), (0.0, 0.0));
        assert!(counts.trusted);
        assert_eq!(res.pi[g.origin], 1.0);
    }

    #[test]
    fn reports_non_convergence() {
        let g = TandemChain::new(2, 0.6, 1.0, 30).build().unwrap();
        let opts = SolverOptions {
            tolerance: 1e-15,
            max_sweeps: 4,
        };
        assert!(matches!(
            stationary_with(&g, opts),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn absorbing_state_inside_class_is_singular() {
        // 0 -> 1 -> 2 with 2 absorbing: nothing returns to the origin.
        let g = Generator::from_transitions(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert!(matches!(stationary(&g), Err(Error::Singular(_))));
    }
}
