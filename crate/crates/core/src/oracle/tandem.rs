//! The pooled tandem chain of an (n, n) fork-join queue.
//!
//! Level `i` holds the requests already served by exactly `i` of the `n`
//! servers. FCFS makes the sets of servers that have served successive
//! requests nested, so a level is served by its own dedicated server plus
//! every server pooled up from empty levels downstream.

use super::generator::{Generator, StateLayout, DEFAULT_STATE_LIMIT};
use crate::error::{Error, Result};

pub const MAX_TANDEM_LEVELS: usize = 4;
pub const MIN_TANDEM_CAP: usize = 10;

/// Number of servers working on the head request of each level:
/// `N_{n-1} = 1` and `N_i = 1 + N_{i+1}` when level `i + 1` is empty.
pub fn available_servers(y: &[usize]) -> Vec<usize> {
    let n = y.len();
    let mut out = vec![1; n];
    for i in (0..n.saturating_sub(1)).rev() {
        if y[i + 1] == 0 {
            out[i] = 1 + out[i + 1];
        }
    }
    out
}

/// Configuration of a write-priority oracle chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TandemChain {
    pub n: usize,
    pub lambda: f64,
    pub mu: f64,
    pub cap: usize,
    /// Prepend the primary's M/M/1 queue as an extra coordinate.
    pub with_primary: bool,
    pub state_limit: usize,
}

impl TandemChain {
    pub fn new(n: usize, lambda: f64, mu: f64, cap: usize) -> Self {
        Self {
            n,
            lambda,
            mu,
            cap,
            with_primary: false,
            state_limit: DEFAULT_STATE_LIMIT,
        }
    }

    pub fn with_primary(self, with_primary: bool) -> Self {
        Self {
            with_primary,
            ..self
        }
    }

    pub fn build(&self) -> Result<Generator> {
        let n = self.n;
        if !(1..=MAX_TANDEM_LEVELS).contains(&n) {
            return Err(Error::InvalidParameter(format!(
                "tandem oracle supports 1..={MAX_TANDEM_LEVELS} levels, got {n}"
            )));
        }
        if self.cap < MIN_TANDEM_CAP {
            return Err(Error::InvalidParameter(format!(
                "cap must be at least {MIN_TANDEM_CAP}, got {}",
                self.cap
            )));
        }
        if !(self.mu > 0.0) || !(self.lambda >= 0.0) || self.lambda >= self.mu {
            return Err(Error::Unstable(format!(
                "tandem oracle needs 0 <= lambda < mu (lambda = {}, mu = {})",
                self.lambda, self.mu
            )));
        }
        let offset = usize::from(self.with_primary);
        let dims = n + offset;
        let mut names = Vec::with_capacity(dims);
        if self.with_primary {
            names.push("w0");
        }
        names.extend(["y0", "y1", "y2", "y3"].into_iter().take(n));
        let layout = StateLayout {
            names,
            radix: vec![self.cap + 1; dims],
            capped: vec![true; dims],
            write_coords: (0..dims).collect(),
            read_coords: vec![],
        };
        let (lambda, mu, with_primary) = (self.lambda, self.mu, self.with_primary);
        Generator::build(
            layout,
            self.state_limit,
            |_| true,
            move |s, emit| {
                let mut t = s.to_vec();
                t[0] += 1;
                emit(t, lambda);
                if with_primary && s[0] > 0 {
                    let mut t = s.to_vec();
                    t[0] -= 1;
                    t[1] += 1;
                    emit(t, mu);
                }
                let y = &s[offset..];
                let pooled = available_servers(y);
                for i in 0..n {
                    if y[i] == 0 {
                        continue;
                    }
                    let mut t = s.to_vec();
                    t[offset + i] -= 1;
                    if i + 1 < n {
                        t[offset + i + 1] += 1;
                    }
                    emit(t, pooled[i] as f64 * mu);
                }
            },
        )
    }
}

/// Pooled tandem generator for `n` fork-join levels without the primary.
pub fn build_wp_tandem_generator(n: usize, lambda: f64, mu: f64, cap: usize) -> Result<Generator> {
    TandemChain::new(n, lambda, mu, cap).build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pooling_examples() {
        assert_eq!(available_servers(&[2, 0]), vec![2, 1]);
        assert_eq!(available_servers(&[1, 3]), vec![1, 1]);
        assert_eq!(available_servers(&[5]), vec![1]);
        assert_eq!(available_servers(&[0, 0, 0]), vec![3, 2, 1]);
        assert_eq!(available_servers(&[1, 0, 2, 0]), vec![2, 1, 2, 1]);
    }

    #[test]
    fn single_level_is_birth_death() {
        let g = build_wp_tandem_generator(1, 0.6, 1.0, 12).unwrap();
        assert_eq!(g.len(), 13);
        assert_eq!(g.outgoing(&[0]), vec![(vec![1], 0.6)]);
        assert_eq!(g.outgoing(&[5]), vec![(vec![4], 1.0), (vec![6], 0.6)]);
        // Arrivals at the cap are dropped.
        assert_eq!(g.outgoing(&[12]), vec![(vec![11], 1.0)]);
    }

    #[test]
    fn two_level_transitions() {
        let g = build_wp_tandem_generator(2, 0.6, 1.0, 10).unwrap();
        let mut out = g.outgoing(&[1, 0]);
        out.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(out, vec![(vec![0, 1], 2.0), (vec![2, 0], 0.6)]);

        let mut out = g.outgoing(&[1, 1]);
        out.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(
            out,
            vec![(vec![0, 2], 1.0), (vec![1, 0], 1.0), (vec![2, 1], 0.6)]
        );
        assert!(g.max_row_sum() < 1e-12);
    }

    #[test]
    fn rejects_out_of_range_configs() {
        assert!(build_wp_tandem_generator(5, 0.5, 1.0, 10).is_err());
        assert!(build_wp_tandem_generator(0, 0.5, 1.0, 10).is_err());
        assert!(build_wp_tandem_generator(2, 0.5, 1.0, 5).is_err());
        assert!(matches!(
            build_wp_tandem_generator(2, 1.5, 1.0, 10),
            Err(Error::Unstable(_))
        ));
        let big = TandemChain {
            state_limit: 1000,
            ..TandemChain::new(3, 0.5, 1.0, 20)
        };
        assert!(matches!(big.build(), Err(Error::StateSpaceTooLarge { .. })));
    }
}
