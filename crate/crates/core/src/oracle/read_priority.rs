//! Exact read-priority chain for one or two secondaries.
//!
//! The general state keeps, for every forked write, the set of secondaries
//! that already served it. These sets are nested, and with at most two
//! secondaries every set is empty or a single server. So the sequence
//! collapses to two level counts plus the identity of the secondary that
//! served the level-1 batch.
//!
//! Coordinates, in order: `w0, y0, [y1, head], r0, ..., rn`, where `head`
//! is 0 for none, otherwise the 1-based secondary index.

use super::generator::{Generator, StateLayout, DEFAULT_STATE_LIMIT};
use crate::error::{Error, Result};
use crate::params::SystemParams;

pub const DEFAULT_WRITE_CAP: usize = 40;
pub const DEFAULT_READ_CAP: usize = 25;

/// Identity of the secondary that has served the oldest forked write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadServer {
    None,
    Server1,
    Server2,
}

impl HeadServer {
    pub fn code(self) -> usize {
        match self {
            HeadServer::None => 0,
            HeadServer::Server1 => 1,
            HeadServer::Server2 => 2,
        }
    }

    pub fn from_code(code: usize) -> Self {
        match code {
            1 => HeadServer::Server1,
            2 => HeadServer::Server2,
            _ => HeadServer::None,
        }
    }
}

/// A decoded read-priority state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RpLumpedState {
    pub w0: usize,
    pub y0: usize,
    pub y1: usize,
    pub head_server: HeadServer,
    pub r: Vec<usize>,
}

impl RpLumpedState {
    pub fn coords(&self) -> Vec<usize> {
        let mut c = vec![self.w0, self.y0];
        if self.r.len() == 3 {
            c.push(self.y1);
            c.push(self.head_server.code());
        }
        c.extend(&self.r);
        c
    }

    pub fn from_coords(coords: &[usize], n: usize) -> Self {
        if n == 1 {
            Self {
                w0: coords[0],
                y0: coords[1],
                y1: 0,
                head_server: HeadServer::None,
                r: coords[2..].to_vec(),
            }
        } else {
            Self {
                w0: coords[0],
                y0: coords[1],
                y1: coords[2],
                head_server: HeadServer::from_code(coords[3]),
                r: coords[4..].to_vec(),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpCaps {
    pub write: usize,
    pub read: usize,
}

impl Default for RpCaps {
    fn default() -> Self {
        Self {
            write: DEFAULT_WRITE_CAP,
            read: DEFAULT_READ_CAP,
        }
    }
}

/// Generator of the read-priority chain for `params.n` in {1, 2}.
pub fn build_rp_generator(params: &SystemParams, caps: RpCaps) -> Result<Generator> {
    build_rp_generator_with_limit(params, caps, DEFAULT_STATE_LIMIT)
}

pub fn build_rp_generator_with_limit(
    params: &SystemParams,
    caps: RpCaps,
    limit: usize,
) -> Result<Generator> {
    params.validate()?;
    let n = params.n;
    if !(1..=2).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "read-priority oracle supports n in 1..=2, got {n}"
        )));
    }
    params.ensure_stable()?;
    let w = caps.write + 1;
    let r = caps.read + 1;
    let (names, radix, capped, write_coords, read_start) = if n == 1 {
        (
            vec!["w0", "y0", "r0", "r1"],
            vec![w, w, r, r],
            vec![true; 4],
            vec![0, 1],
            2,
        )
    } else {
        (
            vec!["w0", "y0", "y1", "head", "r0", "r1", "r2"],
            vec![w, w, w, 3, r, r, r],
            vec![true, true, true, false, true, true, true],
            vec![0, 1, 2],
            4,
        )
    };
    let dims = radix.len();
    let layout = StateLayout {
        names,
        radix,
        capped,
        write_coords,
        read_coords: (read_start..dims).collect(),
    };
    let SystemParams {
        lambda_r,
        lambda_w,
        mu_r,
        mu_w,
        ..
    } = *params;
    let read_arrival = lambda_r / (n as f64 + 1.0);

    let valid = move |s: &[usize]| n == 1 || ((s[3] == 0) == (s[2] == 0));
    Generator::build(layout, limit, valid, move |s, emit| {
        let reads = &s[read_start..];
        for j in 0..=n {
            let mut t = s.to_vec();
            t[read_start + j] += 1;
            emit(t, read_arrival);
            if reads[j] > 0 {
                let mut t = s.to_vec();
                t[read_start + j] -= 1;
                emit(t, mu_r);
            }
        }
        let mut t = s.to_vec();
        t[0] += 1;
        emit(t, lambda_w);
        // Primary completion forks the write to every secondary.
        if s[0] > 0 && reads[0] == 0 {
            let mut t = s.to_vec();
            t[0] -= 1;
            t[1] += 1;
            emit(t, mu_w);
        }
        if n == 1 {
            if s[1] > 0 && reads[1] == 0 {
                let mut t = s.to_vec();
                t[1] -= 1;
                emit(t, mu_w);
            }
            return;
        }
        let (y0, y1, head) = (s[1], s[2], s[3]);
        for server in 1..=2 {
            if reads[server] > 0 {
                continue;
            }
            if y1 > 0 {
                let mut t = s.to_vec();
                if server != head {
                    // The other secondary finishes the oldest write.
                    t[2] -= 1;
                    if t[2] == 0 {
                        t[3] = 0;
                    }
                    emit(t, mu_w);
                } else if y0 > 0 {
                    // The head server moves on to the oldest level-0 write.
                    t[1] -= 1;
                    t[2] += 1;
                    emit(t, mu_w);
                }
            } else if y0 > 0 {
                let mut t = s.to_vec();
                t[1] -= 1;
                t[2] = 1;
                t[3] = server;
                emit(t, mu_w);
            }
        }
    })
}
