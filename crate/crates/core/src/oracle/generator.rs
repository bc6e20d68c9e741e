//! Sparse generator matrices over truncated, mixed-radix state spaces.

use crate::error::{Error, Result};

/// Default upper bound on the number of states a builder will enumerate.
pub const DEFAULT_STATE_LIMIT: usize = 4_000_000;

const INVALID: u32 = u32::MAX;

/// Coordinates of a truncated state space. Each coordinate `k` ranges over
/// `0..radix[k]`; `capped[k]` marks coordinates whose top value is a
/// truncation boundary rather than a genuine maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct StateLayout {
    pub names: Vec<&'static str>,
    pub radix: Vec<usize>,
    pub capped: Vec<bool>,
    /// Coordinates counted as unique write requests.
    pub write_coords: Vec<usize>,
    /// Coordinates counted as read requests.
    pub read_coords: Vec<usize>,
}

impl StateLayout {
    pub fn dims(&self) -> usize {
        self.radix.len()
    }

    fn full_size(&self) -> Option<usize> {
        self.radix
            .iter()
            .try_fold(1usize, |acc, &r| acc.checked_mul(r))
    }

    fn encode(&self, coords: &[usize]) -> Option<usize> {
        let mut code = 0usize;
        for (&c, &r) in coords.iter().zip(&self.radix) {
            if c >= r {
                return None;
            }
            code = code * r + c;
        }
        Some(code)
    }

    fn decode_into(&self, mut code: usize, out: &mut [usize]) {
        for k in (0..self.dims()).rev() {
            let r = self.radix[k];
            out[k] = code % r;
            code /= r;
        }
    }

    /// Whether `coords` touches a truncation boundary.
    pub fn on_boundary(&self, coords: &[usize]) -> bool {
        coords
            .iter()
            .zip(&self.radix)
            .zip(&self.capped)
            .any(|((&c, &r), &capped)| capped && c + 1 == r)
    }
}

/// Continuous-time Markov chain generator in compressed sparse row form.
/// Off-diagonal rates are non-negative; the diagonal holds negative row sums.
#[derive(Debug, Clone)]
pub struct Generator {
    pub layout: StateLayout,
    /// Dense index -> mixed-radix code.
    codes: Vec<usize>,
    /// Mixed-radix code -> dense index, `INVALID` for excluded combinations.
    index: Vec<u32>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    rates: Vec<f64>,
    pub diagonal: Vec<f64>,
    /// Dense index of the all-empty state.
    pub origin: usize,
}

impl Generator {
    /// Enumerates every state accepted by `valid` in lexicographic order and
    /// collects the transitions emitted by `transitions`. Targets that fall
    /// outside the truncated space are dropped.
    pub fn build<V, T>(
        layout: StateLayout,
        limit: usize,
        valid: V,
        mut transitions: T,
    ) -> Result<Self>
    where
        V: Fn(&[usize]) -> bool,
        T: FnMut(&[usize], &mut dyn FnMut(Vec<usize>, f64)),
    {
        let full = layout.full_size().unwrap_or(usize::MAX);
        if full > limit.saturating_mul(4) || full >= INVALID as usize {
            return Err(Error::StateSpaceTooLarge {
                states: full,
                limit,
            });
        }
        let dims = layout.dims();
        let mut coords = vec![0usize; dims];
        let mut index = vec![INVALID; full];
        let mut codes = Vec::new();
        for code in 0..full {
            layout.decode_into(code, &mut coords);
            if valid(&coords) {
                index[code] = codes.len() as u32;
                codes.push(code);
            }
        }
        if codes.len() > limit {
            return Err(Error::StateSpaceTooLarge {
                states: codes.len(),
                limit,
            });
        }
        let origin_code = layout.encode(&vec![0; dims]).expect("zero state in range");
        let origin = match index[origin_code] {
            INVALID => return Err(Error::InvalidParameter("empty state excluded".into())),
            i => i as usize,
        };

        let mut row_ptr = Vec::with_capacity(codes.len() + 1);
        let mut cols = Vec::new();
        let mut rates = Vec::new();
        let mut diagonal = Vec::with_capacity(codes.len());
        let mut row: Vec<(u32, f64)> = Vec::new();
        row_ptr.push(0);
        for (i, &code) in codes.iter().enumerate() {
            layout.decode_into(code, &mut coords);
            row.clear();
            transitions(&coords, &mut |target: Vec<usize>, rate: f64| {
                if rate <= 0.0 {
                    return;
                }
                if let Some(tc) = layout.encode(&target) {
                    let j = index[tc];
                    if j != INVALID && j as usize != i {
                        row.push((j, rate));
                    }
                }
            });
            row.sort_by_key(|&(j, _)| j);
            let mut out_rate = 0.0;
            for (k, &(j, r)) in row.iter().enumerate() {
                out_rate += r;
                if k > 0 && row[k - 1].0 == j {
                    *rates.last_mut().unwrap() += r;
                } else {
                    cols.push(j);
                    rates.push(r);
                }
            }
            diagonal.push(-out_rate);
            row_ptr.push(cols.len());
        }
        Ok(Self {
            layout,
            codes,
            index,
            row_ptr,
            cols,
            rates,
            diagonal,
            origin,
        })
    }

    /// Generator of an explicitly listed chain with a single coordinate
    /// (the state index itself). State 0 is the origin.
    pub fn from_transitions<I>(states: usize, transitions: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); states];
        for (i, j, r) in transitions {
            if i >= states || j >= states {
                return Err(Error::InvalidParameter(format!(
                    "transition {i} -> {j} outside {states} states"
                )));
            }
            if !(r >= 0.0) {
                return Err(Error::InvalidParameter(format!("negative rate {r}")));
            }
            by_row[i].push((j, r));
        }
        let layout = StateLayout {
            names: vec!["state"],
            radix: vec![states],
            capped: vec![false],
            write_coords: vec![],
            read_coords: vec![],
        };
        Self::build(
            layout,
            states,
            |_| true,
            |c, emit| {
                for &(j, r) in &by_row[c[0]] {
                    emit(vec![j], r);
                }
            },
        )
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn state(&self, i: usize) -> Vec<usize> {
        let mut out = vec![0; self.layout.dims()];
        self.layout.decode_into(self.codes[i], &mut out);
        out
    }

    pub fn index_of(&self, coords: &[usize]) -> Option<usize> {
        let code = self.layout.encode(coords)?;
        match self.index[code] {
            INVALID => None,
            i => Some(i as usize),
        }
    }

    /// Off-diagonal transitions out of state `i` as `(target, rate)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()]
            .iter()
            .zip(&self.rates[span])
            .map(|(&j, &r)| (j as usize, r))
    }

    /// Outgoing rates of the state with the given coordinates, keyed by target
    /// coordinates. Handy for checking individual transition clauses.
    pub fn outgoing(&self, coords: &[usize]) -> Vec<(Vec<usize>, f64)> {
        match self.index_of(coords) {
            Some(i) => self.row(i).map(|(j, r)| (self.state(j), r)).collect(),
            None => Vec::new(),
        }
    }

    /// Largest absolute row sum including the diagonal.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.len())
            .map(|i| (self.row(i).map(|(_, r)| r).sum::<f64>() + self.diagonal[i]).abs())
            .fold(0.0, f64::max)
    }

    /// Transposed off-diagonal structure: incoming `(source, rate)` per state.
    pub(crate) fn incoming(&self) -> (Vec<usize>, Vec<u32>, Vec<f64>) {
        let n = self.len();
        let mut count = vec![0usize; n + 1];
        for &j in &self.cols {
            count[j as usize + 1] += 1;
        }
        for k in 0..n {
            count[k + 1] += count[k];
        }
        let mut fill = count.clone();
        let mut src = vec![0u32; self.cols.len()];
        let mut val = vec![0f64; self.cols.len()];
        for i in 0..n {
            for (j, r) in self.row(i) {
                let slot = fill[j];
                src[slot] = i as u32;
                val[slot] = r;
                fill[j] += 1;
            }
        }
        (count, src, val)
    }
}
