//! Harmonic numbers and the digamma function.

use crate::error::{Error, Result};

/// `H_n = 1 + 1/2 + ... + 1/n`, with `H_0 = 0`.
pub fn harmonic(n: usize) -> f64 {
    // Summed smallest-first to keep rounding error down for large n.
    (1..=n).rev().map(|i| 1.0 / i as f64).sum()
}

/// B_{2k} / (2k) for k = 1..8, the coefficients of the asymptotic series
/// ψ(x) ~ ln x − 1/(2x) − Σ B_{2k} / (2k x^{2k}).
const ASYMPTOTIC: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
];

const ASYMPTOTIC_THRESHOLD: f64 = 6.0;

/// Digamma function ψ(x) = d/dx ln Γ(x) for `x > 0`.
///
/// Shifts the argument above 6 with ψ(x) = ψ(x + 1) − 1/x and evaluates the
/// 8-term asymptotic series there. Absolute error is below 1e-12 on the
/// positive axis.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "digamma is only implemented for finite x > 0, got {x}"
        )));
    }
    let mut shift = 0.0;
    let mut z = x;
    while z < ASYMPTOTIC_THRESHOLD {
        shift -= 1.0 / z;
        z += 1.0;
    }
    let inv2 = 1.0 / (z * z);
    // Horner in 1/z^2, highest order first.
    let series = ASYMPTOTIC
        .iter()
        .rev()
        .fold(0.0, |acc, &c| (acc + c) * inv2);
    Ok(shift + z.ln() - 0.5 / z - series)
}
