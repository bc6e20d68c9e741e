//! Service-time distributions sampled by inverse transform.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ServiceDistribution {
    Exponential {
        rate: f64,
    },
    ShiftedExponential {
        rate: f64,
        shift: f64,
    },
    /// Requires `shape > 1` so the mean exists.
    Pareto {
        shape: f64,
        scale: f64,
    },
    Weibull {
        shape: f64,
        scale: f64,
        location: f64,
    },
    /// Resampled uniformly with replacement.
    Empirical {
        samples: Vec<f64>,
    },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be non-negative, got {v}"
        )))
    }
}

impl ServiceDistribution {
    pub fn exponential(rate: f64) -> Result<Self> {
        Self::Exponential { rate }.validated()
    }

    pub fn shifted_exponential(rate: f64, shift: f64) -> Result<Self> {
        Self::ShiftedExponential { rate, shift }.validated()
    }

    pub fn pareto(shape: f64, scale: f64) -> Result<Self> {
        Self::Pareto { shape, scale }.validated()
    }

    pub fn weibull(shape: f64, scale: f64, location: f64) -> Result<Self> {
        Self::Weibull {
            shape,
            scale,
            location,
        }
        .validated()
    }

    pub fn empirical(samples: Vec<f64>) -> Result<Self> {
        Self::Empirical { samples }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Exponential { rate } => positive("rate", *rate),
            Self::ShiftedExponential { rate, shift } => {
                positive("rate", *rate)?;
                non_negative("shift", *shift)
            }
            Self::Pareto { shape, scale } => {
                positive("scale", *scale)?;
                if *shape > 1.0 && shape.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "pareto shape must exceed 1, got {shape}"
                    )))
                }
            }
            Self::Weibull {
                shape,
                scale,
                location,
            } => {
                positive("shape", *shape)?;
                positive("scale", *scale)?;
                non_negative("location", *location)
            }
            Self::Empirical { samples } => {
                if samples.is_empty() {
                    return Err(Error::InvalidParameter(
                        "empirical sample list is empty".into(),
                    ));
                }
                samples
                    .iter()
                    .try_for_each(|&x| positive("empirical sample", x))
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::ShiftedExponential { rate, shift } => shift + 1.0 / rate,
            Self::Pareto { shape, scale } => shape * scale / (shape - 1.0),
            Self::Weibull {
                shape,
                scale,
                location,
            } => location + scale * statrs::function::gamma::gamma(1.0 + 1.0 / shape),
            Self::Empirical { samples } => samples.iter().sum::<f64>() / samples.len() as f64,
        }
    }

    /// Service rate `1 / mean`.
    pub fn rate(&self) -> f64 {
        1.0 / self.mean()
    }
}

/// Inverse-transform draw from `dist` for a uniform `u` in (0, 1).
pub fn sample(dist: &ServiceDistribution, u: f64) -> f64 {
    debug_assert!(u > 0.0 && u < 1.0);
    match dist {
        ServiceDistribution::Exponential { rate } => -u.ln() / rate,
        ServiceDistribution::ShiftedExponential { rate, shift } => shift - u.ln() / rate,
        ServiceDistribution::Pareto { shape, scale } => scale * u.powf(-1.0 / shape),
        ServiceDistribution::Weibull {
            shape,
            scale,
            location,
        } => location + scale * (-u.ln()).powf(1.0 / shape),
        ServiceDistribution::Empirical { samples } => {
            let i = ((u * samples.len() as f64) as usize).min(samples.len() - 1);
            samples[i]
        }
    }
}

/// Parses an empirical sample file: one positive decimal per line, blank
/// lines and `#` comments ignored.
pub fn parse_samples(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            Error::InvalidParameter(format!("line {}: not a number: {line:?}", lineno + 1))
        })?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "line {}: sample must be positive, got {v}",
                lineno + 1
            )));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::InvalidParameter("no samples found".into()));
    }
    Ok(out)
}

pub fn load_samples(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))?;
    parse_samples(&text)
}
