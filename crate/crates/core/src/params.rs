//! System parameters and the loads derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arrival and service rates of a single replicated file, plus the number of
/// secondary servers. The cluster has `n + 1` servers in total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub lambda_r: f64,
    pub lambda_w: f64,
    pub mu_r: f64,
    pub mu_w: f64,
    pub n: usize,
}

impl SystemParams {
    pub fn new(lambda_r: f64, lambda_w: f64, mu_r: f64, mu_w: f64, n: usize) -> Result<Self> {
        let p = Self {
            lambda_r,
            lambda_w,
            mu_r,
            mu_w,
            n,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks that every rate is finite and non-negative and that both
    /// service rates are strictly positive. Stability is not checked here.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda_r", self.lambda_r),
            ("lambda_w", self.lambda_w),
            ("mu_r", self.mu_r),
            ("mu_w", self.mu_w),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if self.mu_r <= 0.0 {
            return Err(Error::InvalidParameter("mu_r must be positive".into()));
        }
        if self.mu_w <= 0.0 {
            return Err(Error::InvalidParameter("mu_w must be positive".into()));
        }
        Ok(())
    }

    pub fn with_n(self, n: usize) -> Self {
        Self { n, ..self }
    }

    pub fn total_servers(&self) -> usize {
        self.n + 1
    }

    pub fn loads(&self) -> DerivedLoads {
        derive_loads(self)
    }

    /// Stability of this particular `n + 1` server instance.
    pub fn is_stable(&self) -> bool {
        self.loads().stability_margin > 0.0
    }

    pub fn ensure_stable(&self) -> Result<()> {
        let l = self.loads();
        if l.stability_margin > 0.0 {
            Ok(())
        } else {
            Err(Error::Unstable(format!(
                "rho_w + rho_r/(n+1) = {:.6} >= 1 at n = {}",
                1.0 - l.stability_margin,
                self.n
            )))
        }
    }

    /// Stability for every `n`, as required by the redundancy optimizers.
    pub fn ensure_stable_for_all_n(&self) -> Result<()> {
        let l = self.loads();
        if l.rho_w <= 0.0 {
            return Err(Error::Domain("write load must be positive".into()));
        }
        if l.rho_r + l.rho_w >= 1.0 {
            return Err(Error::Unstable(format!(
                "rho_r + rho_w = {:.6} >= 1, some n are unstable",
                l.rho_r + l.rho_w
            )));
        }
        Ok(())
    }
}

/// Dimensionless loads and ratios consumed by the closed-form models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedLoads {
    pub rho_r: f64,
    pub rho_w: f64,
    /// `rho_w / (1 - rho_w)`
    pub nu: f64,
    /// `mu_r / mu_w`
    pub alpha: f64,
    /// Root of the upper-bound fixed point equation; equals `rho_w`.
    pub delta: f64,
    /// `1 - rho_w - rho_r / (n + 1)`; negative when the instance is unstable.
    pub stability_margin: f64,
    pub n: usize,
}

impl DerivedLoads {
    /// Builds loads directly from dimensionless values, mostly for analysis
    /// over load grids where no concrete rates exist.
    pub fn from_loads(rho_r: f64, rho_w: f64, alpha: f64, n: usize) -> Self {
        Self {
            rho_r,
            rho_w,
            nu: rho_w / (1.0 - rho_w),
            alpha,
            delta: rho_w,
            stability_margin: 1.0 - rho_w - rho_r / (n as f64 + 1.0),
            n,
        }
    }

    pub fn with_n(self, n: usize) -> Self {
        Self::from_loads(self.rho_r, self.rho_w, self.alpha, n)
    }
}

pub fn derive_loads(params: &SystemParams) -> DerivedLoads {
    let rho_r = params.lambda_r / params.mu_r;
    let rho_w = params.lambda_w / params.mu_w;
    DerivedLoads::from_loads(rho_r, rho_w, params.mu_r / params.mu_w, params.n)
}
