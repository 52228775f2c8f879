use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionMaterial {
    pub region: i32,
    pub sigma: f64,
    pub mu: f64,
}

/// Frequency, permeabilities, per-region conductivity and the penalty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub omega: f64,
    pub mu0: f64,
    pub alpha: f64,
    pub regions: Vec<RegionMaterial>,
}

impl MaterialConfig {
    /// Single region (tag 1) with the given coefficients.
    pub fn uniform(omega: f64, mu0: f64, sigma: f64, mu: f64, alpha: f64) -> Self {
        MaterialConfig {
            omega,
            mu0,
            alpha,
            regions: vec![RegionMaterial {
                region: 1,
                sigma,
                mu,
            }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("omega", self.omega)?;
        positive("mu0", self.mu0)?;
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        for r in &self.regions {
            positive(&format!("sigma of region {}", r.region), r.sigma)?;
            positive(&format!("mu of region {}", r.region), r.mu)?;
        }
        Ok(())
    }

    fn lookup(&self, region: i32) -> Result<&RegionMaterial> {
        self.regions
            .iter()
            .find(|r| r.region == region)
            .ok_or(Error::MissingMaterial(region))
    }

    pub fn sigma(&self, region: i32) -> Result<f64> {
        Ok(self.lookup(region)?.sigma)
    }

    pub fn mu(&self, region: i32) -> Result<f64> {
        Ok(self.lookup(region)?.mu)
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        MaterialConfig {
            alpha,
            ..self.clone()
        }
    }
}

impl Default for MaterialConfig {
    fn default() -> Self {
        MaterialConfig::uniform(1.0, 1.0, 1.0, 1.0, 10.0)
    }
}
