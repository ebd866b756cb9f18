use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slacks used wherever an exact identity or order relation is
/// decided in floating point. Each is scaled by `max(1, operand norm)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceProfile {
    /// Self-adjointness check on construction.
    pub herm: f64,
    /// Eigendecomposition residual and unitarity of eigenvectors.
    pub eig: f64,
    /// Loewner-order slack.
    pub order: f64,
    /// Slack for equality steps.
    pub eq: f64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        Self {
            herm: 1e-12,
            eig: 1e-12,
            order: 1e-9,
            eq: 1e-10,
        }
    }
}

impl ToleranceProfile {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("herm", self.herm),
            ("eig", self.eig),
            ("order", self.order),
            ("eq", self.eq),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "tolerance `{name}` must be strictly positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Applies overrides of the form `order=1e-8,eq=1e-9`.
    pub fn with_overrides(mut self, spec: &str) -> Result<Self> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("tolerance override `{item}` is not key=value"))
            })?;
            let value: f64 = value.trim().parse().map_err(|_| {
                Error::InvalidConfig(format!("tolerance `{key}` has non-numeric value `{value}`"))
            })?;
            match key.trim() {
                "herm" => self.herm = value,
                "eig" => self.eig = value,
                "order" => self.order = value,
                "eq" => self.eq = value,
                other => {
                    return Err(Error::InvalidConfig(format!("unknown tolerance `{other}`")));
                }
            }
        }
        self.validate()?;
        Ok(self)
    }

    /// Loewner slack for operands of the given norm.
    pub fn order_slack(&self, scale: f64) -> f64 {
        self.order * scale.max(1.0)
    }

    /// Equality slack for operands of the given norm.
    pub fn eq_slack(&self, scale: f64) -> f64 {
        self.eq * scale.max(1.0)
    }
}
