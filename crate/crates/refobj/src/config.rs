//! Run configuration for `simulate`.

use std::path::Path;

use refobj_core::agreement::{ObserverScenario, PriorSpec};
use refobj_core::su2::Su2Element;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// A rotation by `angle` radians about `axis`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisAngle {
    pub axis: [f64; 3],
    pub angle: f64,
}

impl AxisAngle {
    pub fn identity() -> Self {
        Self {
            axis: [0.0, 0.0, 1.0],
            angle: 0.0,
        }
    }

    /// Rescales the axis to unit length.
    fn normalized(&self) -> Result<Self, CliError> {
        let norm = self.axis.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 1e-12 && self.angle.is_finite()) {
            return Err(CliError::Config(format!(
                "axis {:?} / angle {} is not a valid rotation",
                self.axis, self.angle
            )));
        }
        Ok(Self {
            axis: self.axis.map(|c| c / norm),
            angle: self.angle,
        })
    }

    pub fn to_element(&self) -> Result<Su2Element, CliError> {
        Su2Element::from_axis_angle(self.axis, self.angle).map_err(CliError::from_core)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorKind {
    Uniform,
    Concentrated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorConfig {
    pub kind: PriorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<AxisAngle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spread: Option<f64>,
}

/// Optional resolution overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// θ panels for the quadrature of the expected error.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_panels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes_per_panel: Option<usize>,
    /// Intervals of the likelihood's inverse-CDF table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cdf_intervals: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n_spins: usize,
    pub observers: Vec<AxisAngle>,
    pub prior: PriorConfig,
    pub rounds: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    /// Checks ranges and normalizes every axis.
    pub fn validated(mut self) -> Result<Self, CliError> {
        if self.n_spins < 2 {
            return Err(CliError::Config("n_spins must be at least 2".into()));
        }
        if self.rounds < 1 {
            return Err(CliError::Config("rounds must be at least 1".into()));
        }
        if self.observers.is_empty() {
            return Err(CliError::Config("at least one observer is required".into()));
        }
        self.observers = self
            .observers
            .iter()
            .map(AxisAngle::normalized)
            .collect::<Result<_, _>>()?;
        match self.prior.kind {
            PriorKind::Uniform => {
                if self.prior.mean.is_some() || self.prior.spread.is_some() {
                    return Err(CliError::Config(
                        "a uniform prior takes neither mean nor spread".into(),
                    ));
                }
            }
            PriorKind::Concentrated => {
                let spread = self.prior.spread.ok_or_else(|| {
                    CliError::Config("a concentrated prior needs a spread".into())
                })?;
                if !(spread.is_finite() && spread > 0.0) {
                    return Err(CliError::Config("spread must be positive".into()));
                }
                let mean = self.prior.mean.clone().unwrap_or_else(AxisAngle::identity);
                self.prior.mean = Some(mean.normalized()?);
            }
        }
        if let Some(g) = &self.grid {
            let positive = |v: Option<usize>| v.map_or(true, |x| x > 0);
            if !positive(g.theta_panels)
                || !positive(g.nodes_per_panel)
                || !positive(g.cdf_intervals)
            {
                return Err(CliError::Config("grid overrides must be positive".into()));
            }
        }
        Ok(self)
    }

    pub fn scenario(&self) -> Result<ObserverScenario, CliError> {
        let observers = self
            .observers
            .iter()
            .map(AxisAngle::to_element)
            .collect::<Result<Vec<_>, _>>()?;
        let prior = match self.prior.kind {
            PriorKind::Uniform => PriorSpec::Uniform,
            PriorKind::Concentrated => {
                let mean = self.prior.mean.clone().unwrap_or_else(AxisAngle::identity);
                PriorSpec::concentrated(mean.to_element()?, self.prior.spread.unwrap_or(0.0))
                    .map_err(CliError::from_core)?
            }
        };
        ObserverScenario::new(self.n_spins, observers, prior).map_err(CliError::from_core)
    }

    /// Compact JSON with fields in declaration order.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of [`RunConfig::canonical_json`].
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}
