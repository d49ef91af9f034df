use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex_build::DEFAULT_VIRTUAL_EDGE_CAP;
use crate::quadrics::AreaSupport;

/// How a quadric evolves across collapses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Accumulation {
    /// Summed into the surviving vertex.
    Memory,
    /// Recomputed from the current mesh.
    Memoryless,
}

impl std::str::FromStr for Accumulation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "memory" => Ok(Self::Memory),
            "memoryless" => Ok(Self::Memoryless),
            _ => Err(format!("expected `memory` or `memoryless`, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// Fraction of the input face count.
    Ratio(f64),
    /// Absolute face count.
    Faces(usize),
}

impl Target {
    pub fn face_count(&self, input_faces: usize) -> usize {
        match *self {
            // The small slack keeps e.g. 0.1 · 1280 at 128 despite rounding.
            Target::Ratio(r) => ((r * input_faces as f64) + 1e-9).floor() as usize,
            Target::Faces(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecimationConfig {
    pub target: Target,
    /// Virtual-edge threshold as a fraction of the bounding-box diagonal.
    pub eps_rel: f64,
    /// Weight λ of the area quadric.
    pub area_weight: f64,
    pub edge_quadric_mode: Accumulation,
    pub area_quadric_mode: Accumulation,
    pub area_support: AreaSupport,
    pub enable_virtual_edges: bool,
    pub virtual_edge_cap: usize,
    pub preserve_topology: bool,
    pub record_history: bool,
    /// Tikhonov weight σ: adds σ²·|x - midpoint|² to every candidate.
    pub regularization: f64,
    /// Echoed in reports; queue ties break by edge id, so no step is random.
    pub seed: u64,
    /// Check the stars around every collapse, and the whole complex at the end.
    pub validate: bool,
}

impl Default for DecimationConfig {
    fn default() -> Self {
        Self {
            target: Target::Ratio(0.1),
            eps_rel: 1e-3,
            area_weight: 1.0,
            edge_quadric_mode: Accumulation::Memory,
            area_quadric_mode: Accumulation::Memoryless,
            area_support: AreaSupport::Boundary,
            enable_virtual_edges: true,
            virtual_edge_cap: DEFAULT_VIRTUAL_EDGE_CAP,
            preserve_topology: false,
            record_history: true,
            regularization: 0.0,
            seed: 0,
            validate: false,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("target ratio must lie in [0, 1], got {0}")]
    Ratio(f64),
    #[error("area weight must be finite and non-negative, got {0}")]
    AreaWeight(f64),
    #[error("eps_rel must be finite and positive, got {0}")]
    Epsilon(f64),
    #[error("regularization must be finite and non-negative, got {0}")]
    Regularization(f64),
}

impl DecimationConfig {
    pub fn check(&self) -> Result<(), ConfigError> {
        if let Target::Ratio(r) = self.target {
            if !(0.0..=1.0).contains(&r) {
                return Err(ConfigError::Ratio(r));
            }
        }
        if !(self.area_weight >= 0.0 && self.area_weight.is_finite()) {
            return Err(ConfigError::AreaWeight(self.area_weight));
        }
        if !(self.eps_rel > 0.0 && self.eps_rel.is_finite()) {
            return Err(ConfigError::Epsilon(self.eps_rel));
        }
        if !(self.regularization >= 0.0 && self.regularization.is_finite()) {
            return Err(ConfigError::Regularization(self.regularization));
        }
        Ok(())
    }

    /// Whether a collapse can change costs beyond the star of the kept vertex.
    pub(crate) fn wide_recost(&self) -> bool {
        self.edge_quadric_mode == Accumulation::Memoryless
            || (self.area_quadric_mode == Accumulation::Memoryless && self.area_weight > 0.0)
            || self.preserve_topology
    }
}
