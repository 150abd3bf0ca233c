//! Self-organizing map over normalized feature vectors.
//!
//! One map is trained on the whole corpus; nation, year and style subsets
//! are overlays of the resulting placements.

mod grid;
mod groups;
mod train;

pub use grid::{bmu, component_planes, place_tracks, u_matrix, GridMatrix, Placement, SomGrid};
pub use groups::{group_distances, group_location_variance, LocationVariance, VarianceSeries, YearDistances};
pub use train::{size_warning, train_som, FINAL_LEARNING_RATE, FINAL_RADIUS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Plane spanned by the first two principal components.
    #[default]
    PcaLinear,
    /// Uniform within the per-feature data range.
    Random,
}

impl std::str::FromStr for InitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pca_linear" => Ok(Self::PcaLinear),
            "random" => Ok(Self::Random),
            _ => Err(Error::InvalidConfig(format!(
                "init mode {s:?}, expected pca_linear or random"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomConfig {
    pub width: usize,
    pub height: usize,
    pub epochs: usize,
    pub initial_learning_rate: f64,
    pub initial_radius: f64,
    pub seed: u64,
    pub init_mode: InitMode,
}

impl Default for SomConfig {
    fn default() -> Self {
        Self {
            width: 30,
            height: 20,
            epochs: 20,
            initial_learning_rate: 0.5,
            initial_radius: 15.0,
            seed: 0,
            init_mode: InitMode::PcaLinear,
        }
    }
}

impl SomConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.width < 2 || self.height < 2 {
            return bad(format!(
                "grid {}x{} must be at least 2x2",
                self.width, self.height
            ));
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if !(self.initial_learning_rate > 0.0 && self.initial_learning_rate <= 1.0) {
            return bad(format!(
                "initial_learning_rate {} outside (0, 1]",
                self.initial_learning_rate
            ));
        }
        if !(self.initial_radius > 0.0 && self.initial_radius.is_finite()) {
            return bad(format!("initial_radius {} must be positive", self.initial_radius));
        }
        Ok(())
    }

    pub fn units(&self) -> usize {
        self.width * self.height
    }
}
