//! Recording-studio features from stereo audio.
//!
//! Frame-level meters ([`frame`]) are reduced to per-track medians by
//! [`track_features`]; tempo is estimated once per track ([`tempo`]).

pub mod batch;
pub mod frame;
pub mod signal;
pub mod tempo;
mod track;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use batch::{extract_corpus, read_metadata, Extraction, FileFailure, MetadataRow};
pub use frame::{box_count, channel_correlation, crest_factor, phase_space, BoxCount, FrameFeatures};
pub use signal::{decode_audio, Decoded, StereoSignal};
pub use tempo::{estimate_bpm, estimate_tempo, TempoEstimate};
pub use track::{frame_features, track_features, track_features_with_bpm, MIN_FRAMES};

/// Smallest frame that still gives a meaningful box count.
pub const MIN_FRAME_LENGTH: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionConfig {
    /// Analysis frame length in samples.
    pub frame_length: usize,
    pub hop_length: usize,
    /// Boxes per axis for phase-space box counting.
    pub box_grid: usize,
    /// Admissible tempo range (min, max) in bpm.
    pub bpm_range: (f64, f64),
    /// Reserved for stochastic sub-steps; extraction is currently fully
    /// deterministic and ignores it.
    pub seed: u64,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            frame_length: 4096,
            hop_length: 2048,
            box_grid: 16,
            bpm_range: (60.0, 200.0),
            seed: 0,
        }
    }
}

impl ExtractionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frame_length < MIN_FRAME_LENGTH {
            return Err(Error::InvalidConfig(format!(
                "frame_length {} below {MIN_FRAME_LENGTH}",
                self.frame_length
            )));
        }
        if self.hop_length == 0 || self.hop_length > self.frame_length {
            return Err(Error::InvalidConfig(format!(
                "hop_length must be in 1..={}",
                self.frame_length
            )));
        }
        if self.box_grid < 2 {
            return Err(Error::InvalidConfig("box_grid must be at least 2".into()));
        }
        let (lo, hi) = self.bpm_range;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(Error::InvalidConfig(format!("bad bpm range ({lo}, {hi})")));
        }
        Ok(())
    }
}
