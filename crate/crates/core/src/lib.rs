//! Corpus analysis of dance-music tracks from four recording-studio
//! features: tempo, phase-scope occupancy, channel correlation and crest
//! factor.
//!
//! The pipeline runs from audio ([`features`]) to a normalized corpus
//! ([`corpus`]) and on to three complementary analyses: a two-way
//! multivariate linear model ([`stats`]), a self-organizing map ([`som`]) and
//! a random forest style classifier ([`forest`]). [`report`] holds the
//! serialized report and map-bundle types shared with the command-line tool.

pub mod corpus;
pub mod error;
pub mod features;
pub mod forest;
pub mod numeric;
pub mod report;
pub mod som;
pub mod stats;

pub use corpus::{FeatureVector, Nation, NormalizedCorpus, TrackRecord, FEATURE_DIM, FEATURE_NAMES};
pub use error::{Error, ErrorCategory, Result, Warning};
pub use forest::{EvalReport, Forest, ForestConfig};
pub use report::{MapBundle, SavedMap, SCHEMA_VERSION};
pub use som::{Placement, SomConfig, SomGrid};
pub use stats::{AnovaResult, Effect, ManovaResult, YearCoding};
