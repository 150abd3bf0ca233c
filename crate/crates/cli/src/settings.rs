//! Run settings resolved as flag > config file > default.

use std::path::Path;

use studiomap::features::ExtractionConfig;
use studiomap::report::KeyValueConfig;
use studiomap::{ForestConfig, Result, SomConfig, YearCoding};

use crate::args::{ClassifyArgs, ExtractArgs, SomArgs};

pub const KNOWN_KEYS: &[&str] = &[
    "seed",
    "threads",
    "year_coding",
    "cv",
    "extract.frame_length",
    "extract.hop_length",
    "extract.box_grid",
    "extract.bpm_min",
    "extract.bpm_max",
    "som.width",
    "som.height",
    "som.epochs",
    "som.learning_rate",
    "som.radius",
    "som.init",
    "forest.trees",
    "forest.max_features",
    "forest.min_leaf",
    "forest.max_depth",
    "forest.bootstrap",
    "forest.folds",
];

#[derive(Debug, Default)]
pub struct Settings {
    file: KeyValueConfig,
}

/// `flag`, else the file value under `key`, else `default`.
fn pick<T: std::str::FromStr>(file: &KeyValueConfig, key: &str, flag: Option<T>, default: T) -> Result<T> {
    match flag {
        Some(v) => Ok(v),
        None => Ok(file.get(key)?.unwrap_or(default)),
    }
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let file = match path {
            Some(p) => KeyValueConfig::load(p)?,
            None => KeyValueConfig::default(),
        };
        file.check_known(KNOWN_KEYS)?;
        Ok(Self { file })
    }

    pub fn seed(&self, flag: Option<u64>) -> Result<u64> {
        pick(&self.file, "seed", flag, 0)
    }

    pub fn threads(&self, flag: Option<usize>) -> Result<usize> {
        pick(&self.file, "threads", flag, 0)
    }

    pub fn year_coding(&self, flag: Option<YearCoding>) -> Result<YearCoding> {
        pick(&self.file, "year_coding", flag, YearCoding::Numeric)
    }

    pub fn extraction(&self, a: &ExtractArgs, seed: u64) -> Result<ExtractionConfig> {
        let d = ExtractionConfig::default();
        let f = &self.file;
        let cfg = ExtractionConfig {
            frame_length: pick(f, "extract.frame_length", a.frame_length, d.frame_length)?,
            hop_length: pick(f, "extract.hop_length", a.hop_length, d.hop_length)?,
            box_grid: pick(f, "extract.box_grid", a.box_grid, d.box_grid)?,
            bpm_range: (
                pick(f, "extract.bpm_min", a.bpm_min, d.bpm_range.0)?,
                pick(f, "extract.bpm_max", a.bpm_max, d.bpm_range.1)?,
            ),
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn som(&self, a: &SomArgs, seed: u64) -> Result<SomConfig> {
        let d = SomConfig::default();
        let f = &self.file;
        let width = pick(f, "som.width", a.width, d.width)?;
        let height = pick(f, "som.height", a.height, d.height)?;
        let cfg = SomConfig {
            width,
            height,
            epochs: pick(f, "som.epochs", a.epochs, d.epochs)?,
            initial_learning_rate: pick(f, "som.learning_rate", a.learning_rate, d.initial_learning_rate)?,
            initial_radius: pick(f, "som.radius", a.radius, width.max(height) as f64 / 2.0)?,
            seed,
            init_mode: pick(f, "som.init", a.init, d.init_mode)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn forest(&self, a: &ClassifyArgs, seed: u64) -> Result<ForestConfig> {
        let d = ForestConfig::default();
        let f = &self.file;
        let max_depth = match a.max_depth {
            Some(v) => Some(v),
            None => f.get("forest.max_depth")?,
        };
        let bootstrap = if a.no_bootstrap {
            false
        } else {
            f.get("forest.bootstrap")?.unwrap_or(d.bootstrap)
        };
        let cfg = ForestConfig {
            n_trees: pick(f, "forest.trees", a.trees, d.n_trees)?,
            max_features: pick(f, "forest.max_features", a.max_features, d.max_features)?,
            min_leaf: pick(f, "forest.min_leaf", a.min_leaf, d.min_leaf)?,
            max_depth,
            bootstrap,
            seed,
            cv_folds: pick(f, "forest.folds", a.folds, d.cv_folds)?,
            cv_mode: pick(f, "cv", a.cv, d.cv_mode)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
