//! Serialized report types, the map-explorer bundle and the key-value
//! configuration format.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use crate::corpus::write_json_pretty as write_json;
use crate::corpus::{FeatureVector, Nation, NormSidecar, NormalizedCorpus, FEATURE_NAMES};
use crate::error::{Error, Result};
use crate::som::{component_planes, u_matrix, GridMatrix, Placement, SomGrid};

/// Version of the `som.json` and `map_bundle.json` layouts.
pub const SCHEMA_VERSION: u32 = 1;

/// A trained map as written by the `som` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedMap {
    pub schema_version: u32,
    pub grid: SomGrid,
    /// File name of the normalization sidecar the map was trained against.
    pub normalization_file: String,
    pub normalization: NormSidecar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentPlane {
    pub feature: String,
    pub plane: GridMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleSom {
    pub grid: SomGrid,
    pub u_matrix: GridMatrix,
    pub component_planes: Vec<ComponentPlane>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleTrack {
    pub track_id: String,
    pub title: String,
    pub artist: String,
    pub nation: Nation,
    pub year: i32,
    pub style: Option<String>,
    pub unit_x: usize,
    pub unit_y: usize,
    pub features: FeatureVector,
}

/// Optional statistics attached to a bundle, stored as produced by the
/// `analyze` command.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manova: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anova: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boxplots: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapBundle {
    pub schema_version: u32,
    pub som: BundleSom,
    pub tracks: Vec<BundleTrack>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats_summary: Option<StatsSummary>,
}

impl MapBundle {
    /// Assembles a bundle; `placements` must be in corpus order.
    pub fn build(
        grid: &SomGrid,
        corpus: &NormalizedCorpus,
        placements: &[Placement],
        stats_summary: Option<StatsSummary>,
    ) -> Result<Self> {
        if placements.len() != corpus.len() {
            return Err(Error::InvalidInput(format!(
                "{} placements for {} tracks",
                placements.len(),
                corpus.len()
            )));
        }
        let planes = component_planes(grid);
        let tracks = corpus
            .records()
            .iter()
            .zip(placements)
            .map(|(r, p)| BundleTrack {
                track_id: r.track_id.clone(),
                title: r.title.clone(),
                artist: r.artist.clone(),
                nation: r.nation,
                year: r.year,
                style: r.style.clone(),
                unit_x: p.unit_x,
                unit_y: p.unit_y,
                features: r.features,
            })
            .collect();
        let bundle = Self {
            schema_version: SCHEMA_VERSION,
            som: BundleSom {
                grid: grid.clone(),
                u_matrix: u_matrix(grid),
                component_planes: FEATURE_NAMES
                    .iter()
                    .zip(planes)
                    .map(|(f, plane)| ComponentPlane {
                        feature: f.to_string(),
                        plane,
                    })
                    .collect(),
            },
            tracks,
            stats_summary,
        };
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version < 1 {
            return Err(Error::InvalidInput("schema_version must be at least 1".into()));
        }
        let (w, h) = (self.som.grid.width(), self.som.grid.height());
        if let Some(t) = self.tracks.iter().find(|t| t.unit_x >= w || t.unit_y >= h) {
            return Err(Error::InvalidInput(format!(
                "track {} on unit ({}, {}) outside {w}x{h} grid",
                t.track_id, t.unit_x, t.unit_y
            )));
        }
        Ok(())
    }
}

/// Flat `key = value` settings. Blank lines and lines starting with `#`
/// are ignored; keys may not repeat.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValueConfig {
    entries: BTreeMap<String, String>,
}

impl FromStr for KeyValueConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            // no value contains '#', so everything after it is a comment
            let line = raw.split_once('#').map_or(raw, |(head, _)| head).trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::InvalidConfig(format!(
                    "line {}: expected key = value",
                    n + 1
                )));
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(Error::InvalidConfig(format!("line {}: empty key", n + 1)));
            }
            if entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::InvalidConfig(format!("line {}: duplicate key {k}", n + 1)));
            }
        }
        Ok(Self { entries })
    }
}

impl KeyValueConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.parse()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Parsed value of `key`, if present.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.entries
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::InvalidConfig(format!("{key}: cannot parse {v:?}")))
            })
            .transpose()
    }

    /// Overwrites `slot` when `key` is present.
    pub fn apply<T: FromStr>(&self, key: &str, slot: &mut T) -> Result<()> {
        if let Some(v) = self.get(key)? {
            *slot = v;
        }
        Ok(())
    }

    /// Rejects keys outside `known`.
    pub fn check_known(&self, known: &[&str]) -> Result<()> {
        match self.keys().find(|k| !known.contains(k)) {
            Some(k) => Err(Error::InvalidConfig(format!("unknown key {k}"))),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_values() {
        let cfg: KeyValueConfig = "# comment\n\nsom.width = 12   # columns\n seed=3 \nname = a = b\n"
            .parse()
            .unwrap();
        assert_eq!(cfg.get::<usize>("som.width").unwrap(), Some(12));
        assert_eq!(cfg.get::<u64>("seed").unwrap(), Some(3));
        assert_eq!(cfg.get::<String>("name").unwrap().as_deref(), Some("a = b"));
        assert_eq!(cfg.get::<u64>("missing").unwrap(), None);
        let mut slot = 5usize;
        cfg.apply("som.width", &mut slot).unwrap();
        assert_eq!(slot, 12);
    }

    #[test]
    fn rejects_bad_lines() {
        for text in ["no equals sign", "= 3", "a = 1\na = 2"] {
            assert!(
                matches!(text.parse::<KeyValueConfig>(), Err(Error::InvalidConfig(_))),
                "{text}"
            );
        }
        let cfg: KeyValueConfig = "som.width = wide".parse().unwrap();
        assert!(matches!(
            cfg.get::<usize>("som.width"),
            Err(Error::InvalidConfig(_))
        ));
        assert!(cfg.check_known(&["seed"]).is_err());
        assert!(cfg.check_known(&["som.width"]).is_ok());
    }
}
