use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SomConfig;
use crate::corpus::{NormalizedCorpus, FEATURE_DIM};

/// Trained map. Unit `(x, y)` lives at `codebook[y * width + x]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomGrid {
    pub config: SomConfig,
    pub codebook: Vec<[f64; FEATURE_DIM]>,
    pub trained: bool,
    /// Mean quantization error over the training data after each epoch.
    #[serde(default)]
    pub epoch_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub track_id: String,
    pub unit_x: usize,
    pub unit_y: usize,
    pub quantization_error: f64,
}

/// Per-unit scalar field, row-major with `values[y * width + x]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMatrix {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl GridMatrix {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

impl SomGrid {
    /// Wraps an explicit codebook; panics if its length is not
    /// `width * height`.
    pub fn from_codebook(config: SomConfig, codebook: Vec<[f64; FEATURE_DIM]>) -> Self {
        assert_eq!(codebook.len(), config.units(), "codebook size");
        Self {
            config,
            codebook,
            trained: true,
            epoch_errors: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.config.width
    }

    pub fn height(&self) -> usize {
        self.config.height
    }

    pub fn unit(&self, x: usize, y: usize) -> &[f64; FEATURE_DIM] {
        &self.codebook[y * self.config.width + x]
    }
}

pub(crate) fn sq_dist(a: &[f64; FEATURE_DIM], b: &[f64; FEATURE_DIM]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// Index of the nearest codebook vector; ties go to the lowest index.
pub(crate) fn bmu_index(codebook: &[[f64; FEATURE_DIM]], v: &[f64; FEATURE_DIM]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, w) in codebook.iter().enumerate() {
        let d = sq_dist(w, v);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Best-matching unit `(x, y, distance)` by exhaustive scan.
pub fn bmu(grid: &SomGrid, v: &[f64; FEATURE_DIM]) -> (usize, usize, f64) {
    let (i, d2) = bmu_index(&grid.codebook, v);
    (i % grid.width(), i / grid.width(), d2.sqrt())
}

/// Mean Euclidean distance from each unit to its 4-neighbours.
pub fn u_matrix(grid: &SomGrid) -> GridMatrix {
    let (w, h) = (grid.width(), grid.height());
    let mut values = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let here = grid.unit(x, y);
            let mut sum = 0.0;
            let mut count = 0;
            let neighbours = [
                (x.checked_sub(1), Some(y)),
                ((x + 1 < w).then_some(x + 1), Some(y)),
                (Some(x), y.checked_sub(1)),
                (Some(x), (y + 1 < h).then_some(y + 1)),
            ];
            for (nx, ny) in neighbours {
                if let (Some(nx), Some(ny)) = (nx, ny) {
                    sum += sq_dist(here, grid.unit(nx, ny)).sqrt();
                    count += 1;
                }
            }
            values.push(sum / count as f64);
        }
    }
    GridMatrix {
        width: w,
        height: h,
        values,
    }
}

/// One plane per feature holding that codebook component per unit.
pub fn component_planes(grid: &SomGrid) -> [GridMatrix; FEATURE_DIM] {
    std::array::from_fn(|k| GridMatrix {
        width: grid.width(),
        height: grid.height(),
        values: grid.codebook.iter().map(|c| c[k]).collect(),
    })
}

/// Places every corpus track on its best-matching unit, in corpus order.
pub fn place_tracks(grid: &SomGrid, corpus: &NormalizedCorpus) -> Vec<Placement> {
    corpus
        .records()
        .par_iter()
        .zip(corpus.feature_matrix().par_iter())
        .map(|(r, z)| {
            let (unit_x, unit_y, quantization_error) = bmu(grid, z);
            Placement {
                track_id: r.track_id.clone(),
                unit_x,
                unit_y,
                quantization_error,
            }
        })
        .collect()
}
