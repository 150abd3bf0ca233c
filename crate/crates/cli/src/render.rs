//! Binary PPM heatmaps of per-unit map fields.

use std::fs;
use std::path::Path;

use studiomap::som::GridMatrix;
use studiomap::{Error, Result};

/// Pixels per map unit along each axis.
const CELL: usize = 8;

/// Viridis sampled at nine evenly spaced stops; dark is low.
const STOPS: [[f64; 3]; 9] = [
    [68.0, 1.0, 84.0],
    [72.0, 40.0, 120.0],
    [62.0, 74.0, 137.0],
    [49.0, 104.0, 142.0],
    [38.0, 130.0, 142.0],
    [31.0, 158.0, 137.0],
    [53.0, 183.0, 121.0],
    [110.0, 206.0, 88.0],
    [253.0, 231.0, 37.0],
];

fn colour(t: f64) -> [u8; 3] {
    let pos = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (pos.floor() as usize).min(STOPS.len() - 2);
    let f = pos - i as f64;
    std::array::from_fn(|c| (STOPS[i][c] + f * (STOPS[i + 1][c] - STOPS[i][c])).round() as u8)
}

pub fn write_heatmap(path: &Path, m: &GridMatrix) -> Result<()> {
    let (lo, hi) = m.min_max();
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (w, h) = (m.width * CELL, m.height * CELL);
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.reserve(w * h * 3);
    for py in 0..h {
        for px in 0..w {
            out.extend(colour((m.get(px / CELL, py / CELL) - lo) / span));
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colour_endpoints() {
        assert_eq!(colour(0.0), [68, 1, 84]);
        assert_eq!(colour(1.0), [253, 231, 37]);
        assert_eq!(colour(-3.0), colour(0.0));
    }
}
