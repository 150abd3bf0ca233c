//! Per-frame stereo meters: crest factor, channel correlation and the
//! box-counted phase-scope occupancy.

use serde::{Deserialize, Serialize};

/// Feature values for one analysis frame. `None` marks an undefined value
/// (silent or degenerate frame); such frames are excluded from medians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameFeatures {
    pub frame_index: usize,
    pub phase_space: f64,
    pub channel_correlation: Option<f64>,
    pub crest_factor: Option<f64>,
}

/// Peak over both channels divided by the RMS over both channels.
/// `None` for silent (or empty) frames.
pub fn crest_factor<T: Copy + Into<f64>>(left: &[T], right: &[T]) -> Option<f64> {
    let n = left.len() + right.len();
    if n == 0 {
        return None;
    }
    let channel = |x: &[T]| {
        x.iter().fold((0.0f64, 0.0f64), |(peak, sum_sq), &s| {
            let v: f64 = s.into();
            (peak.max(v.abs()), sum_sq + v * v)
        })
    };
    let ((peak_l, sq_l), (peak_r, sq_r)) = (channel(left), channel(right));
    // per-channel sums keep the result exactly symmetric under a channel swap
    let (peak, sum_sq) = (peak_l.max(peak_r), sq_l + sq_r);
    if sum_sq <= 0.0 {
        return None;
    }
    let rms = (sum_sq / n as f64).sqrt();
    Some((peak / rms).max(1.0))
}

/// Pearson correlation between the channels; `None` when either channel is
/// constant within the frame.
pub fn channel_correlation<T: Copy + Into<f64>>(left: &[T], right: &[T]) -> Option<f64> {
    let n = left.len().min(right.len());
    if n == 0 {
        return None;
    }
    let constant = |x: &[T]| {
        let first: f64 = x[0].into();
        x[..n].iter().all(|&v| v.into() == first)
    };
    if constant(left) || constant(right) {
        return None;
    }
    let mean = |x: &[T]| x[..n].iter().map(|&v| v.into()).sum::<f64>() / n as f64;
    let (ml, mr) = (mean(left), mean(right));
    let (mut slr, mut sll, mut srr) = (0.0, 0.0, 0.0);
    for (&l, &r) in left[..n].iter().zip(&right[..n]) {
        let dl = l.into() - ml;
        let dr = r.into() - mr;
        slr += dl * dr;
        sll += dl * dl;
        srr += dr * dr;
    }
    if sll <= 0.0 || srr <= 0.0 {
        return None;
    }
    // sqrt(x * x) == x exactly, so identical channels give exactly 1
    Some((slr / (sll * srr).sqrt()).clamp(-1.0, 1.0))
}

/// Box-counting result for one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxCount {
    /// Occupied boxes divided by `grid * grid`.
    pub occupancy: f64,
    pub occupied: usize,
    /// Samples that fell outside [-1, 1] and were clamped.
    pub clamped: usize,
}

/// Occupancy of the goniometer point cloud on a `grid x grid` partition of
/// [-1, 1]^2. Each sample pair is plotted at mid `(L+R)/2` and side `(L-R)/2`.
pub fn phase_space<T: Copy + Into<f64>>(left: &[T], right: &[T], grid: usize) -> f64 {
    box_count(left, right, grid).occupancy
}

pub fn box_count<T: Copy + Into<f64>>(left: &[T], right: &[T], grid: usize) -> BoxCount {
    assert!(grid >= 2, "box grid must be at least 2");
    let mut occupied = vec![false; grid * grid];
    let mut count = 0;
    let mut clamped = 0;
    for (&l, &r) in left.iter().zip(right) {
        let (mut l, mut r): (f64, f64) = (l.into(), r.into());
        if !(-1.0..=1.0).contains(&l) || !(-1.0..=1.0).contains(&r) {
            clamped += 1;
            l = l.clamp(-1.0, 1.0);
            r = r.clamp(-1.0, 1.0);
        }
        let mid = 0.5 * (l + r);
        let side = 0.5 * (l - r);
        let cell = box_index(side, grid) * grid + box_index(mid, grid);
        if !occupied[cell] {
            occupied[cell] = true;
            count += 1;
        }
    }
    BoxCount {
        occupancy: count as f64 / (grid * grid) as f64,
        occupied: count,
        clamped,
    }
}

/// Half-open boxes `[-1 + 2i/G, -1 + 2(i+1)/G)`, the last one closed at 1.
#[inline]
fn box_index(v: f64, grid: usize) -> usize {
    let i = ((v + 1.0) * 0.5 * grid as f64).floor();
    if i.is_nan() || i < 0.0 {
        0
    } else {
        (i as usize).min(grid - 1)
    }
}
