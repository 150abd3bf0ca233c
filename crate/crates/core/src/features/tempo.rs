//! Global tempo estimation: spectral-flux onset envelope, autocorrelation over
//! the admissible beat periods, parabolic peak refinement and a half-tempo
//! correction.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{ExtractionConfig, StereoSignal};
use crate::error::{Error, Result};

/// Minimum signal length for tempo estimation.
pub const MIN_TEMPO_SECS: f64 = 5.0;

/// Normalized autocorrelation (peak over lag-0 energy) below which a signal
/// is treated as having no beat. White-noise envelopes stay around 0.02.
pub const NO_BEAT_THRESHOLD: f64 = 0.08;

/// Candidates below this tempo are checked for a double-tempo reading.
pub const HALF_TEMPO_LIMIT: f64 = 87.5;

/// Fraction of the main peak the double-tempo lag must reach to be preferred.
pub const DOUBLE_TEMPO_RATIO: f64 = 0.8;

/// Detailed tempo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TempoEstimate {
    pub bpm: f64,
    /// Normalized autocorrelation at the selected period.
    pub strength: f64,
    /// Onset envelope rate in frames per second.
    pub envelope_rate: f64,
}

pub fn estimate_bpm(signal: &StereoSignal, config: &ExtractionConfig) -> Result<f64> {
    estimate_tempo(signal, config).map(|t| t.bpm)
}

pub fn estimate_tempo(signal: &StereoSignal, config: &ExtractionConfig) -> Result<TempoEstimate> {
    config.validate()?;
    if signal.duration_secs() < MIN_TEMPO_SECS {
        return Err(Error::TooShort(format!(
            "{:.2} s signal, tempo needs {MIN_TEMPO_SECS} s",
            signal.duration_secs()
        )));
    }
    let (envelope, rate) = onset_envelope(&signal.mono(), signal.sample_rate());
    let (bpm_min, bpm_max) = config.bpm_range;

    let lag_lo = ((60.0 * rate / bpm_max).floor() as usize).max(1);
    let lag_hi = (60.0 * rate / bpm_min).ceil() as usize;
    if lag_hi + 1 >= envelope.len() {
        return Err(Error::TooShort("envelope shorter than the slowest beat".into()));
    }
    let acf = autocorrelation(&envelope, lag_hi + 1);
    let energy = acf[0];
    if !(energy > 0.0) {
        return Err(Error::NoBeat {
            strength: 0.0,
            threshold: NO_BEAT_THRESHOLD,
        });
    }

    let admissible = |lag: f64| {
        let bpm = 60.0 * rate / lag;
        bpm >= bpm_min && bpm <= bpm_max
    };
    // strict local maxima in the admissible range; the first lag wins ties
    let mut best: Option<(f64, f64)> = None;
    for k in lag_lo.max(1)..=lag_hi {
        if acf[k] > acf[k - 1] && acf[k] >= acf[k + 1] {
            let (lag, height) = parabolic_peak(&acf, k);
            if admissible(lag) && best.is_none_or(|(_, h)| height > h) {
                best = Some((lag, height));
            }
        }
    }
    let Some((lag, height)) = best else {
        return Err(Error::NoBeat {
            strength: 0.0,
            threshold: NO_BEAT_THRESHOLD,
        });
    };
    let strength = height / energy;
    if strength < NO_BEAT_THRESHOLD {
        return Err(Error::NoBeat {
            strength,
            threshold: NO_BEAT_THRESHOLD,
        });
    }

    let mut bpm = 60.0 * rate / lag;
    if bpm < HALF_TEMPO_LIMIT && 2.0 * bpm <= bpm_max {
        let half = lag / 2.0;
        let k = half.round() as usize;
        if k >= 1 && k + 1 < acf.len() {
            let (half_lag, half_height) = refine_near(&acf, k);
            if half_height >= DOUBLE_TEMPO_RATIO * height {
                bpm = 60.0 * rate / half_lag;
            }
        }
    }
    Ok(TempoEstimate {
        bpm,
        strength,
        envelope_rate: rate,
    })
}

/// Half-wave rectified spectral flux of log-compressed magnitudes.
/// Returns the envelope and its frame rate.
fn onset_envelope(mono: &[f32], sample_rate: u32) -> (Vec<f64>, f64) {
    // ~23 ms window, quarter-window hop
    let window_len = (f64::from(sample_rate) * 0.0232).round() as usize;
    let window_len = window_len.next_power_of_two().max(256);
    let hop = window_len / 4;
    let rate = f64::from(sample_rate) / hop as f64;

    let hann: Vec<f64> = (0..window_len)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / window_len as f64).cos())
        .collect();
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(window_len);
    let bins = window_len / 2 + 1;
    let frames = if mono.len() >= window_len {
        1 + (mono.len() - window_len) / hop
    } else {
        0
    };

    let mut buf = vec![Complex::new(0.0, 0.0); window_len];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut prev = vec![0.0f64; bins];
    let mut cur = vec![0.0f64; bins];
    let mut envelope = Vec::with_capacity(frames);
    for f in 0..frames {
        let start = f * hop;
        for (i, c) in buf.iter_mut().enumerate() {
            *c = Complex::new(f64::from(mono[start + i]) * hann[i], 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (m, c) in cur.iter_mut().zip(&buf[..bins]) {
            *m = (1.0 + 100.0 * c.norm()).ln();
        }
        let flux = if f == 0 {
            0.0
        } else {
            cur.iter().zip(&prev).map(|(c, p)| (c - p).max(0.0)).sum::<f64>()
        };
        envelope.push(flux);
        std::mem::swap(&mut prev, &mut cur);
    }
    let mean = envelope.iter().sum::<f64>() / envelope.len().max(1) as f64;
    for e in &mut envelope {
        *e -= mean;
    }
    (envelope, rate)
}

/// Biased autocorrelation for lags `0..max_lag` inclusive.
fn autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    (0..=max_lag)
        .map(|lag| x[..x.len() - lag].iter().zip(&x[lag..]).map(|(a, b)| a * b).sum())
        .collect()
}

/// Vertex of the parabola through `(k-1, k, k+1)`.
fn parabolic_peak(y: &[f64], k: usize) -> (f64, f64) {
    let (a, b, c) = (y[k - 1], y[k], y[k + 1]);
    let denom = a - 2.0 * b + c;
    if denom >= 0.0 {
        return (k as f64, b);
    }
    let delta = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
    (k as f64 + delta, b - 0.25 * (a - c) * delta)
}

/// Best local maximum within one lag of `k`, refined.
fn refine_near(y: &[f64], k: usize) -> (f64, f64) {
    let lo = k.saturating_sub(1).max(1);
    let hi = (k + 1).min(y.len() - 2);
    let best = (lo..=hi).max_by(|&a, &b| y[a].total_cmp(&y[b])).unwrap_or(k);
    parabolic_peak(y, best)
}
