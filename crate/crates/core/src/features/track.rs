use super::frame::{box_count, channel_correlation, crest_factor, FrameFeatures};
use super::tempo::estimate_bpm;
use super::{ExtractionConfig, StereoSignal};
use crate::corpus::{FeatureVector, FEATURE_NAMES};
use crate::error::{Error, Result};
use crate::numeric::median;

/// A track needs at least this many frames for its medians.
pub const MIN_FRAMES: usize = 10;

/// Frames the signal and computes the three frame-level meters.
/// Returns the frames and the number of clamped out-of-range samples.
pub fn frame_features(
    signal: &StereoSignal,
    config: &ExtractionConfig,
) -> Result<(Vec<FrameFeatures>, usize)> {
    config.validate()?;
    let n = signal.len();
    let count = if n >= config.frame_length {
        1 + (n - config.frame_length) / config.hop_length
    } else {
        0
    };
    let mut clamped = 0;
    let frames = (0..count)
        .map(|i| {
            let range = i * config.hop_length..i * config.hop_length + config.frame_length;
            let (l, r) = (&signal.left()[range.clone()], &signal.right()[range]);
            let bc = box_count(l, r, config.box_grid);
            clamped += bc.clamped;
            FrameFeatures {
                frame_index: i,
                phase_space: bc.occupancy,
                channel_correlation: channel_correlation(l, r),
                crest_factor: crest_factor(l, r),
            }
        })
        .collect();
    Ok((frames, clamped))
}

/// Per-track median feature vector, tempo estimated from the audio.
pub fn track_features(signal: &StereoSignal, config: &ExtractionConfig) -> Result<FeatureVector> {
    track_features_with_bpm(signal, config, None)
}

/// As [`track_features`], but a known tempo skips estimation.
pub fn track_features_with_bpm(
    signal: &StereoSignal,
    config: &ExtractionConfig,
    bpm_override: Option<f64>,
) -> Result<FeatureVector> {
    let (frames, _) = frame_features(signal, config)?;
    if frames.len() < MIN_FRAMES {
        return Err(Error::TooShort(format!(
            "{} frames, need {MIN_FRAMES}",
            frames.len()
        )));
    }
    let bpm = match bpm_override {
        Some(b) => b,
        None => estimate_bpm(signal, config)?,
    };
    let defined_median = |k: usize, values: Vec<f64>| {
        median(&values)
            .ok_or_else(|| Error::InvalidInput(format!("no frame with a defined {}", FEATURE_NAMES[k])))
    };
    let phase_space = defined_median(1, frames.iter().map(|f| f.phase_space).collect())?;
    let channel_correlation =
        defined_median(2, frames.iter().filter_map(|f| f.channel_correlation).collect())?;
    let crest_factor = defined_median(3, frames.iter().filter_map(|f| f.crest_factor).collect())?;
    Ok(FeatureVector {
        bpm,
        phase_space,
        channel_correlation,
        crest_factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::frame;

    fn cfg() -> ExtractionConfig {
        ExtractionConfig::default()
    }

    #[test]
    fn identical_sine_frames_give_single_frame_crest() {
        // 441 Hz at 44.1 kHz: period of 100 samples, hop 2048 shifts phase,
        // so use a frame/hop that are multiples of the period.
        let config = ExtractionConfig {
            frame_length: 4000,
            hop_length: 2000,
            ..cfg()
        };
        let n = 2000 * 30;
        let s: Vec<f32> = (0..n)
            .map(|i| (0.9 * (2.0 * std::f64::consts::PI * i as f64 / 100.0).sin()) as f32)
            .collect();
        let sig = StereoSignal::new(s.clone(), s.clone(), 44100).unwrap();
        let single = frame::crest_factor(&s[..4000], &s[..4000]).unwrap();
        let fv = track_features_with_bpm(&sig, &config, Some(120.0)).unwrap();
        assert_eq!(fv.crest_factor, single);
        assert_eq!(fv.channel_correlation, 1.0);
        assert_eq!(fv.bpm, 120.0);
    }

    #[test]
    fn alternating_correlation_has_zero_median() {
        // 10 non-overlapping frames, right channel alternately +left / -left
        let config = ExtractionConfig {
            frame_length: 1024,
            hop_length: 1024,
            ..cfg()
        };
        let mut l = Vec::new();
        let mut r = Vec::new();
        for f in 0..10 {
            let sign = if f % 2 == 0 { 1.0 } else { -1.0 };
            for i in 0..1024 {
                let v = (0.5 * ((i as f64) * 0.05).sin()) as f32;
                l.push(v);
                r.push(sign * v);
            }
        }
        let sig = StereoSignal::new(l, r, 44100).unwrap();
        let (frames, _) = frame_features(&sig, &config).unwrap();
        assert_eq!(frames.len(), 10);
        let fv = track_features_with_bpm(&sig, &config, Some(100.0)).unwrap();
        assert!(fv.channel_correlation.abs() < 1e-12);
    }

    #[test]
    fn one_frame_is_too_short() {
        let config = ExtractionConfig {
            frame_length: 44100,
            hop_length: 22050,
            ..cfg()
        };
        let sig = StereoSignal::from_mono(vec![0.1; 44100], 44100).unwrap();
        assert!(matches!(track_features(&sig, &config), Err(Error::TooShort(_))));
    }

    #[test]
    fn silent_frames_are_excluded_from_medians() {
        let config = ExtractionConfig {
            frame_length: 1000,
            hop_length: 1000,
            ..cfg()
        };
        // 12 frames: 4 silent, 8 constant-amplitude square waves (crest 1)
        let mut s = vec![0.0f32; 4000];
        s.extend((0..8000).map(|i| if i % 2 == 0 { 0.5f32 } else { -0.5 }));
        let sig = StereoSignal::from_mono(s, 44100).unwrap();
        let fv = track_features_with_bpm(&sig, &config, Some(130.0)).unwrap();
        assert_eq!(fv.crest_factor, 1.0);
        assert_eq!(fv.channel_correlation, 1.0);
    }
}
