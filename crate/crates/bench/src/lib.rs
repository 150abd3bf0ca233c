//! Synthetic inputs shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use studiomap::features::StereoSignal;
use studiomap::Nation;

/// Click track with a 1 kHz burst on every beat and faint stereo noise.
pub fn click_signal(bpm: f64, secs: f64, sample_rate: u32) -> StereoSignal {
    let sr = f64::from(sample_rate);
    let n = (secs * sr) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut left = vec![0.0f32; n];
    let mut right = vec![0.0f32; n];
    for (l, r) in left.iter_mut().zip(right.iter_mut()) {
        *l = rng.random_range(-0.01..0.01);
        *r = rng.random_range(-0.01..0.01);
    }
    let period = 60.0 / bpm * sr;
    let burst = (0.01 * sr) as usize;
    let mut k = 0.0;
    while (k * period) as usize + burst < n {
        let start = (k * period).round() as usize;
        for i in 0..burst {
            let t = i as f64 / sr;
            let v = (0.8 * (2.0 * std::f64::consts::PI * 1000.0 * t).sin() * (-t / 0.002).exp()) as f32;
            left[start + i] += v;
            right[start + i] += v;
        }
        k += 1.0;
    }
    StereoSignal::new(left, right, sample_rate).expect("valid signal")
}

/// Gaussian-ish feature rows with nation and year labels.
pub fn feature_table(n: usize, seed: u64) -> (Vec<[f64; 4]>, Vec<Nation>, Vec<i32>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut nations = Vec::with_capacity(n);
    let mut years = Vec::with_capacity(n);
    for i in 0..n {
        let nation = if i % 2 == 0 { Nation::Germany } else { Nation::Usa };
        let shift = if nation == Nation::Germany { 0.4 } else { 0.0 };
        rows.push(std::array::from_fn(|_| {
            (0..6).map(|_| rng.random_range(-1.0..1.0)).sum::<f64>() + shift
        }));
        nations.push(nation);
        years.push(1990 + rng.random_range(0..25));
    }
    (rows, nations, years)
}

/// Style labels driven by the first two features, with label noise.
pub fn style_labels(rows: &[[f64; 4]], seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rows.iter()
        .map(|r| {
            let base = ((r[0] + 3.0).max(0.0) as usize).min(5) + usize::from(r[1] > 0.0) * 6;
            let k = if rng.random_bool(0.3) {
                rng.random_range(0..9)
            } else {
                base % 9
            };
            format!("style{k}")
        })
        .collect()
}
