use nalgebra::{Matrix4, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::grid::{bmu_index, SomGrid};
use super::{InitMode, SomConfig};
use crate::corpus::FEATURE_DIM;
use crate::error::{Error, Result, Warning};

/// Learning rate reached on the last training step.
pub const FINAL_LEARNING_RATE: f64 = 0.01;
/// Neighbourhood radius, in grid units, reached on the last training step.
pub const FINAL_RADIUS: f64 = 1.0;

/// Warning for corpora with fewer tracks than map units.
pub fn size_warning(n: usize, config: &SomConfig) -> Option<Warning> {
    (n < config.units()).then(|| {
        Warning::new(
            "SparseMap",
            format!("{n} tracks for {} map units", config.units()),
        )
    })
}

/// Online Kohonen training. Each epoch visits every row once in a seeded
/// shuffled order. Learning rate and Gaussian radius decay exponentially
/// per step towards [`FINAL_LEARNING_RATE`] and [`FINAL_RADIUS`].
pub fn train_som(data: &[[f64; FEATURE_DIM]], config: &SomConfig) -> Result<SomGrid> {
    config.validate()?;
    if data.len() < 2 {
        return Err(Error::InsufficientRows {
            needed: 2,
            got: data.len(),
        });
    }
    if data.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite feature value".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut codebook = match config.init_mode {
        InitMode::PcaLinear => pca_init(data, config),
        InitMode::Random => random_init(data, config, &mut rng),
    };

    let (w, h) = (config.width, config.height);
    let total = (config.epochs * data.len()) as f64;
    let (a0, r0) = (config.initial_learning_rate, config.initial_radius);
    let (a1, r1) = (FINAL_LEARNING_RATE.min(a0), FINAL_RADIUS.min(r0));
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut hx = vec![0.0; w];
    let mut hy = vec![0.0; h];
    let mut epoch_errors = Vec::with_capacity(config.epochs);
    let mut step = 0usize;
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let frac = step as f64 / total;
            let alpha = a0 * (a1 / a0).powf(frac);
            let radius = r0 * (r1 / r0).powf(frac);
            let x = &data[i];
            let (b, _) = bmu_index(&codebook, x);
            let (bx, by) = (b % w, b / w);
            // the Gaussian kernel factorizes over the two grid axes
            let inv = -0.5 / (radius * radius);
            for (gx, v) in hx.iter_mut().enumerate() {
                let d = gx as f64 - bx as f64;
                *v = (d * d * inv).exp();
            }
            for (gy, v) in hy.iter_mut().enumerate() {
                let d = gy as f64 - by as f64;
                *v = (d * d * inv).exp();
            }
            for (u, unit) in codebook.iter_mut().enumerate() {
                let rate = alpha * hx[u % w] * hy[u / w];
                for k in 0..FEATURE_DIM {
                    unit[k] += rate * (x[k] - unit[k]);
                }
            }
            step += 1;
        }
        epoch_errors.push(mean_quantization_error(&codebook, data));
    }
    Ok(SomGrid {
        config: config.clone(),
        codebook,
        trained: true,
        epoch_errors,
    })
}

fn mean_quantization_error(codebook: &[[f64; FEATURE_DIM]], data: &[[f64; FEATURE_DIM]]) -> f64 {
    let errs: Vec<f64> = data.par_iter().map(|x| bmu_index(codebook, x).1.sqrt()).collect();
    errs.iter().sum::<f64>() / errs.len() as f64
}

/// Units spread over the plane of the two leading principal components,
/// spanning two standard deviations either side of the mean. The longer
/// grid side follows the first component. Each eigenvector's largest
/// entry is made positive so the layout does not depend on solver signs.
fn pca_init(data: &[[f64; FEATURE_DIM]], config: &SomConfig) -> Vec<[f64; FEATURE_DIM]> {
    let n = data.len() as f64;
    let mut mean = [0.0; FEATURE_DIM];
    for row in data {
        for k in 0..FEATURE_DIM {
            mean[k] += row[k] / n;
        }
    }
    let mut cov = Matrix4::<f64>::zeros();
    for row in data {
        for i in 0..FEATURE_DIM {
            for j in 0..FEATURE_DIM {
                cov[(i, j)] += (row[i] - mean[i]) * (row[j] - mean[j]) / n;
            }
        }
    }
    let eig = SymmetricEigen::new(cov);
    let mut idx: Vec<usize> = (0..FEATURE_DIM).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let axis = |rank: usize| -> [f64; FEATURE_DIM] {
        let c = eig.eigenvectors.column(idx[rank]);
        let lead = (0..FEATURE_DIM)
            .max_by(|&a, &b| c[a].abs().total_cmp(&c[b].abs()).then(b.cmp(&a)))
            .unwrap_or(0);
        let sign = if c[lead] < 0.0 { -1.0 } else { 1.0 };
        let scale = 2.0 * eig.eigenvalues[idx[rank]].max(0.0).sqrt() * sign;
        std::array::from_fn(|k| c[k] * scale)
    };
    let (first, second) = (axis(0), axis(1));
    let (w, h) = (config.width, config.height);
    let (along_x, along_y) = if w >= h { (first, second) } else { (second, first) };
    let mut codebook = Vec::with_capacity(w * h);
    for y in 0..h {
        let b = 2.0 * y as f64 / (h - 1) as f64 - 1.0;
        for x in 0..w {
            let a = 2.0 * x as f64 / (w - 1) as f64 - 1.0;
            codebook.push(std::array::from_fn(|k| mean[k] + a * along_x[k] + b * along_y[k]));
        }
    }
    codebook
}

fn random_init(
    data: &[[f64; FEATURE_DIM]],
    config: &SomConfig,
    rng: &mut ChaCha8Rng,
) -> Vec<[f64; FEATURE_DIM]> {
    let mut lo = [f64::INFINITY; FEATURE_DIM];
    let mut hi = [f64::NEG_INFINITY; FEATURE_DIM];
    for row in data {
        for k in 0..FEATURE_DIM {
            lo[k] = lo[k].min(row[k]);
            hi[k] = hi[k].max(row[k]);
        }
    }
    (0..config.units())
        .map(|_| std::array::from_fn(|k| lo[k] + (hi[k] - lo[k]) * rng.random::<f64>()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SomConfig {
        SomConfig {
            width: 6,
            height: 4,
            epochs: 5,
            initial_radius: 3.0,
            ..SomConfig::default()
        }
    }

    fn line(n: usize) -> Vec<[f64; 4]> {
        (0..n)
            .map(|i| {
                let t = i as f64 / n as f64 * 2.0 - 1.0;
                [t, 0.5 * t, -t, 0.1 * (7.0 * t).sin()]
            })
            .collect()
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = SomConfig { width: 1, ..small() };
        assert!(matches!(train_som(&line(10), &cfg), Err(Error::InvalidConfig(_))));
        let cfg = SomConfig {
            initial_learning_rate: 1.5,
            ..small()
        };
        assert!(matches!(train_som(&line(10), &cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn pca_init_spans_leading_axis() {
        let data = line(200);
        let cb = pca_init(&data, &small());
        // the data vary along (1, 0.5, -1, ~0); first component is dominant
        let left = cb[0];
        let right = cb[5];
        assert!(right[0] > left[0]);
        assert!(right[2] < left[2]);
        assert_eq!(cb.len(), 24);
    }

    #[test]
    fn both_init_modes_train() {
        for mode in [InitMode::PcaLinear, InitMode::Random] {
            let cfg = SomConfig {
                init_mode: mode,
                ..small()
            };
            let g = train_som(&line(100), &cfg).unwrap();
            assert_eq!(g.epoch_errors.len(), 5);
            assert!(g.codebook.iter().flatten().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn sparse_map_warning() {
        assert!(size_warning(10, &small()).is_some());
        assert!(size_warning(24, &small()).is_none());
    }
}
