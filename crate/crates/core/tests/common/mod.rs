//! Brute-force MANOVA reference: dense normal equations, Gauss-Jordan
//! inverse and determinants, shared by the MANOVA and acceptance suites.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};
use studiomap::stats::ManovaResult;
use studiomap::Nation;

pub type Row = [f64; 4];

pub struct Data {
    pub y: Vec<Row>,
    pub nation: Vec<Nation>,
    pub year: Vec<i32>,
}

pub fn synth(seed: u64, n: usize, years: i32) -> Data {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = Data {
        y: Vec::with_capacity(n),
        nation: Vec::with_capacity(n),
        year: Vec::with_capacity(n),
    };
    for i in 0..n {
        let g = if i % 2 == 0 { Nation::Germany } else { Nation::Usa };
        let yr = 1990 + rng.random_range(0..years);
        let mut row = [0.0; 4];
        for v in row.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        // correlated responses and a little structure
        row[1] += 0.5 * row[0] + 0.05 * f64::from(yr - 1990);
        row[2] += if g == Nation::Germany { 0.3 } else { 0.0 };
        d.y.push(row);
        d.nation.push(g);
        d.year.push(yr);
    }
    d
}

pub fn mat_inv(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| f64::from(u8::from(i == j))));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap();
        m.swap(c, p);
        let piv = m[c][c];
        assert!(piv.abs() > 1e-12, "singular oracle matrix");
        m[c].iter_mut().for_each(|v| *v /= piv);
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                let pivot_row = m[c].clone();
                for (v, pv) in m[r].iter_mut().zip(pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

pub fn det(a: &[Vec<f64>]) -> f64 {
    let mut m = a.to_vec();
    let n = m.len();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap();
        if p != c {
            m.swap(c, p);
            d = -d;
        }
        d *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    d
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let inner = b.len();
    a.iter()
        .map(|r| {
            (0..b[0].len())
                .map(|j| (0..inner).map(|k| r[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a[0].len())
        .map(|j| a.iter().map(|r| r[j]).collect())
        .collect()
}

pub fn as_mat(y: &[Row]) -> Vec<Vec<f64>> {
    y.iter().map(|r| r.to_vec()).collect()
}

/// Residual SSCP `Y'Y - Y'X (X'X)^-1 X'Y` for row-major design `x`.
pub fn residual_sscp(x: &[Vec<f64>], y: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let xt = transpose(x);
    let xtx_inv = mat_inv(&matmul(&xt, x));
    let xty = matmul(&xt, y);
    let yt = transpose(y);
    let yty = matmul(&yt, y);
    let fitted = matmul(&transpose(&xty), &matmul(&xtx_inv, &xty));
    yty.iter()
        .zip(fitted)
        .map(|(a, b)| a.iter().zip(b).map(|(u, v)| u - v).collect())
        .collect()
}

pub fn wilks(e: &[Vec<f64>], h: &[Vec<f64>]) -> f64 {
    let t: Vec<Vec<f64>> = e
        .iter()
        .zip(h)
        .map(|(a, b)| a.iter().zip(b).map(|(u, v)| u + v).collect())
        .collect();
    det(e) / det(&t)
}

/// Numeric coding: H for coefficient `j` from `(LB)' (L (X'X)^-1 L')^-1 (LB)`.
pub fn oracle_numeric(d: &Data) -> [f64; 3] {
    let mean = d.year.iter().map(|&y| f64::from(y)).sum::<f64>() / d.year.len() as f64;
    let x: Vec<Vec<f64>> = d
        .nation
        .iter()
        .zip(&d.year)
        .map(|(g, &yr)| {
            let s = if *g == Nation::Germany { 1.0 } else { -1.0 };
            let c = f64::from(yr) - mean;
            vec![1.0, s, c, s * c]
        })
        .collect();
    let y = as_mat(&d.y);
    let xt = transpose(&x);
    let xtx_inv = mat_inv(&matmul(&xt, &x));
    let b = matmul(&xtx_inv, &matmul(&xt, &y));
    let e = residual_sscp(&x, &y);
    let mut out = [0.0; 3];
    for (slot, j) in out.iter_mut().zip(1..4) {
        let lb = &b[j];
        let scale = 1.0 / xtx_inv[j][j];
        let h: Vec<Vec<f64>> = (0..4)
            .map(|r| (0..4).map(|c| lb[r] * lb[c] * scale).collect())
            .collect();
        *slot = wilks(&e, &h);
    }
    out
}

/// Categorical coding: H as the drop in residual SSCP when the term joins
/// its hierarchical base model.
pub fn oracle_categorical(d: &Data) -> [f64; 3] {
    let mut levels: Vec<i32> = d.year.clone();
    levels.sort_unstable();
    levels.dedup();
    let cols = |i: usize, parts: &[&str]| -> Vec<f64> {
        let s = if d.nation[i] == Nation::Germany { 1.0 } else { -1.0 };
        let dummies: Vec<f64> = levels[1..]
            .iter()
            .map(|&l| f64::from(u8::from(d.year[i] == l)))
            .collect();
        let mut row = vec![1.0];
        for p in parts {
            match *p {
                "n" => row.push(s),
                "y" => row.extend(&dummies),
                "i" => row.extend(dummies.iter().map(|v| v * s)),
                _ => unreachable!(),
            }
        }
        row
    };
    let design = |parts: &[&str]| -> Vec<Vec<f64>> { (0..d.y.len()).map(|i| cols(i, parts)).collect() };
    let y = as_mat(&d.y);
    let e = residual_sscp(&design(&["n", "y", "i"]), &y);
    let diff = |small: &[&str], big: &[&str]| -> Vec<Vec<f64>> {
        let a = residual_sscp(&design(small), &y);
        let b = residual_sscp(&design(big), &y);
        a.iter()
            .zip(b)
            .map(|(u, v)| u.iter().zip(v).map(|(p, q)| p - q).collect())
            .collect()
    };
    [
        wilks(&e, &diff(&["y"], &["n", "y"])),
        wilks(&e, &diff(&["n"], &["n", "y"])),
        wilks(&e, &diff(&["n", "y"], &["n", "y", "i"])),
    ]
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Rao's F in textbook notation: `w = v + q - (p + q + 1)/2`,
/// `s = sqrt((p^2 q^2 - 4) / (p^2 + q^2 - 5))`, `df2 = w s - p q / 2 + 1`.
pub fn check_rao(r: &ManovaResult, lambda: f64, q: f64, v: f64) {
    let p = 4.0;
    let s = if p * p + q * q - 5.0 > 0.0 {
        ((p * p * q * q - 4.0) / (p * p + q * q - 5.0)).sqrt()
    } else {
        1.0
    };
    let df2 = (v + q - (p + q + 1.0) / 2.0) * s - p * q / 2.0 + 1.0;
    let y = lambda.powf(1.0 / s);
    let f = (1.0 - y) / y * df2 / (p * q);
    let pval = FisherSnedecor::new(p * q, df2).unwrap().sf(f);
    assert!(rel(r.df2, df2) < 1e-12, "{r:?} df2 {df2}");
    assert!(rel(r.f_stat, f) < 1e-8, "{r:?} F {f}");
    assert!(
        rel(r.p_value, pval) < 1e-8 || (r.p_value - pval).abs() < 1e-15,
        "{r:?} p {pval}"
    );
}
