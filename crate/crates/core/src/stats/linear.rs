//! Least-squares projections for multivariate linear models.
//!
//! Columns are orthonormalized one at a time with twice-applied modified
//! Gram-Schmidt. A column whose remaining norm falls below a relative
//! tolerance is aliased (linearly dependent on earlier columns) and skipped,
//! which is how empty interaction cells drop out of categorical designs.

use crate::corpus::FEATURE_DIM;

/// Relative norm below which a column counts as aliased.
pub const ALIAS_TOL: f64 = 1e-9;

pub type Sscp = [[f64; FEATURE_DIM]; FEATURE_DIM];

/// Orthonormal basis of a column space, built incrementally.
#[derive(Debug, Clone, Default)]
pub struct Basis {
    vectors: Vec<Vec<f64>>,
}

impl Basis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    /// Adds a column; returns the new orthonormal vector, or `None` when the
    /// column is aliased with the current span.
    pub fn push(&mut self, column: &[f64]) -> Option<&[f64]> {
        let norm0 = dot(column, column).sqrt();
        if norm0 == 0.0 {
            return None;
        }
        let mut v = column.to_vec();
        for _ in 0..2 {
            for q in &self.vectors {
                let c = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm <= ALIAS_TOL * norm0 {
            return None;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        self.vectors.push(v);
        self.vectors.last().map(Vec::as_slice)
    }

    /// Residuals of the responses after projecting out the span.
    pub fn residuals(&self, y: &[[f64; FEATURE_DIM]]) -> Vec<[f64; FEATURE_DIM]> {
        let mut r = y.to_vec();
        for q in &self.vectors {
            let c = coefficients(q, &r);
            for (ri, qi) in r.iter_mut().zip(q) {
                for k in 0..FEATURE_DIM {
                    ri[k] -= c[k] * qi;
                }
            }
        }
        r
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `q' Y` for each response column.
pub fn coefficients(q: &[f64], y: &[[f64; FEATURE_DIM]]) -> [f64; FEATURE_DIM] {
    let mut c = [0.0; FEATURE_DIM];
    for (qi, yi) in q.iter().zip(y) {
        for k in 0..FEATURE_DIM {
            c[k] += qi * yi[k];
        }
    }
    c
}

/// Sums of squares and cross products `R' R`.
pub fn sscp(rows: &[[f64; FEATURE_DIM]]) -> Sscp {
    let mut m = [[0.0; FEATURE_DIM]; FEATURE_DIM];
    for r in rows {
        for i in 0..FEATURE_DIM {
            for j in i..FEATURE_DIM {
                m[i][j] += r[i] * r[j];
            }
        }
    }
    for i in 0..FEATURE_DIM {
        for j in 0..i {
            m[i][j] = m[j][i];
        }
    }
    m
}

/// Outcome of testing one block of columns against a base model.
#[derive(Debug, Clone)]
pub struct TermFit {
    /// Hypothesis SSCP: responses projected onto the term columns after the
    /// base columns have been removed.
    pub hypothesis: Sscp,
    /// Number of non-aliased term columns.
    pub df: usize,
    /// Rank of the base model.
    pub base_rank: usize,
}

/// Projects `y` onto the `term` columns orthogonalized against `base`.
pub fn fit_term(base: &[Vec<f64>], term: &[Vec<f64>], y: &[[f64; FEATURE_DIM]]) -> TermFit {
    let mut basis = Basis::new();
    for col in base {
        basis.push(col);
    }
    let base_rank = basis.rank();
    let mut hypothesis = [[0.0; FEATURE_DIM]; FEATURE_DIM];
    let mut df = 0;
    for col in term {
        if let Some(q) = basis.push(col) {
            let c = coefficients(q, y);
            for i in 0..FEATURE_DIM {
                for j in 0..FEATURE_DIM {
                    hypothesis[i][j] += c[i] * c[j];
                }
            }
            df += 1;
        }
    }
    TermFit {
        hypothesis,
        df,
        base_rank,
    }
}
