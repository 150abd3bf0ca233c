//! CART classification tree with Gini impurity.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::FEATURE_DIM;

/// Minimum impurity decrease for a split to count as an improvement.
const MIN_DECREASE: f64 = 1e-12;

/// Gini impurity `1 - sum p_k^2` of a class histogram.
pub fn gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

/// Size-weighted impurity of a two-way split.
pub fn split_impurity(left: &[usize], right: &[usize]) -> f64 {
    let nl: usize = left.iter().sum();
    let nr: usize = right.iter().sum();
    let n = (nl + nr) as f64;
    (nl as f64 * gini(left) + nr as f64 * gini(right)) / n
}

/// Index of the largest count; ties go to the lowest index.
pub fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (k, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = k;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_features: usize,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
}

/// Nodes in creation order; the root is node 0. Samples with
/// `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

struct Builder<'a, R> {
    x: &'a [[f64; FEATURE_DIM]],
    y: &'a [usize],
    n_classes: usize,
    params: TreeParams,
    rng: &'a mut R,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

impl DecisionTree {
    /// Grows a tree on `samples` (indices into `x`/`y`, repeats allowed).
    pub fn fit<R: Rng>(
        x: &[[f64; FEATURE_DIM]],
        y: &[usize],
        n_classes: usize,
        samples: Vec<usize>,
        params: TreeParams,
        rng: &mut R,
    ) -> Self {
        let mut b = Builder {
            x,
            y,
            n_classes,
            params,
            rng,
            nodes: Vec::new(),
        };
        b.grow(samples, 0);
        DecisionTree { nodes: b.nodes }
    }

    pub fn predict(&self, v: &[f64; FEATURE_DIM]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { class } => return class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if v[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

impl<R: Rng> Builder<'_, R> {
    fn histogram(&self, samples: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &s in samples {
            counts[self.y[s]] += 1;
        }
        counts
    }

    fn grow(&mut self, samples: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let counts = self.histogram(&samples);
        self.nodes.push(Node::Leaf {
            class: majority(&counts),
        });
        let parent = gini(&counts);
        let stop = parent == 0.0
            || samples.len() < 2 * self.params.min_leaf
            || self.params.max_depth.is_some_and(|d| depth >= d);
        if stop {
            return id;
        }
        let Some(best) = self.best_split(&samples, &counts, parent) else {
            return id;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = samples
            .into_iter()
            .partition(|&s| self.x[s][best.feature] <= best.threshold);
        let l = self.grow(left, depth + 1);
        let r = self.grow(right, depth + 1);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l,
            right: r,
        };
        id
    }

    /// Best split over `max_features` randomly drawn features. When none of
    /// them improves on the parent, the remaining features are tried in
    /// their drawn order before giving up.
    fn best_split(&mut self, samples: &[usize], counts: &[usize], parent: f64) -> Option<BestSplit> {
        let mut order: Vec<usize> = (0..FEATURE_DIM).collect();
        for i in 0..FEATURE_DIM - 1 {
            let j = self.rng.random_range(i..FEATURE_DIM);
            order.swap(i, j);
        }
        let k = self.params.max_features.clamp(1, FEATURE_DIM);
        let mut best: Option<BestSplit> = None;
        for (pos, &feature) in order.iter().enumerate() {
            if pos >= k && best.is_some() {
                break;
            }
            if let Some(s) = self.scan_feature(samples, counts, feature) {
                if s.impurity < parent - MIN_DECREASE && best.as_ref().is_none_or(|b| s.impurity < b.impurity)
                {
                    best = Some(s);
                }
            }
        }
        best
    }

    fn scan_feature(&self, samples: &[usize], counts: &[usize], feature: usize) -> Option<BestSplit> {
        let mut sorted: Vec<(f64, usize)> =
            samples.iter().map(|&s| (self.x[s][feature], self.y[s])).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = sorted.len();
        let min_leaf = self.params.min_leaf.max(1);
        let mut left = vec![0usize; self.n_classes];
        let mut right = counts.to_vec();
        let mut best: Option<BestSplit> = None;
        for i in 0..n - 1 {
            let (v, c) = sorted[i];
            left[c] += 1;
            right[c] -= 1;
            let next = sorted[i + 1].0;
            if next <= v || i + 1 < min_leaf || n - i - 1 < min_leaf {
                continue;
            }
            let impurity = split_impurity(&left, &right);
            if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                let mid = v + (next - v) / 2.0;
                let threshold = if mid < next { mid } else { v };
                best = Some(BestSplit {
                    feature,
                    threshold,
                    impurity,
                });
            }
        }
        best
    }
}
