//! Random forest classification of track styles.

mod cv;
pub mod tree;

pub use cv::{confusion_csv, cross_validate, stratified_folds, style_report, CvMode, EvalReport, MeanStd};
pub use tree::{gini, DecisionTree, Node, TreeParams};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::FEATURE_DIM;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_features: usize,
    pub min_leaf: usize,
    /// `None` grows trees until leaves are pure.
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
    /// Folds for k-fold, repeats for the repeated-split mode.
    pub cv_folds: usize,
    pub cv_mode: CvMode,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_features: 2,
            min_leaf: 1,
            max_depth: None,
            bootstrap: true,
            seed: 0,
            cv_folds: 100,
            cv_mode: CvMode::KFold,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_trees == 0 {
            return bad("n_trees must be at least 1".into());
        }
        if !(1..=FEATURE_DIM).contains(&self.max_features) {
            return bad(format!(
                "max_features {} outside 1..={FEATURE_DIM}",
                self.max_features
            ));
        }
        if self.min_leaf == 0 {
            return bad("min_leaf must be at least 1".into());
        }
        if self.cv_folds < 2 {
            return bad(format!("cv_folds {} must be at least 2", self.cv_folds));
        }
        Ok(())
    }

    fn tree_params(&self) -> TreeParams {
        TreeParams {
            max_features: self.max_features,
            min_leaf: self.min_leaf,
            max_depth: self.max_depth,
        }
    }
}

/// Trained ensemble. Class indices follow the sorted label order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub classes: Vec<String>,
    pub trees: Vec<DecisionTree>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub label: String,
    /// Fraction of trees voting for each class, in `Forest::classes` order.
    pub votes: Vec<f64>,
}

/// Sorted distinct labels and each sample's index into them.
pub(crate) fn encode_labels<S: AsRef<str>>(labels: &[S]) -> (Vec<String>, Vec<usize>) {
    let mut classes: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
    classes.sort();
    classes.dedup();
    let y = labels
        .iter()
        .map(|s| {
            classes
                .binary_search_by(|c| c.as_str().cmp(s.as_ref()))
                .unwrap_or(0)
        })
        .collect();
    (classes, y)
}

pub fn train_forest<S: AsRef<str>>(
    x: &[[f64; FEATURE_DIM]],
    labels: &[S],
    config: &ForestConfig,
) -> Result<Forest> {
    config.validate()?;
    if x.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} feature rows but {} labels",
            x.len(),
            labels.len()
        )));
    }
    let (classes, y) = encode_labels(labels);
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }
    let samples: Vec<usize> = (0..x.len()).collect();
    let trees = fit_trees(x, &y, classes.len(), &samples, config);
    Ok(Forest { classes, trees })
}

/// Trees fitted on `samples`. Tree `t` draws from stream `t` of the
/// master seed, so results do not depend on scheduling.
pub(crate) fn fit_trees(
    x: &[[f64; FEATURE_DIM]],
    y: &[usize],
    n_classes: usize,
    samples: &[usize],
    config: &ForestConfig,
) -> Vec<DecisionTree> {
    let params = config.tree_params();
    (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(t as u64);
            let drawn = if config.bootstrap {
                (0..samples.len())
                    .map(|_| samples[rng.random_range(0..samples.len())])
                    .collect()
            } else {
                samples.to_vec()
            };
            DecisionTree::fit(x, y, n_classes, drawn, params, &mut rng)
        })
        .collect()
}

impl Forest {
    /// Vote counts per class.
    pub fn tally(&self, v: &[f64; FEATURE_DIM]) -> Vec<usize> {
        let mut votes = vec![0; self.classes.len()];
        for t in &self.trees {
            votes[t.predict(v)] += 1;
        }
        votes
    }

    /// Majority class index; ties go to the lexicographically smallest label.
    pub fn predict_index(&self, v: &[f64; FEATURE_DIM]) -> usize {
        tree::majority(&self.tally(v))
    }

    pub fn predict_one(&self, v: &[f64; FEATURE_DIM]) -> Prediction {
        let votes = self.tally(v);
        let n = self.trees.len() as f64;
        Prediction {
            label: self.classes[tree::majority(&votes)].clone(),
            votes: votes.iter().map(|&c| c as f64 / n).collect(),
        }
    }
}

pub fn predict(forest: &Forest, x: &[[f64; FEATURE_DIM]]) -> Vec<Prediction> {
    x.par_iter().map(|v| forest.predict_one(v)).collect()
}
