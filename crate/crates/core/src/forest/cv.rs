//! Stratified cross-validation and evaluation reports.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{encode_labels, fit_trees, tree::majority, Forest, ForestConfig};
use crate::corpus::{Nation, NormalizedCorpus, FEATURE_DIM};
use crate::error::{Error, Result, Warning};

/// Share of each class held out per repeat in [`CvMode::Repeated`].
pub const REPEATED_TEST_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CvMode {
    /// Stratified k-fold; every sample is tested exactly once.
    #[default]
    KFold,
    /// Independent stratified 90/10 splits.
    Repeated,
}

impl std::str::FromStr for CvMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kfold" => Ok(Self::KFold),
            "repeated" => Ok(Self::Repeated),
            _ => Err(Error::InvalidConfig(format!(
                "cv mode {s:?}, expected kfold or repeated"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation across folds.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classes: Vec<String>,
    pub mode: CvMode,
    pub folds: usize,
    /// `confusion_counts[true][predicted]`, summed over folds.
    pub confusion_counts: Vec<Vec<usize>>,
    /// Rows of `confusion_counts` as percentages.
    pub confusion_percent: Vec<Vec<f64>>,
    pub accuracy: MeanStd,
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub f1: MeanStd,
    pub train_accuracy: MeanStd,
    /// Recall per class from the pooled confusion matrix.
    pub per_class_recall: Vec<f64>,
    /// `trace / total` of the pooled confusion matrix.
    pub pooled_accuracy: f64,
}

fn mix(seed: u64, i: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn by_class(y: &[usize], n_classes: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut members = vec![Vec::new(); n_classes];
    for (i, &c) in y.iter().enumerate() {
        members[c].push(i);
    }
    for m in &mut members {
        m.shuffle(rng);
    }
    members
}

/// Fold number per sample. Each class is shuffled and dealt round-robin,
/// continuing the count across classes so fold sizes differ by at most one.
pub fn stratified_folds(y: &[usize], n_classes: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; y.len()];
    let mut next = 0;
    for members in by_class(y, n_classes, &mut rng) {
        for i in members {
            fold[i] = next % k;
            next += 1;
        }
    }
    fold
}

fn repeated_split(y: &[usize], n_classes: usize, seed: u64) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test = vec![false; y.len()];
    for members in by_class(y, n_classes, &mut rng) {
        let take =
            ((members.len() as f64 * REPEATED_TEST_FRACTION).round() as usize).clamp(1, members.len() - 1);
        for &i in &members[..take] {
            test[i] = true;
        }
    }
    test
}

struct FoldScore {
    accuracy: f64,
    precision: f64,
    recall: f64,
    f1: f64,
    train_accuracy: f64,
    confusion: Vec<Vec<usize>>,
}

/// Macro precision, recall and F1 over the classes that occur in either
/// the truth or the predictions; undefined ratios count as 0.
fn macro_scores(confusion: &[Vec<usize>]) -> (f64, f64, f64) {
    let k = confusion.len();
    let (mut p, mut r, mut f, mut present) = (0.0, 0.0, 0.0, 0usize);
    for c in 0..k {
        let tp = confusion[c][c] as f64;
        let support: usize = confusion[c].iter().sum();
        let predicted: usize = (0..k).map(|t| confusion[t][c]).sum();
        if support == 0 && predicted == 0 {
            continue;
        }
        present += 1;
        let prec = if predicted > 0 { tp / predicted as f64 } else { 0.0 };
        let rec = if support > 0 { tp / support as f64 } else { 0.0 };
        p += prec;
        r += rec;
        f += if prec + rec > 0.0 {
            2.0 * prec * rec / (prec + rec)
        } else {
            0.0
        };
    }
    let m = present.max(1) as f64;
    (p / m, r / m, f / m)
}

fn score_fold(
    x: &[[f64; FEATURE_DIM]],
    y: &[usize],
    classes: &[String],
    train: &[usize],
    test: &[usize],
    config: &ForestConfig,
) -> FoldScore {
    let forest = Forest {
        classes: classes.to_vec(),
        trees: fit_trees(x, y, classes.len(), train, config),
    };
    let k = classes.len();
    let mut confusion = vec![vec![0; k]; k];
    for &i in test {
        confusion[y[i]][forest.predict_index(&x[i])] += 1;
    }
    let correct_train = train
        .iter()
        .filter(|&&i| majority(&forest.tally(&x[i])) == y[i])
        .count();
    let correct: usize = (0..k).map(|c| confusion[c][c]).sum();
    let (precision, recall, f1) = macro_scores(&confusion);
    FoldScore {
        accuracy: correct as f64 / test.len() as f64,
        precision,
        recall,
        f1,
        train_accuracy: correct_train as f64 / train.len() as f64,
        confusion,
    }
}

/// Cross-validated evaluation of a forest on `(x, labels)`.
///
/// Every class needs at least two samples. In k-fold mode `cv_folds` may
/// not exceed the sample count; classes smaller than `cv_folds` are
/// absent from some test folds, which is reported as a warning.
pub fn cross_validate<S: AsRef<str>>(
    x: &[[f64; FEATURE_DIM]],
    labels: &[S],
    config: &ForestConfig,
) -> Result<(EvalReport, Vec<Warning>)> {
    config.validate()?;
    if x.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} feature rows but {} labels",
            x.len(),
            labels.len()
        )));
    }
    let (classes, y) = encode_labels(labels);
    let k = classes.len();
    if k < 2 {
        return Err(Error::InsufficientClassSamples(format!(
            "need at least two classes, found {k}"
        )));
    }
    let mut sizes = vec![0usize; k];
    y.iter().for_each(|&c| sizes[c] += 1);
    if let Some(c) = (0..k).find(|&c| sizes[c] < 2) {
        return Err(Error::InsufficientClassSamples(format!(
            "class {:?} has {} sample(s), need 2",
            classes[c], sizes[c]
        )));
    }
    let folds = config.cv_folds;
    let mut warnings = Vec::new();
    let splits: Vec<(Vec<usize>, Vec<usize>)> = match config.cv_mode {
        CvMode::KFold => {
            if folds > x.len() {
                return Err(Error::InsufficientClassSamples(format!(
                    "{folds} folds for {} samples",
                    x.len()
                )));
            }
            let smallest = (0..k).min_by_key(|&c| (sizes[c], c)).unwrap_or(0);
            if sizes[smallest] < folds {
                warnings.push(Warning::new(
                    "SparseStratification",
                    format!(
                        "class {:?} has {} samples for {folds} folds",
                        classes[smallest], sizes[smallest]
                    ),
                ));
            }
            let assign = stratified_folds(&y, k, folds, config.seed);
            (0..folds)
                .map(|f| (0..x.len()).partition(|&i| assign[i] != f))
                .collect()
        }
        CvMode::Repeated => (0..folds)
            .map(|r| {
                let test = repeated_split(&y, k, mix(config.seed, r as u64));
                (0..x.len()).partition(|&i| !test[i])
            })
            .collect(),
    };
    let scores: Vec<FoldScore> = splits
        .par_iter()
        .enumerate()
        .map(|(f, (train, test))| {
            let cfg = ForestConfig {
                seed: mix(config.seed ^ 0x5EED, f as u64),
                ..config.clone()
            };
            score_fold(x, &y, &classes, train, test, &cfg)
        })
        .collect();

    let mut confusion = vec![vec![0usize; k]; k];
    for s in &scores {
        for (row, add) in confusion.iter_mut().zip(&s.confusion) {
            for (c, a) in row.iter_mut().zip(add) {
                *c += a;
            }
        }
    }
    let confusion_percent = confusion
        .iter()
        .map(|row| {
            let total: usize = row.iter().sum();
            row.iter()
                .map(|&c| {
                    if total == 0 {
                        0.0
                    } else {
                        100.0 * c as f64 / total as f64
                    }
                })
                .collect()
        })
        .collect();
    let per_class_recall = confusion
        .iter()
        .enumerate()
        .map(|(c, row)| {
            let total: usize = row.iter().sum();
            if total == 0 {
                0.0
            } else {
                row[c] as f64 / total as f64
            }
        })
        .collect();
    let total: usize = confusion.iter().flatten().sum();
    let pooled_accuracy = (0..k).map(|c| confusion[c][c]).sum::<usize>() as f64 / total as f64;
    let collect = |f: fn(&FoldScore) -> f64| MeanStd::of(&scores.iter().map(f).collect::<Vec<_>>());
    let report = EvalReport {
        classes,
        mode: config.cv_mode,
        folds,
        confusion_counts: confusion,
        confusion_percent,
        accuracy: collect(|s| s.accuracy),
        precision: collect(|s| s.precision),
        recall: collect(|s| s.recall),
        f1: collect(|s| s.f1),
        train_accuracy: collect(|s| s.train_accuracy),
        per_class_recall,
        pooled_accuracy,
    };
    Ok((report, warnings))
}

/// Style classification within one nation, on the corpus-wide normalized
/// features. Tracks without a style label are skipped with a warning.
pub fn style_report(
    corpus: &NormalizedCorpus,
    nation: Nation,
    config: &ForestConfig,
) -> Result<(EvalReport, Vec<Warning>)> {
    let mut x = Vec::new();
    let mut labels = Vec::new();
    let mut unlabeled = 0usize;
    for (r, z) in corpus.records().iter().zip(corpus.feature_matrix()) {
        if r.nation != nation {
            continue;
        }
        match r.style.as_deref() {
            Some(s) if !s.is_empty() => {
                x.push(*z);
                labels.push(s);
            }
            _ => unlabeled += 1,
        }
    }
    let mut warnings = Vec::new();
    if unlabeled > 0 {
        warnings.push(Warning::new(
            "MissingStyle",
            format!("{unlabeled} {nation} track(s) without style skipped"),
        ));
    }
    let (report, more) = cross_validate(&x, &labels, config)?;
    warnings.extend(more);
    Ok((report, warnings))
}

/// Percentages rounded to tenths by largest remainder, so each row still
/// sums to exactly 100.0 after rounding.
fn round_row(row: &[f64]) -> Vec<f64> {
    let total: f64 = row.iter().sum();
    if total == 0.0 {
        return vec![0.0; row.len()];
    }
    let tenths: Vec<f64> = row.iter().map(|v| v * 10.0).collect();
    let mut floor: Vec<i64> = tenths.iter().map(|v| v.floor() as i64).collect();
    let short = 1000 - floor.iter().sum::<i64>();
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = tenths[a] - tenths[a].floor();
        let rb = tenths[b] - tenths[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(short.max(0) as usize) {
        floor[i] += 1;
    }
    floor.iter().map(|&t| t as f64 / 10.0).collect()
}

/// Row-normalized confusion matrix as CSV with one decimal.
pub fn confusion_csv(report: &EvalReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["true\\predicted".to_string()];
    header.extend(report.classes.iter().cloned());
    w.write_record(&header)?;
    for (class, row) in report.classes.iter().zip(&report.confusion_percent) {
        let mut rec = vec![class.clone()];
        rec.extend(round_row(row).iter().map(|v| format!("{v:.1}")));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_are_stratified_and_balanced() {
        let y: Vec<usize> = (0..103)
            .map(|i| usize::from(i % 4 == 0) + usize::from(i % 10 == 0))
            .collect();
        let f = stratified_folds(&y, 3, 10, 1);
        for fold in 0..10 {
            let size = f.iter().filter(|&&v| v == fold).count();
            assert!((10..=11).contains(&size));
        }
        for c in 0..3 {
            let per: Vec<usize> = (0..10)
                .map(|fold| (0..103).filter(|&i| y[i] == c && f[i] == fold).count())
                .collect();
            let (lo, hi) = (per.iter().min().unwrap(), per.iter().max().unwrap());
            assert!(hi - lo <= 1, "class {c}: {per:?}");
        }
    }

    #[test]
    fn macro_scores_follow_union_convention() {
        // class 2 never occurs; class 1 predicted but absent from truth
        let m = vec![vec![3, 1, 0], vec![0, 0, 0], vec![0, 0, 0]];
        let (p, r, f) = macro_scores(&m);
        assert!((p - 0.5).abs() < 1e-12);
        assert!((r - 0.375).abs() < 1e-12);
        let f0 = 2.0 * 0.75 / 1.75;
        assert!((f - f0 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn rounding_keeps_rows_at_100() {
        let row = vec![100.0 / 3.0; 3];
        let r = round_row(&row);
        assert_eq!(r.iter().sum::<f64>().round(), 100.0);
        assert_eq!(r, vec![33.4, 33.3, 33.3]);
        let nine = vec![100.0 / 9.0; 9];
        let tenths: i64 = round_row(&nine).iter().map(|v| (v * 10.0).round() as i64).sum();
        assert_eq!(tenths, 1000);
    }

    #[test]
    fn repeated_split_holds_out_each_class() {
        let y: Vec<usize> = (0..50).map(|i| usize::from(i < 5)).collect();
        let t = repeated_split(&y, 2, 3);
        assert_eq!((0..5).filter(|&i| t[i]).count(), 1);
        assert_eq!((5..50).filter(|&i| t[i]).count(), 5);
    }

    #[test]
    fn too_few_samples() {
        let x = vec![[0.0; 4]; 3];
        let err = cross_validate(&x, &["a", "a", "b"], &ForestConfig::default()).unwrap_err();
        assert!(matches!(err, Error::InsufficientClassSamples(_)));
        let err = cross_validate(&x, &["a", "a", "a"], &ForestConfig::default()).unwrap_err();
        assert!(matches!(err, Error::InsufficientClassSamples(_)));
    }
}
