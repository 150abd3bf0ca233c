//! Tukey boxplot summaries.

use serde::Serialize;

use crate::corpus::{Nation, NormalizedCorpus, FEATURE_NAMES};
use crate::error::Warning;
use crate::numeric::{median_sorted, quantile_sorted};

/// Fence distance in interquartile ranges.
pub const WHISKER_IQR: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outlier {
    pub track_id: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxplotSummary<K> {
    #[serde(flatten)]
    pub group_key: K,
    pub count: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<Outlier>,
}

/// Summarizes one group. Quartiles interpolate linearly between order
/// statistics; whiskers end at the most extreme points inside the fences
/// `q1 - 1.5 IQR` and `q3 + 1.5 IQR`. Returns `None` for an empty group.
pub fn summarize<K>(key: K, values: &[(String, f64)]) -> Option<BoxplotSummary<K>> {
    if values.is_empty() {
        return None;
    }
    let mut sorted: Vec<f64> = values.iter().map(|(_, v)| *v).collect();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - WHISKER_IQR * iqr, q3 + WHISKER_IQR * iqr);
    let inside = sorted.iter().filter(|v| (lo_fence..=hi_fence).contains(*v));
    let whisker_low = inside.clone().copied().fold(f64::INFINITY, f64::min);
    let whisker_high = inside.copied().fold(f64::NEG_INFINITY, f64::max);
    let mut outliers: Vec<Outlier> = values
        .iter()
        .filter(|(_, v)| *v < lo_fence || *v > hi_fence)
        .map(|(id, v)| Outlier {
            track_id: id.clone(),
            value: *v,
        })
        .collect();
    outliers.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then_with(|| a.track_id.cmp(&b.track_id))
    });
    Some(BoxplotSummary {
        group_key: key,
        count: values.len(),
        median: median_sorted(&sorted),
        q1,
        q3,
        whisker_low,
        whisker_high,
        outliers,
    })
}

/// Summaries for a list of groups; empty groups are skipped with a warning.
pub fn boxplot_summary<K: std::fmt::Debug>(
    groups: Vec<(K, Vec<(String, f64)>)>,
) -> (Vec<BoxplotSummary<K>>, Vec<Warning>) {
    let mut out = Vec::new();
    let mut warnings = Vec::new();
    for (key, values) in groups {
        let label = format!("{key:?}");
        match summarize(key, &values) {
            Some(s) => out.push(s),
            None => warnings.push(Warning::new("EmptyGroup", format!("group {label} has no values"))),
        }
    }
    (out, warnings)
}

/// Group key used for corpus boxplots.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CellKey {
    pub nation: Nation,
    pub year: i32,
    pub feature: &'static str,
}

/// Boxplots of the raw per-track medians for every (nation, year, feature)
/// cell present in the corpus, ordered by nation, year, then feature index.
pub fn corpus_boxplots(corpus: &NormalizedCorpus) -> (Vec<BoxplotSummary<CellKey>>, Vec<Warning>) {
    let cells = corpus.cell_counts();
    let mut groups = Vec::with_capacity(cells.len() * FEATURE_NAMES.len());
    for &(nation, year) in cells.keys() {
        for (k, feature) in FEATURE_NAMES.iter().enumerate() {
            let values = corpus
                .records()
                .iter()
                .filter(|r| r.nation == nation && r.year == year)
                .map(|r| (r.track_id.clone(), r.features.to_array()[k]))
                .collect();
            groups.push((
                CellKey {
                    nation,
                    year,
                    feature,
                },
                values,
            ));
        }
    }
    boxplot_summary(groups)
}
