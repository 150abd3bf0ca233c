//! Descriptive and inferential statistics over the normalized corpus.

pub mod boxplot;
pub mod dist;
pub mod linear;
pub mod manova;

pub use boxplot::{boxplot_summary, corpus_boxplots, summarize, BoxplotSummary, CellKey, Outlier};
pub use dist::{f_quantile, f_sf};
pub use manova::{
    anova_posthoc, fit_two_way, format_p, manova_two_way, AnovaResult, Effect, ManovaResult, TwoWayFit,
    YearCoding,
};

use crate::corpus::{Nation, NormalizedCorpus};
use crate::error::Result;

/// MANOVA and follow-up ANOVAs on a corpus, fitted once.
pub fn analyze_corpus(
    corpus: &NormalizedCorpus,
    coding: YearCoding,
) -> Result<(Vec<ManovaResult>, Vec<AnovaResult>)> {
    let nation: Vec<Nation> = corpus.records().iter().map(|r| r.nation).collect();
    let year: Vec<i32> = corpus.records().iter().map(|r| r.year).collect();
    let fit = fit_two_way(corpus.feature_matrix(), &nation, &year, coding)?;
    Ok((fit.manova()?, fit.anova()))
}
