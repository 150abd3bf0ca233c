//! Two-way multivariate linear model over nation and year with Wilks'
//! lambda tests and univariate follow-up F tests.
//!
//! Design columns are `[intercept, nation, year, nation x year]` with nation
//! coded +1 (G) / -1 (U). In numeric mode year is a centered covariate and
//! each term is tested after all others. In categorical mode year is
//! treatment-coded over the distinct years and terms are tested
//! hierarchically (Type II): main effects after the other main effect, the
//! interaction after both.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::dist::f_sf;
use super::linear::{fit_term, sscp, Basis, Sscp};
use crate::corpus::{Nation, FEATURE_DIM, FEATURE_NAMES};
use crate::error::{Error, Result};

/// Smallest corpus the model accepts.
pub const MIN_OBSERVATIONS: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum YearCoding {
    #[default]
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Effect {
    Nation,
    Year,
    Interaction,
}

impl Effect {
    pub const ALL: [Effect; 3] = [Effect::Nation, Effect::Year, Effect::Interaction];
}

impl std::str::FromStr for YearCoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "numeric" => Ok(Self::Numeric),
            "categorical" => Ok(Self::Categorical),
            _ => Err(Error::InvalidConfig(format!(
                "year coding {s:?}, expected numeric or categorical"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManovaResult {
    pub effect: Effect,
    pub wilks_lambda: f64,
    pub f_stat: f64,
    pub df1: f64,
    pub df2: f64,
    pub p_value: f64,
    pub partial_eta_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub feature: String,
    pub effect: Effect,
    pub f_stat: f64,
    pub df1: f64,
    pub df2: f64,
    pub p_raw: f64,
    pub p_bonferroni: f64,
}

/// Hypothesis and error matrices of a fitted two-way model.
#[derive(Debug, Clone)]
pub struct TwoWayFit {
    pub effects: Vec<EffectFit>,
    pub error: Sscp,
    pub error_df: usize,
}

#[derive(Debug, Clone)]
pub struct EffectFit {
    pub effect: Effect,
    pub hypothesis: Sscp,
    pub df: usize,
}

/// Fits the model and returns the SSCP matrices for each effect.
pub fn fit_two_way(
    responses: &[[f64; FEATURE_DIM]],
    nation: &[Nation],
    year: &[i32],
    coding: YearCoding,
) -> Result<TwoWayFit> {
    let n = responses.len();
    if nation.len() != n || year.len() != n {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {n} responses, {} nations, {} years",
            nation.len(),
            year.len()
        )));
    }
    if n < MIN_OBSERVATIONS {
        return Err(Error::InsufficientRows {
            needed: MIN_OBSERVATIONS,
            got: n,
        });
    }
    if Nation::ALL.iter().any(|g| !nation.contains(g)) {
        return Err(Error::InvalidInput("both nations must be present".into()));
    }
    let years: BTreeSet<i32> = year.iter().copied().collect();
    if years.len() < 2 {
        return Err(Error::InvalidInput("need at least two distinct years".into()));
    }

    let intercept = vec![1.0; n];
    let nation_col: Vec<f64> = nation
        .iter()
        .map(|g| if *g == Nation::Germany { 1.0 } else { -1.0 })
        .collect();
    let year_cols: Vec<Vec<f64>> = match coding {
        YearCoding::Numeric => {
            let mean = year.iter().map(|&y| f64::from(y)).sum::<f64>() / n as f64;
            vec![year.iter().map(|&y| f64::from(y) - mean).collect()]
        }
        YearCoding::Categorical => years
            .iter()
            .skip(1)
            .map(|&level| year.iter().map(|&y| f64::from(u8::from(y == level))).collect())
            .collect(),
    };
    let inter_cols: Vec<Vec<f64>> = year_cols
        .iter()
        .map(|yc| yc.iter().zip(&nation_col).map(|(a, b)| a * b).collect())
        .collect();

    let main: Vec<Vec<f64>> = std::iter::once(intercept.clone())
        .chain(std::iter::once(nation_col.clone()))
        .chain(year_cols.iter().cloned())
        .collect();

    // full model; main effects must be identifiable
    let mut full = Basis::new();
    for col in &main {
        if full.push(col).is_none() {
            return Err(Error::SingularDesign(
                "nation and year columns are collinear".into(),
            ));
        }
    }
    for col in &inter_cols {
        if full.push(col).is_none() && coding == YearCoding::Numeric {
            return Err(Error::SingularDesign(
                "interaction column is collinear with main effects".into(),
            ));
        }
    }
    let error = sscp(&full.residuals(responses));
    let error_df = n - full.rank();
    if error_df < FEATURE_DIM || cholesky_logdet(&error).is_none() {
        return Err(Error::RankDeficientE);
    }

    let concat =
        |parts: &[&[Vec<f64>]]| -> Vec<Vec<f64>> { parts.iter().flat_map(|p| p.iter().cloned()).collect() };
    let one = std::slice::from_ref(&intercept);
    let nat = std::slice::from_ref(&nation_col);
    let specs: [(Effect, Vec<Vec<f64>>, &[Vec<f64>]); 3] = match coding {
        YearCoding::Numeric => [
            (Effect::Nation, concat(&[one, &year_cols, &inter_cols]), nat),
            (Effect::Year, concat(&[one, nat, &inter_cols]), &year_cols),
            (Effect::Interaction, concat(&[one, nat, &year_cols]), &inter_cols),
        ],
        YearCoding::Categorical => [
            (Effect::Nation, concat(&[one, &year_cols]), nat),
            (Effect::Year, concat(&[one, nat]), &year_cols),
            (Effect::Interaction, concat(&[one, nat, &year_cols]), &inter_cols),
        ],
    };
    let effects = specs
        .into_iter()
        .map(|(effect, base, term)| {
            let fit = fit_term(&base, term, responses);
            EffectFit {
                effect,
                hypothesis: fit.hypothesis,
                df: fit.df,
            }
        })
        .collect();
    Ok(TwoWayFit {
        effects,
        error,
        error_df,
    })
}

/// Wilks' lambda tests for nation, year and their interaction.
pub fn manova_two_way(
    responses: &[[f64; FEATURE_DIM]],
    nation: &[Nation],
    year: &[i32],
    coding: YearCoding,
) -> Result<Vec<ManovaResult>> {
    let fit = fit_two_way(responses, nation, year, coding)?;
    fit.manova()
}

/// Univariate F tests per feature and effect, Bonferroni-corrected over all
/// tests. Ordered by feature index, then effect.
pub fn anova_posthoc(
    responses: &[[f64; FEATURE_DIM]],
    nation: &[Nation],
    year: &[i32],
    coding: YearCoding,
) -> Result<Vec<AnovaResult>> {
    let fit = fit_two_way(responses, nation, year, coding)?;
    Ok(fit.anova())
}

impl TwoWayFit {
    pub fn manova(&self) -> Result<Vec<ManovaResult>> {
        let log_det_e = cholesky_logdet(&self.error).ok_or(Error::RankDeficientE)?;
        self.effects
            .iter()
            .map(|e| {
                let mut total = self.error;
                for i in 0..FEATURE_DIM {
                    for j in 0..FEATURE_DIM {
                        total[i][j] += e.hypothesis[i][j];
                    }
                }
                let log_det_t = cholesky_logdet(&total).ok_or(Error::RankDeficientE)?;
                let lambda = (log_det_e - log_det_t).exp().min(1.0);
                Ok(wilks_test(e.effect, lambda, FEATURE_DIM, e.df, self.error_df))
            })
            .collect()
    }

    pub fn anova(&self) -> Vec<AnovaResult> {
        let tests = (FEATURE_DIM * self.effects.len()) as f64;
        let v = self.error_df as f64;
        let mut out = Vec::with_capacity(FEATURE_DIM * self.effects.len());
        for (k, name) in FEATURE_NAMES.iter().enumerate() {
            for e in &self.effects {
                let q = e.df as f64;
                let (f_stat, p_raw) = if e.df == 0 {
                    (0.0, 1.0)
                } else {
                    let f = (e.hypothesis[k][k] / q) / (self.error[k][k] / v);
                    (f, f_sf(f, q, v))
                };
                out.push(AnovaResult {
                    feature: name.to_string(),
                    effect: e.effect,
                    f_stat,
                    df1: q,
                    df2: v,
                    p_raw,
                    p_bonferroni: (p_raw * tests).min(1.0),
                });
            }
        }
        out
    }
}

/// Rao's F approximation for Wilks' lambda with `p` responses, `q`
/// hypothesis and `v` error degrees of freedom. Exact when `q` is 1 or 2.
pub fn wilks_test(effect: Effect, lambda: f64, p: usize, q: usize, v: usize) -> ManovaResult {
    if q == 0 {
        return ManovaResult {
            effect,
            wilks_lambda: 1.0,
            f_stat: 0.0,
            df1: 0.0,
            df2: v as f64,
            p_value: 1.0,
            partial_eta_sq: 0.0,
        };
    }
    let (pf, qf, vf) = (p as f64, q as f64, v as f64);
    let t = rao_exponent(p, q);
    let df1 = pf * qf;
    let df2 = (vf + qf - (pf + qf + 1.0) / 2.0) * t - (pf * qf - 2.0) / 2.0;
    let root = lambda.powf(1.0 / t);
    let f_stat = ((1.0 - root) / root * df2 / df1).max(0.0);
    ManovaResult {
        effect,
        wilks_lambda: lambda,
        f_stat,
        df1,
        df2,
        p_value: f_sf(f_stat, df1, df2),
        partial_eta_sq: 1.0 - root,
    }
}

/// Exponent `t` of Rao's transformation; 1 whenever `min(p, q)` is 1.
pub fn rao_exponent(p: usize, q: usize) -> f64 {
    let (pf, qf) = (p as f64, q as f64);
    let denom = pf * pf + qf * qf - 5.0;
    if denom > 0.0 {
        ((pf * pf * qf * qf - 4.0) / denom).sqrt()
    } else {
        1.0
    }
}

/// `ln det(A)` of a symmetric positive-definite matrix, `None` if it is not.
fn cholesky_logdet(a: &Sscp) -> Option<f64> {
    let scale = (0..FEATURE_DIM).map(|i| a[i][i]).fold(0.0, f64::max);
    let mut l = [[0.0; FEATURE_DIM]; FEATURE_DIM];
    let mut log_det = 0.0;
    for i in 0..FEATURE_DIM {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > scale * 1e-13) {
                    return None;
                }
                l[i][i] = s.sqrt();
                log_det += 2.0 * l[i][i].ln();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(log_det)
}

/// Human-readable p-value with a floor of `< 1e-5`.
pub fn format_p(p: f64) -> String {
    if p < 1e-5 {
        "< 1e-5".to_string()
    } else {
        format!("{p:.5}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rao_exponent_values() {
        assert_eq!(rao_exponent(4, 1), 1.0);
        assert_eq!(rao_exponent(4, 2), 2.0);
        assert!((rao_exponent(4, 10) - (1596.0f64 / 111.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn single_df_test_is_exact_f() {
        // q = 1: F = (1 - L) / L * (v - p + 1) / p
        let r = wilks_test(Effect::Nation, 0.8814, 4, 1, 9025);
        assert_eq!(r.df1, 4.0);
        assert_eq!(r.df2, 9022.0);
        let expected = (1.0 - 0.8814) / 0.8814 * 9022.0 / 4.0;
        assert!((r.f_stat - expected).abs() < 1e-9);
        assert!((r.partial_eta_sq - (1.0 - 0.8814)).abs() < 1e-12);
        assert!(r.p_value < 1e-5);
    }

    #[test]
    fn cholesky_rejects_singular() {
        let mut a = [[0.0; 4]; 4];
        a[0][0] = 1.0;
        a[1][1] = 1.0;
        a[2][2] = 1.0;
        assert!(cholesky_logdet(&a).is_none());
        a[3][3] = 4.0;
        assert!((cholesky_logdet(&a).unwrap() - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn p_formatting() {
        assert_eq!(format_p(1e-9), "< 1e-5");
        assert_eq!(format_p(0.09), "0.09000");
    }

    #[test]
    fn collinear_nation_and_year_is_singular() {
        // every G track from 1990, every U track from 1991
        let n = 20;
        let nation: Vec<Nation> = (0..n)
            .map(|i| if i < 10 { Nation::Germany } else { Nation::Usa })
            .collect();
        let year: Vec<i32> = (0..n).map(|i| if i < 10 { 1990 } else { 1991 }).collect();
        let y: Vec<[f64; 4]> = (0..n)
            .map(|i| {
                let t = i as f64;
                [t.sin(), t.cos(), (2.0 * t).sin(), (3.0 * t).cos()]
            })
            .collect();
        for coding in [YearCoding::Numeric, YearCoding::Categorical] {
            let err = manova_two_way(&y, &nation, &year, coding).unwrap_err();
            assert!(matches!(err, Error::SingularDesign(_)), "{err:?}");
        }
    }

    #[test]
    fn collinear_responses_are_rank_deficient() {
        let n = 30;
        let nation: Vec<Nation> = (0..n)
            .map(|i| if i % 2 == 0 { Nation::Germany } else { Nation::Usa })
            .collect();
        let year: Vec<i32> = (0..n).map(|i| 1990 + (i % 3)).collect();
        let y: Vec<[f64; 4]> = (0..n)
            .map(|i| {
                let t = i as f64;
                [t.sin(), t.cos(), t.sin() + t.cos(), (3.0 * t).cos()]
            })
            .collect();
        assert!(matches!(
            manova_two_way(&y, &nation, &year, YearCoding::Numeric),
            Err(Error::RankDeficientE)
        ));
    }

    #[test]
    fn preconditions() {
        let y = vec![[0.0; 4]; 5];
        let nation = vec![Nation::Germany; 5];
        let year = vec![1990; 5];
        assert!(manova_two_way(&y, &nation, &year, YearCoding::Numeric).is_err());
    }
}
