use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Placement;
use crate::corpus::Nation;
use crate::error::{Error, Result, Warning};
use crate::numeric::population_variance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationVariance {
    pub year: i32,
    pub count: usize,
    pub variance_x: f64,
    pub variance_y: f64,
}

/// Year-ordered placement variance for one nation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceSeries {
    pub nation: Nation,
    pub points: Vec<LocationVariance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearDistances {
    pub year: i32,
    pub count_germany: usize,
    pub count_usa: usize,
    pub within_germany: Option<f64>,
    pub within_usa: Option<f64>,
    pub between: Option<f64>,
}

fn check_lengths(placements: &[Placement], labels: &[(Nation, i32)]) -> Result<()> {
    if placements.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} placements but {} labels",
            placements.len(),
            labels.len()
        )));
    }
    Ok(())
}

fn coords(p: &Placement) -> (f64, f64) {
    (p.unit_x as f64, p.unit_y as f64)
}

/// Population variance of the unit coordinates per (nation, year) cell.
/// Cells with fewer than two tracks are left out with a `SmallGroup`
/// warning.
pub fn group_location_variance(
    placements: &[Placement],
    labels: &[(Nation, i32)],
) -> Result<(Vec<VarianceSeries>, Vec<Warning>)> {
    check_lengths(placements, labels)?;
    let mut cells: BTreeMap<(Nation, i32), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (p, &key) in placements.iter().zip(labels) {
        let (x, y) = coords(p);
        let cell = cells.entry(key).or_default();
        cell.0.push(x);
        cell.1.push(y);
    }
    let mut warnings = Vec::new();
    let mut series: Vec<VarianceSeries> = Nation::ALL
        .iter()
        .map(|&nation| VarianceSeries {
            nation,
            points: Vec::new(),
        })
        .collect();
    for ((nation, year), (xs, ys)) in cells {
        if xs.len() < 2 {
            warnings.push(Warning::new(
                "SmallGroup",
                format!("{nation} {year}: {} track(s), variance omitted", xs.len()),
            ));
            continue;
        }
        let slot = Nation::ALL.iter().position(|&g| g == nation).unwrap_or(0);
        series[slot].points.push(LocationVariance {
            year,
            count: xs.len(),
            variance_x: population_variance(&xs),
            variance_y: population_variance(&ys),
        });
    }
    Ok((series, warnings))
}

fn mean_within(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            sum += (a.0 - b.0).hypot(a.1 - b.1);
            pairs += 1;
        }
    }
    Some(sum / pairs as f64)
}

fn mean_between(a: &[(f64, f64)], b: &[(f64, f64)]) -> Option<f64> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let sum: f64 = a
        .iter()
        .map(|p| b.iter().map(|q| (p.0 - q.0).hypot(p.1 - q.1)).sum::<f64>())
        .sum();
    Some(sum / (a.len() * b.len()) as f64)
}

/// Mean pairwise Euclidean grid distance per year, over all pairs: within
/// each nation and between the two. Undefined means are `None`.
pub fn group_distances(placements: &[Placement], labels: &[(Nation, i32)]) -> Result<Vec<YearDistances>> {
    check_lengths(placements, labels)?;
    let mut years: BTreeMap<i32, [Vec<(f64, f64)>; 2]> = BTreeMap::new();
    for (p, &(nation, year)) in placements.iter().zip(labels) {
        let slot = usize::from(nation == Nation::Usa);
        years.entry(year).or_default()[slot].push(coords(p));
    }
    Ok(years
        .into_iter()
        .map(|(year, [g, u])| YearDistances {
            year,
            count_germany: g.len(),
            count_usa: u.len(),
            within_germany: mean_within(&g),
            within_usa: mean_within(&u),
            between: mean_between(&g, &u),
        })
        .collect())
}
