//! Corpus data model: track records, feature tables on disk, and corpus-wide
//! z-normalization.
//!
//! Raw feature values are quantized to nine significant digits when they
//! enter the corpus, so writing a corpus and reading it back reproduces the
//! feature matrix bit for bit.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result, Warning};

/// Number of features per track.
pub const FEATURE_DIM: usize = 4;

/// Feature column names in canonical order.
pub const FEATURE_NAMES: [&str; FEATURE_DIM] = ["bpm", "phase_space", "channel_correlation", "crest_factor"];

/// Header of the canonical corpus table.
pub const CORPUS_COLUMNS: [&str; 11] = [
    "track_id",
    "title",
    "artist",
    "label",
    "nation",
    "year",
    "style",
    "bpm",
    "phase_space",
    "channel_correlation",
    "crest_factor",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Nation {
    #[serde(rename = "G")]
    Germany,
    #[serde(rename = "U")]
    Usa,
}

impl Nation {
    pub const ALL: [Nation; 2] = [Nation::Germany, Nation::Usa];

    pub fn code(self) -> &'static str {
        match self {
            Nation::Germany => "G",
            Nation::Usa => "U",
        }
    }
}

impl fmt::Display for Nation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Nation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "G" => Ok(Nation::Germany),
            "U" => Ok(Nation::Usa),
            other => Err(format!("nation must be `G` or `U`, got `{other}`")),
        }
    }
}

/// Per-track median features, in raw (unnormalized) units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub bpm: f64,
    pub phase_space: f64,
    pub channel_correlation: f64,
    pub crest_factor: f64,
}

impl FeatureVector {
    pub fn to_array(self) -> [f64; FEATURE_DIM] {
        [
            self.bpm,
            self.phase_space,
            self.channel_correlation,
            self.crest_factor,
        ]
    }

    pub fn from_array(v: [f64; FEATURE_DIM]) -> Self {
        Self {
            bpm: v[0],
            phase_space: v[1],
            channel_correlation: v[2],
            crest_factor: v[3],
        }
    }

    /// Checks the value ranges, returning a description of the first violation.
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in FEATURE_NAMES.iter().zip(self.to_array()) {
            if !v.is_finite() {
                return Err(format!("{name} is not finite"));
            }
        }
        if self.bpm <= 0.0 {
            return Err(format!("bpm must be positive, got {}", self.bpm));
        }
        if !(0.0..=1.0).contains(&self.phase_space) {
            return Err(format!("phase_space outside [0,1]: {}", self.phase_space));
        }
        if !(-1.0..=1.0).contains(&self.channel_correlation) {
            return Err(format!(
                "channel_correlation outside [-1,1]: {}",
                self.channel_correlation
            ));
        }
        if self.crest_factor < 1.0 {
            return Err(format!("crest_factor below 1: {}", self.crest_factor));
        }
        Ok(())
    }

    fn canonicalized(self) -> Self {
        Self::from_array(self.to_array().map(canonical))
    }
}

/// One row of the corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRecord {
    pub track_id: String,
    pub title: String,
    pub artist: String,
    pub label: String,
    pub nation: Nation,
    pub year: i32,
    /// `None` when the style column is empty.
    pub style: Option<String>,
    pub features: FeatureVector,
}

/// Rounds to nine significant digits, the precision of the on-disk format.
pub fn canonical(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

/// Formats a value as a plain decimal with at most nine significant digits.
pub fn format_canonical(x: f64) -> String {
    format!("{}", canonical(x))
}

/// Result of z-normalizing a feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub z: Vec<[f64; FEATURE_DIM]>,
    pub means: [f64; FEATURE_DIM],
    pub stds: [f64; FEATURE_DIM],
}

/// Column-wise z-scores using the population standard deviation.
pub fn normalize(raw: &[[f64; FEATURE_DIM]]) -> Result<Normalization> {
    let n = raw.len();
    if n < 2 {
        return Err(Error::InsufficientRows { needed: 2, got: n });
    }
    let mut means = [0.0; FEATURE_DIM];
    let mut stds = [0.0; FEATURE_DIM];
    for k in 0..FEATURE_DIM {
        let mean = raw.iter().map(|r| r[k]).sum::<f64>() / n as f64;
        let var = raw.iter().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        // relative guard: a column whose spread is at rounding level is constant
        if !(std > 0.0) || std <= mean.abs() * 1e-14 {
            return Err(Error::DegenerateColumn(FEATURE_NAMES[k].to_string()));
        }
        means[k] = mean;
        stds[k] = std;
    }
    let z = raw
        .iter()
        .map(|r| std::array::from_fn(|k| (r[k] - means[k]) / stds[k]))
        .collect();
    Ok(Normalization { z, means, stds })
}

/// Corpus with its z-scored feature matrix. Immutable once built.
#[derive(Debug, Clone)]
pub struct NormalizedCorpus {
    records: Vec<TrackRecord>,
    feature_matrix: Vec<[f64; FEATURE_DIM]>,
    means: [f64; FEATURE_DIM],
    stds: [f64; FEATURE_DIM],
}

impl NormalizedCorpus {
    /// Builds a corpus from accepted records. Fails on duplicate ids,
    /// invalid features, or fewer than two rows.
    pub fn from_records(records: Vec<TrackRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut seen = HashSet::new();
        for r in &records {
            if !seen.insert(r.track_id.as_str()) {
                return Err(Error::DuplicateTrackId(r.track_id.clone()));
            }
            r.features
                .validate()
                .map_err(|e| Error::InvalidInput(format!("track {}: {e}", r.track_id)))?;
        }
        let raw: Vec<_> = records.iter().map(|r| r.features.to_array()).collect();
        let Normalization { z, means, stds } = normalize(&raw)?;
        Ok(Self {
            records,
            feature_matrix: z,
            means,
            stds,
        })
    }

    pub fn records(&self) -> &[TrackRecord] {
        &self.records
    }

    pub fn feature_matrix(&self) -> &[[f64; FEATURE_DIM]] {
        &self.feature_matrix
    }

    pub fn means(&self) -> [f64; FEATURE_DIM] {
        self.means
    }

    pub fn stds(&self) -> [f64; FEATURE_DIM] {
        self.stds
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Maps a z-scored row back to raw units.
    pub fn denormalize(&self, z: &[f64; FEATURE_DIM]) -> [f64; FEATURE_DIM] {
        std::array::from_fn(|k| z[k] * self.stds[k] + self.means[k])
    }

    /// Track counts per (nation, year) cell.
    pub fn cell_counts(&self) -> BTreeMap<(Nation, i32), usize> {
        let mut counts = BTreeMap::new();
        for r in &self.records {
            *counts.entry((r.nation, r.year)).or_insert(0) += 1;
        }
        counts
    }

    pub fn sidecar(&self) -> NormSidecar {
        NormSidecar {
            features: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            means: self.means,
            stds: self.stds,
            std_convention: "population".to_string(),
        }
    }
}

/// Normalization parameters persisted next to a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormSidecar {
    pub features: Vec<String>,
    pub means: [f64; FEATURE_DIM],
    pub stds: [f64; FEATURE_DIM],
    pub std_convention: String,
}

/// Path of the normalization sidecar for a corpus file placed in `dir`:
/// `<dir>/<corpus stem>.norm.json`.
pub fn sidecar_path(corpus_path: &Path, dir: &Path) -> PathBuf {
    let stem = corpus_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".to_string());
    dir.join(format!("{stem}.norm.json"))
}

pub fn write_sidecar(path: &Path, corpus: &NormalizedCorpus) -> Result<()> {
    write_json_pretty(path, &corpus.sidecar())
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json_pretty<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

impl TableFormat {
    /// Guesses the format from the file extension; defaults to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => TableFormat::Json,
            _ => TableFormat::Csv,
        }
    }
}

/// A row that was skipped during ingestion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedRow {
    /// 1-based data row number (header excluded).
    pub row: usize,
    pub reason: String,
}

impl RejectedRow {
    pub fn warning(&self) -> Warning {
        Warning::new("UnparsableRow", format!("row {}: {}", self.row, self.reason))
    }
}

/// Result of ingesting a feature table.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub corpus: NormalizedCorpus,
    pub rejected: Vec<RejectedRow>,
}

/// Reads a corpus table and z-normalizes it. Unparsable rows are skipped and
/// reported; schema mismatches, duplicate ids and empty results are fatal.
pub fn ingest_feature_table(path: &Path, format: TableFormat) -> Result<Ingested> {
    let (records, rejected) = read_feature_table(path, format)?;
    let corpus = NormalizedCorpus::from_records(records)?;
    Ok(Ingested { corpus, rejected })
}

/// Reads and validates rows without normalizing.
pub fn read_feature_table(path: &Path, format: TableFormat) -> Result<(Vec<TrackRecord>, Vec<RejectedRow>)> {
    let rows = match format {
        TableFormat::Csv => read_csv_rows(path)?,
        TableFormat::Json => read_json_rows(path)?,
    };
    let mut records = Vec::with_capacity(rows.len());
    let mut rejected = Vec::new();
    let mut ids = HashSet::new();
    for (i, row) in rows.into_iter().enumerate() {
        let row_no = i + 1;
        match row.and_then(|fields| parse_record(&fields)) {
            Ok(rec) => {
                if !ids.insert(rec.track_id.clone()) {
                    return Err(Error::DuplicateTrackId(rec.track_id));
                }
                records.push(rec);
            }
            Err(reason) => rejected.push(RejectedRow { row: row_no, reason }),
        }
    }
    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok((records, rejected))
}

type RawRow = std::result::Result<[String; 11], String>;

fn read_csv_rows(path: &Path) -> Result<Vec<RawRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(BufReader::new(file));
    let headers = reader.headers()?.clone();
    let index = column_index(headers.iter().map(str::trim))?;
    let mut rows = Vec::new();
    for result in reader.records() {
        let row = match result {
            Ok(rec) => index
                .iter()
                .map(|&i| {
                    rec.get(i)
                        .map(|s| s.trim().to_string())
                        .ok_or_else(|| format!("row has {} fields", rec.len()))
                })
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(|v| v.try_into().expect("11 columns")),
            Err(e) => Err(e.to_string()),
        };
        rows.push(row);
    }
    Ok(rows)
}

fn column_index<'a>(headers: impl Iterator<Item = &'a str>) -> Result<[usize; 11]> {
    let headers: Vec<&str> = headers.collect();
    let mut index = [0; 11];
    for (slot, name) in index.iter_mut().zip(CORPUS_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }
    Ok(index)
}

fn read_json_rows(path: &Path) -> Result<Vec<RawRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_reader(BufReader::new(file))?;
    let items = value
        .as_array()
        .ok_or_else(|| Error::InvalidInput("JSON corpus must be an array of objects".into()))?;
    if let Some(first) = items.first().and_then(|v| v.as_object()) {
        for name in CORPUS_COLUMNS {
            if !first.contains_key(name) {
                return Err(Error::MissingColumn(name.to_string()));
            }
        }
    }
    Ok(items
        .iter()
        .map(|item| {
            let obj = item.as_object().ok_or("row is not an object")?;
            let mut out: [String; 11] = Default::default();
            for (slot, name) in out.iter_mut().zip(CORPUS_COLUMNS) {
                *slot = match obj.get(name) {
                    Some(serde_json::Value::String(s)) => s.trim().to_string(),
                    Some(serde_json::Value::Null) => String::new(),
                    Some(v) => v.to_string(),
                    None => return Err(format!("missing field `{name}`")),
                };
            }
            Ok(out)
        })
        .collect())
}

fn parse_record(f: &[String; 11]) -> std::result::Result<TrackRecord, String> {
    if f[0].is_empty() {
        return Err("empty track_id".into());
    }
    let nation: Nation = f[4].parse()?;
    let year: i32 = f[5]
        .parse()
        .map_err(|_| format!("year `{}` is not an integer", f[5]))?;
    let mut values = [0.0; FEATURE_DIM];
    for (k, v) in values.iter_mut().enumerate() {
        let text = &f[7 + k];
        *v = text
            .parse::<f64>()
            .map_err(|_| format!("{} `{text}` is not a number", FEATURE_NAMES[k]))?;
    }
    let features = FeatureVector::from_array(values).canonicalized();
    features.validate()?;
    Ok(TrackRecord {
        track_id: f[0].clone(),
        title: f[1].clone(),
        artist: f[2].clone(),
        label: f[3].clone(),
        nation,
        year,
        style: (!f[6].is_empty()).then(|| f[6].clone()),
        features,
    })
}

/// Writes records as canonical CSV.
pub fn write_csv<W: Write>(out: W, records: &[TrackRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CORPUS_COLUMNS)?;
    for r in records {
        let year = r.year.to_string();
        let feats = r.features.to_array().map(format_canonical);
        w.write_record([
            r.track_id.as_str(),
            &r.title,
            &r.artist,
            &r.label,
            r.nation.code(),
            &year,
            r.style.as_deref().unwrap_or(""),
            &feats[0],
            &feats[1],
            &feats[2],
            &feats[3],
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

pub fn write_csv_file(path: &Path, records: &[TrackRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(BufWriter::new(file), records)
}

/// Writes records as a JSON array with the same field names as the CSV.
pub fn write_json_file(path: &Path, records: &[TrackRecord]) -> Result<()> {
    let rows: Vec<serde_json::Value> = records
        .iter()
        .map(|r| {
            let mut obj = serde_json::Map::new();
            obj.insert("track_id".into(), r.track_id.clone().into());
            obj.insert("title".into(), r.title.clone().into());
            obj.insert("artist".into(), r.artist.clone().into());
            obj.insert("label".into(), r.label.clone().into());
            obj.insert("nation".into(), r.nation.code().into());
            obj.insert("year".into(), r.year.into());
            obj.insert("style".into(), r.style.clone().unwrap_or_default().into());
            for (name, v) in FEATURE_NAMES.iter().zip(r.features.to_array()) {
                obj.insert((*name).into(), canonical(v).into());
            }
            serde_json::Value::Object(obj)
        })
        .collect();
    write_json_pretty(path, &rows)
}

/// Pairwise Pearson correlations of the feature columns with Bonferroni
/// corrected two-sided significance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub r: [[f64; FEATURE_DIM]; FEATURE_DIM],
    pub p_bonferroni: [[f64; FEATURE_DIM]; FEATURE_DIM],
    pub significant: [[bool; FEATURE_DIM]; FEATURE_DIM],
    pub alpha: f64,
}

pub const CORRELATION_ALPHA: f64 = 0.05;

pub fn feature_correlations(corpus: &NormalizedCorpus) -> Result<CorrelationReport> {
    correlation_report(corpus.feature_matrix())
}

pub fn correlation_report(rows: &[[f64; FEATURE_DIM]]) -> Result<CorrelationReport> {
    let n = rows.len();
    if n < 3 {
        return Err(Error::InsufficientRows { needed: 3, got: n });
    }
    let pairs = (FEATURE_DIM * (FEATURE_DIM - 1) / 2) as f64;
    let mut r = [[0.0; FEATURE_DIM]; FEATURE_DIM];
    let mut p = [[0.0; FEATURE_DIM]; FEATURE_DIM];
    let mut sig = [[false; FEATURE_DIM]; FEATURE_DIM];
    for i in 0..FEATURE_DIM {
        r[i][i] = 1.0;
        for j in i + 1..FEATURE_DIM {
            let a: Vec<f64> = rows.iter().map(|x| x[i]).collect();
            let b: Vec<f64> = rows.iter().map(|x| x[j]).collect();
            let rij = pearson(&a, &b).unwrap_or(0.0);
            let pij = (pearson_p_value(rij, n) * pairs).min(1.0);
            r[i][j] = rij;
            r[j][i] = rij;
            p[i][j] = pij;
            p[j][i] = pij;
            sig[i][j] = pij < CORRELATION_ALPHA;
            sig[j][i] = sig[i][j];
        }
    }
    Ok(CorrelationReport {
        r,
        p_bonferroni: p,
        significant: sig,
        alpha: CORRELATION_ALPHA,
    })
}

/// Pearson correlation, `None` if either input has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Two-sided p-value of the t-test on a Pearson r with `n` observations.
fn pearson_p_value(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    let r2 = r * r;
    if r2 >= 1.0 {
        return 0.0;
    }
    let t2 = r2 * df / (1.0 - r2);
    // P(|T| > t) = I_{df/(df+t^2)}(df/2, 1/2)
    beta_reg(df / 2.0, 0.5, df / (df + t2))
}
