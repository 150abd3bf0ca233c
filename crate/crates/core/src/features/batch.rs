//! Batch extraction of a corpus table from a directory of audio files.

use std::collections::HashSet;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use rayon::prelude::*;

use super::{decode_audio, track_features_with_bpm, ExtractionConfig};
use crate::corpus::{canonical, FeatureVector, Nation, TrackRecord};
use crate::error::{Error, Result, Warning};

pub const METADATA_COLUMNS: [&str; 8] = [
    "filename", "track_id", "title", "artist", "label", "nation", "year", "style",
];

/// One row of the metadata sidecar. An optional `bpm` column overrides tempo
/// estimation for that file.
#[derive(Debug, Clone, PartialEq)]
pub struct MetadataRow {
    pub filename: String,
    pub track_id: String,
    pub title: String,
    pub artist: String,
    pub label: String,
    pub nation: Nation,
    pub year: i32,
    pub style: Option<String>,
    pub bpm: Option<f64>,
}

#[derive(Debug)]
pub struct FileFailure {
    pub filename: String,
    pub error: Error,
}

impl FileFailure {
    pub fn warning(&self) -> Warning {
        Warning::new(
            "ExtractionFailed",
            format!("{}: {}: {}", self.filename, self.error.class(), self.error),
        )
    }
}

#[derive(Debug)]
pub struct Extraction {
    /// Successfully processed tracks, sorted by track id.
    pub records: Vec<TrackRecord>,
    pub failures: Vec<FileFailure>,
    pub warnings: Vec<Warning>,
}

/// Reads the metadata sidecar. Rows that fail to parse become warnings.
pub fn read_metadata(path: &Path) -> Result<(Vec<MetadataRow>, Vec<Warning>)> {
    let file = File::open(path).map_err(|e| Error::MissingMetadata(format!("{}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(BufReader::new(file));
    let headers = reader
        .headers()
        .map_err(|e| Error::MissingMetadata(format!("{}: {e}", path.display())))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let mut index = [0usize; 8];
    for (slot, name) in index.iter_mut().zip(METADATA_COLUMNS) {
        *slot = col(name).ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }
    let bpm_col = col("bpm");

    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let parsed = rec.map_err(|e| e.to_string()).and_then(|rec| {
            let get = |k: usize| rec.get(index[k]).map(str::trim).unwrap_or("").to_string();
            let nation: Nation = get(5).parse()?;
            let year: i32 = get(6).parse().map_err(|_| format!("bad year `{}`", get(6)))?;
            let bpm = match bpm_col.and_then(|c| rec.get(c)).map(str::trim) {
                None | Some("") => None,
                Some(s) => Some(
                    s.parse::<f64>()
                        .ok()
                        .filter(|b| *b > 0.0 && b.is_finite())
                        .ok_or_else(|| format!("bad bpm `{s}`"))?,
                ),
            };
            if get(0).is_empty() || get(1).is_empty() {
                return Err("empty filename or track_id".to_string());
            }
            let style = get(7);
            Ok(MetadataRow {
                filename: get(0),
                track_id: get(1),
                title: get(2),
                artist: get(3),
                label: get(4),
                nation,
                year,
                style: (!style.is_empty()).then_some(style),
                bpm,
            })
        });
        match parsed {
            Ok(row) => rows.push(row),
            Err(e) => warnings.push(Warning::new(
                "UnparsableRow",
                format!("metadata row {}: {e}", i + 1),
            )),
        }
    }
    Ok((rows, warnings))
}

/// Extracts features for every file listed in the metadata. Per-file failures
/// are collected and do not stop the run; zero successful files is an
/// [`Error::EmptyCorpus`].
pub fn extract_corpus(audio_dir: &Path, metadata: &Path, config: &ExtractionConfig) -> Result<Extraction> {
    config.validate()?;
    let (rows, mut warnings) = read_metadata(metadata)?;
    let mut ids = HashSet::new();
    for r in &rows {
        if !ids.insert(r.track_id.as_str()) {
            return Err(Error::DuplicateTrackId(r.track_id.clone()));
        }
    }

    let results: Vec<(usize, Result<(TrackRecord, Vec<Warning>)>)> = rows
        .par_iter()
        .enumerate()
        .map(|(i, row)| (i, process_file(&audio_dir.join(&row.filename), row, config)))
        .collect();

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (i, res) in results {
        match res {
            Ok((rec, w)) => {
                records.push(rec);
                warnings.extend(w);
            }
            Err(error) => failures.push(FileFailure {
                filename: rows[i].filename.clone(),
                error,
            }),
        }
    }
    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    records.sort_by(|a, b| a.track_id.cmp(&b.track_id));
    Ok(Extraction {
        records,
        failures,
        warnings,
    })
}

fn process_file(
    path: &Path,
    row: &MetadataRow,
    config: &ExtractionConfig,
) -> Result<(TrackRecord, Vec<Warning>)> {
    let decoded = decode_audio(path)?;
    let features = track_features_with_bpm(&decoded.signal, config, row.bpm)?;
    let features = FeatureVector::from_array(features.to_array().map(canonical));
    features
        .validate()
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    Ok((
        TrackRecord {
            track_id: row.track_id.clone(),
            title: row.title.clone(),
            artist: row.artist.clone(),
            label: row.label.clone(),
            nation: row.nation,
            year: row.year,
            style: row.style.clone(),
            features,
        },
        decoded.warnings,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_metadata_is_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let err = extract_corpus(
            dir.path(),
            &dir.path().join("nope.csv"),
            &ExtractionConfig::default(),
        )
        .unwrap_err();
        assert_eq!(err.class(), "MissingMetadata");
    }

    #[test]
    fn metadata_with_bpm_override() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("meta.csv");
        std::fs::write(
            &p,
            "filename,track_id,title,artist,label,nation,year,style,bpm\n\
             a.wav,t1,Title,Artist,Lbl,G,1991,techno,135\n\
             b.wav,t2,Title,Artist,Lbl,X,1991,techno,\n\
             c.wav,t3,Title,Artist,,U,1988,,\n",
        )
        .unwrap();
        let (rows, warnings) = read_metadata(&p).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].bpm, Some(135.0));
        assert_eq!(rows[1].bpm, None);
        assert_eq!(rows[1].style, None);
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn empty_metadata_is_empty_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("meta.csv");
        std::fs::write(&p, "filename,track_id,title,artist,label,nation,year,style\n").unwrap();
        let err = extract_corpus(dir.path(), &p, &ExtractionConfig::default()).unwrap_err();
        assert!(matches!(err, Error::EmptyCorpus));
    }
}
