use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use studiomap::corpus::{ingest_feature_table, sidecar_path, write_csv_file, write_sidecar, TableFormat};
use studiomap::features::extract_corpus;
use studiomap::forest::{confusion_csv, style_report};
use studiomap::report::{write_json, MapBundle, SavedMap, StatsSummary};
use studiomap::som::{
    bmu, component_planes, group_distances, group_location_variance, place_tracks, size_warning, train_som,
    u_matrix, VarianceSeries, YearDistances,
};
use studiomap::stats::{analyze_corpus, corpus_boxplots, format_p, manova::MIN_OBSERVATIONS};
use studiomap::{
    AnovaResult, Error, EvalReport, ForestConfig, ManovaResult, Nation, NormalizedCorpus, Placement, Result,
    Warning, YearCoding, FEATURE_NAMES, SCHEMA_VERSION,
};

use crate::args::{AnalyzeArgs, BundleArgs, ClassifyArgs, ExtractArgs, SomArgs};
use crate::render::write_heatmap;
use crate::settings::Settings;

pub fn warn(w: &Warning) {
    eprintln!("{w}");
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn load_corpus(path: &Path) -> Result<NormalizedCorpus> {
    let ingested = ingest_feature_table(path, TableFormat::from_path(path))?;
    ingested.rejected.iter().for_each(|r| warn(&r.warning()));
    Ok(ingested.corpus)
}

fn write_norm_sidecar(corpus_path: &Path, dir: &Path, corpus: &NormalizedCorpus) -> Result<PathBuf> {
    let path = sidecar_path(corpus_path, dir);
    write_sidecar(&path, corpus)?;
    Ok(path)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn extract(a: &ExtractArgs, settings: &Settings, seed: u64) -> Result<()> {
    let cfg = settings.extraction(a, seed)?;
    let ex = extract_corpus(&a.audio_dir, &a.metadata, &cfg)?;
    ex.warnings.iter().for_each(warn);
    ex.failures.iter().for_each(|f| warn(&f.warning()));
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_csv_file(&a.out, &ex.records)?;
    let n = ex.records.len();
    let dir = a.out.parent().unwrap_or(Path::new("."));
    match NormalizedCorpus::from_records(ex.records) {
        Ok(corpus) => {
            write_norm_sidecar(&a.out, dir, &corpus)?;
        }
        Err(e) => warn(&Warning::new("NoSidecar", format!("normalization skipped: {e}"))),
    }
    println!("extracted {n} track(s) to {}", a.out.display());
    Ok(())
}

#[derive(Serialize)]
struct ManovaReport<'a> {
    year_coding: YearCoding,
    observations: usize,
    effects: &'a [ManovaResult],
}

#[derive(Serialize)]
struct AnovaReport<'a> {
    year_coding: YearCoding,
    observations: usize,
    corrected_tests: usize,
    tests: &'a [AnovaResult],
}

#[derive(Serialize)]
struct BoxplotReport<T: Serialize> {
    groups: Vec<T>,
}

pub fn analyze(a: &AnalyzeArgs, settings: &Settings) -> Result<()> {
    let coding = settings.year_coding(a.year_coding)?;
    let corpus = load_corpus(&a.corpus)?;
    create_dir(&a.out_dir)?;
    write_norm_sidecar(&a.corpus, &a.out_dir, &corpus)?;
    let (groups, warnings) = corpus_boxplots(&corpus);
    warnings.iter().for_each(warn);
    write_json(&a.out_dir.join("boxplots.json"), &BoxplotReport { groups })?;

    let (manova, anova) = if corpus.len() < MIN_OBSERVATIONS {
        warn(&Warning::new(
            "SmallSample",
            format!(
                "{} tracks; MANOVA needs at least {MIN_OBSERVATIONS}, tests skipped",
                corpus.len()
            ),
        ));
        (Vec::new(), Vec::new())
    } else {
        analyze_corpus(&corpus, coding)?
    };
    let n = corpus.len();
    write_json(
        &a.out_dir.join("manova.json"),
        &ManovaReport {
            year_coding: coding,
            observations: n,
            effects: &manova,
        },
    )?;
    write_json(
        &a.out_dir.join("anova.json"),
        &AnovaReport {
            year_coding: coding,
            observations: n,
            corrected_tests: anova.len(),
            tests: &anova,
        },
    )?;
    for r in &manova {
        let p = format_p(r.p_value);
        let p = if p.starts_with('<') {
            format!("p {p}")
        } else {
            format!("p = {p}")
        };
        println!(
            "{:<11} lambda={:.4} F({}, {:.1})={:.2} {p} eta2={:.3}",
            format!("{:?}", r.effect).to_lowercase(),
            r.wilks_lambda,
            r.df1,
            r.df2,
            r.f_stat,
            r.partial_eta_sq
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct VarianceReport {
    series: Vec<VarianceSeries>,
}

#[derive(Serialize)]
struct DistanceReport {
    years: Vec<YearDistances>,
}

fn labels(corpus: &NormalizedCorpus) -> Vec<(Nation, i32)> {
    corpus.records().iter().map(|r| (r.nation, r.year)).collect()
}

pub fn som(a: &SomArgs, settings: &Settings, seed: u64) -> Result<()> {
    let cfg = settings.som(a, seed)?;
    let corpus = load_corpus(&a.corpus)?;
    if let Some(w) = size_warning(corpus.len(), &cfg) {
        warn(&w);
    }
    create_dir(&a.out_dir)?;
    let grid = train_som(corpus.feature_matrix(), &cfg)?;
    let placements = place_tracks(&grid, &corpus);
    let labels = labels(&corpus);
    let (series, warnings) = group_location_variance(&placements, &labels)?;
    warnings.iter().for_each(warn);
    let years = group_distances(&placements, &labels)?;

    let sidecar = write_norm_sidecar(&a.corpus, &a.out_dir, &corpus)?;
    let saved = SavedMap {
        schema_version: SCHEMA_VERSION,
        grid: grid.clone(),
        normalization_file: file_name(&sidecar),
        normalization: corpus.sidecar(),
    };
    write_json(&a.out_dir.join("som.json"), &saved)?;
    let bundle = MapBundle::build(&grid, &corpus, &placements, None)?;
    write_json(&a.out_dir.join("map_bundle.json"), &bundle)?;
    write_json(&a.out_dir.join("variance.json"), &VarianceReport { series })?;
    write_json(&a.out_dir.join("distances.json"), &DistanceReport { years })?;
    if a.images {
        write_heatmap(&a.out_dir.join("u_matrix.ppm"), &u_matrix(&grid))?;
        for (name, plane) in FEATURE_NAMES.iter().zip(component_planes(&grid)) {
            write_heatmap(&a.out_dir.join(format!("plane_{name}.ppm")), &plane)?;
        }
    }
    let qe = grid.epoch_errors.last().copied().unwrap_or(f64::NAN);
    println!(
        "trained {}x{} map on {} tracks, final quantization error {qe:.4}",
        cfg.width,
        cfg.height,
        corpus.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct MetricsReport<'a> {
    nation: Nation,
    config: &'a ForestConfig,
    #[serde(flatten)]
    report: &'a EvalReport,
}

pub fn classify(a: &ClassifyArgs, settings: &Settings, seed: u64) -> Result<()> {
    let cfg = settings.forest(a, seed)?;
    let corpus = load_corpus(&a.corpus)?;
    let (report, warnings) = style_report(&corpus, a.nation, &cfg)?;
    warnings.iter().for_each(warn);
    create_dir(&a.out_dir)?;
    let code = a.nation.code();
    let csv_path = a.out_dir.join(format!("confusion_{code}.csv"));
    fs::write(&csv_path, confusion_csv(&report)?).map_err(|e| Error::io(&csv_path, e))?;
    write_json(
        &a.out_dir.join(format!("metrics_{code}.json")),
        &MetricsReport {
            nation: a.nation,
            config: &cfg,
            report: &report,
        },
    )?;
    println!(
        "{code}: accuracy {:.3} ± {:.3}, f1 {:.3} ± {:.3} over {} folds",
        report.accuracy.mean, report.accuracy.std, report.f1.mean, report.f1.std, report.folds
    );
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

fn optional_json(dir: &Path, name: &str) -> Result<Option<serde_json::Value>> {
    let path = dir.join(name);
    if path.exists() {
        read_json(&path).map(Some)
    } else {
        warn(&Warning::new(
            "MissingAttachment",
            format!("{} not found", path.display()),
        ));
        Ok(None)
    }
}

pub fn bundle(a: &BundleArgs) -> Result<()> {
    let saved: SavedMap = read_json(&a.som)?;
    if saved.schema_version != SCHEMA_VERSION {
        return Err(Error::InvalidInput(format!(
            "som.json schema_version {} not supported",
            saved.schema_version
        )));
    }
    let corpus = load_corpus(&a.corpus)?;
    let norm = &saved.normalization;
    if corpus.means() != norm.means || corpus.stds() != norm.stds {
        warn(&Warning::new(
            "NormalizationMismatch",
            format!(
                "corpus statistics differ from {}; using the map's",
                saved.normalization_file
            ),
        ));
    }
    // place with the normalization the map was trained against
    let placements: Vec<Placement> = corpus
        .records()
        .iter()
        .map(|r| {
            let raw = r.features.to_array();
            let z = std::array::from_fn(|k| (raw[k] - norm.means[k]) / norm.stds[k]);
            let (unit_x, unit_y, quantization_error) = bmu(&saved.grid, &z);
            Placement {
                track_id: r.track_id.clone(),
                unit_x,
                unit_y,
                quantization_error,
            }
        })
        .collect();
    let stats = match &a.stats_dir {
        Some(dir) => Some(StatsSummary {
            manova: optional_json(dir, "manova.json")?,
            anova: optional_json(dir, "anova.json")?,
            boxplots: optional_json(dir, "boxplots.json")?,
        }),
        None => None,
    };
    let bundle = MapBundle::build(&saved.grid, &corpus, &placements, stats)?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_json(&a.out, &bundle)?;
    println!("bundled {} tracks into {}", bundle.tracks.len(), a.out.display());
    Ok(())
}
