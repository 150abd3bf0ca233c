use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use studiomap::forest::CvMode;
use studiomap::som::InitMode;
use studiomap::{Nation, YearCoding};

#[derive(Debug, Parser)]
#[command(
    name = "studiomap",
    version,
    about = "Studio-feature analysis of dance-music corpora"
)]
pub struct Cli {
    /// Master random seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads; 0 uses all cores. Never changes output bytes.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// `key = value` settings file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract per-track features from audio files into a corpus CSV.
    Extract(ExtractArgs),
    /// Boxplots, two-way MANOVA and follow-up ANOVAs.
    Analyze(AnalyzeArgs),
    /// Train a self-organizing map and write placement metrics.
    Som(SomArgs),
    /// Cross-validated style classification for one nation.
    Classify(ClassifyArgs),
    /// Combine a trained map, a corpus and optional statistics into a map bundle.
    Bundle(BundleArgs),
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Directory the metadata `filename` column is relative to.
    #[arg(long, value_name = "DIR")]
    pub audio_dir: PathBuf,
    /// CSV with filename, track_id, title, artist, label, nation, year, style and optional bpm.
    #[arg(long, value_name = "FILE")]
    pub metadata: PathBuf,
    /// Output corpus CSV; the normalization sidecar is written beside it.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Samples per analysis frame [default: 4096].
    #[arg(long)]
    pub frame_length: Option<usize>,
    /// Samples between frame starts [default: 2048].
    #[arg(long)]
    pub hop_length: Option<usize>,
    /// Boxes per axis for phase-space occupancy [default: 16].
    #[arg(long)]
    pub box_grid: Option<usize>,
    /// [default: 60]
    #[arg(long)]
    pub bpm_min: Option<f64>,
    /// [default: 200]
    #[arg(long)]
    pub bpm_max: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    /// numeric or categorical [default: numeric].
    #[arg(long, value_parser = parse_year_coding)]
    pub year_coding: Option<YearCoding>,
}

#[derive(Debug, Args)]
pub struct SomArgs {
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    /// Map columns [default: 30].
    #[arg(long)]
    pub width: Option<usize>,
    /// Map rows [default: 20].
    #[arg(long)]
    pub height: Option<usize>,
    /// [default: 20]
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Initial learning rate [default: 0.5].
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Initial neighbourhood radius in units [default: half the longer side].
    #[arg(long)]
    pub radius: Option<f64>,
    /// pca_linear or random [default: pca_linear].
    #[arg(long, value_parser = parse_init)]
    pub init: Option<InitMode>,
    /// Also render the U-matrix and component planes as PPM images.
    #[arg(long)]
    pub images: bool,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    /// G or U.
    #[arg(long, value_parser = parse_nation)]
    pub nation: Nation,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    /// kfold or repeated [default: kfold].
    #[arg(long, value_parser = parse_cv)]
    pub cv: Option<CvMode>,
    /// Folds for k-fold, repeats for repeated splits [default: 100].
    #[arg(long)]
    pub folds: Option<usize>,
    /// [default: 100]
    #[arg(long)]
    pub trees: Option<usize>,
    /// Features drawn per split [default: 2].
    #[arg(long)]
    pub max_features: Option<usize>,
    /// Minimum samples per leaf [default: 1].
    #[arg(long)]
    pub min_leaf: Option<usize>,
    /// [default: unlimited]
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Fit every tree on the full training split.
    #[arg(long)]
    pub no_bootstrap: bool,
}

#[derive(Debug, Args)]
pub struct BundleArgs {
    /// `som.json` written by the som command.
    #[arg(long, value_name = "FILE")]
    pub som: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    /// Output bundle JSON.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Directory holding manova.json, anova.json and boxplots.json to attach.
    #[arg(long, value_name = "DIR")]
    pub stats_dir: Option<PathBuf>,
}

fn parse_nation(s: &str) -> Result<Nation, String> {
    s.parse()
        .map_err(|_| format!("unknown nation {s:?}, expected G or U"))
}

fn parse_year_coding(s: &str) -> Result<YearCoding, String> {
    s.parse().map_err(|e: studiomap::Error| e.to_string())
}

fn parse_cv(s: &str) -> Result<CvMode, String> {
    s.parse().map_err(|e: studiomap::Error| e.to_string())
}

fn parse_init(s: &str) -> Result<InitMode, String> {
    s.parse().map_err(|e: studiomap::Error| e.to_string())
}
