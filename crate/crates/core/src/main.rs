// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use radar::classify::{kfold_cv, CvReport, EnsembleModel, MemberOutput};
use radar::config::{AnalysisConfig, RadarConfig};
use radar::dataset::{self, write_prediction_csv};
use radar::features::{read_feature_csv_file, write_feature_csv, FeatureRow, FeatureVector};
use radar::scoring::ScoreSet;
use radar::synth::{self, CorpusSpec};
use radar::trace::{self, Label};
use radar::RadarError;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "radar",
    version,
    about = "Recall-vs-reasoning detection from activation traces"
)]
struct Cli {
    /// TOML (or .json) configuration file.
    #[arg(long, global = true, env = "RADAR_CONFIG")]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Only print errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract the 37 features from every trace in a directory.
    Features {
        #[arg(long)]
        traces: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validate, then fit the ensemble on all rows.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        folds: usize,
    },
    /// Classify one trace.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        /// Write the result here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a labeled feature table; writes REPORT (JSON) plus .txt and .csv siblings.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Stratified k-fold cross-validation only.
    Cv {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        seed: u64,
    },
    /// Write a synthetic archetype corpus as trace files.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Split::Train)]
        split: Split,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        noise: f64,
        /// Gzip the trace files.
        #[arg(long)]
        gzip: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Split {
    Train,
    Test,
}

/// Failure with its exit code: 1 for usage/config, 2 for data.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<RadarError> for Failure {
    fn from(e: RadarError) -> Self {
        Failure {
            code: if e.is_usage() { 1 } else { 2 },
            message: e.to_string(),
        }
    }
}

type CliResult<T = ()> = std::result::Result<T, Failure>;

fn write_file(path: &Path, bytes: &[u8]) -> CliResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::data(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    radar::jsonfmt::to_vec_pretty(value).map_err(|e| Failure::data(e.to_string()))
}

fn load_config(path: Option<&Path>) -> CliResult<RadarConfig> {
    match path {
        None => Ok(RadarConfig::default()),
        Some(p) => RadarConfig::load(p).map_err(|e| Failure::usage(e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.quiet {
            log::LevelFilter::Error
        } else {
            log::LevelFilter::Info
        })
        .format(|buf, record| {
            let level = match record.level() {
                log::Level::Warn => "warning",
                log::Level::Error => "error",
                _ => "info",
            };
            writeln!(buf, "{level}: {}", record.args())
        })
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> CliResult {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Failure::usage("--workers must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::usage(e.to_string()))?;
    }
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Features { traces, out } => cmd_features(&traces, &out, &config.analysis),
        Command::Train {
            features,
            out,
            seed,
            folds,
        } => cmd_train(&features, &out, seed, folds, &config),
        Command::Predict { model, trace, out } => cmd_predict(&model, &trace, out.as_deref(), &config),
        Command::Evaluate { model, features, out } => cmd_evaluate(&model, &features, &out, cli.quiet),
        Command::Cv { features, folds, seed } => cmd_cv(&features, folds, seed, &config),
        Command::Synth {
            out,
            split,
            seed,
            noise,
            gzip,
        } => cmd_synth(&out, split, seed, noise, gzip),
    }
}

#[derive(Serialize)]
struct FeaturesMeta<'a> {
    radar_version: &'a str,
    analysis: &'a AnalysisConfig,
    rows: usize,
    skipped: Vec<String>,
}

fn cmd_features(dir: &Path, out: &Path, analysis: &AnalysisConfig) -> CliResult {
    let entries = fs::read_dir(dir).map_err(|e| Failure::data(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| trace::is_trace_path(p))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Failure::data(format!("no traces found in {}", dir.display())));
    }
    let results: Vec<_> = paths
        .par_iter()
        .map(|p| trace::read_trace_file(p).and_then(|t| FeatureRow::from_trace(&t, analysis)))
        .collect();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (path, result) in paths.iter().zip(results) {
        match result {
            Ok(row) => rows.push(row),
            Err(e) => {
                warn!("skipping {}: {e}", path.display());
                skipped.push(path.file_name().unwrap_or_default().to_string_lossy().into_owned());
            }
        }
    }
    if rows.is_empty() {
        return Err(Failure::data(format!("all {} traces failed", paths.len())));
    }
    rows.sort_by(|a, b| a.prompt_id.cmp(&b.prompt_id));
    let mut csv = Vec::new();
    write_feature_csv(&mut csv, &rows)?;
    write_file(out, &csv)?;
    let meta = FeaturesMeta {
        radar_version: VERSION,
        analysis,
        rows: rows.len(),
        skipped,
    };
    write_file(&meta_path(out), &to_json(&meta)?)?;
    info!("wrote {} rows to {}", rows.len(), out.display());
    Ok(())
}

fn meta_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn labeled(rows: &[FeatureRow]) -> CliResult<(Vec<FeatureVector>, Vec<Label>)> {
    if rows.is_empty() {
        return Err(Failure::data("feature table has no rows"));
    }
    rows.iter()
        .map(|r| match r.label {
            Some(l) => Ok((r.features, l)),
            None => Err(Failure::data(format!("row {:?} has no label", r.prompt_id))),
        })
        .collect::<CliResult<Vec<_>>>()
        .map(|v| v.into_iter().unzip())
}

fn print_cv(report: &CvReport) {
    for (i, (acc, n)) in report.fold_accuracies.iter().zip(&report.fold_sizes).enumerate() {
        println!("fold {}: {:.4} ({} rows)", i + 1, acc, n);
    }
    println!("mean cv accuracy: {:.4}", report.mean_accuracy);
}

fn cmd_train(features: &Path, out: &Path, seed: u64, folds: usize, config: &RadarConfig) -> CliResult {
    if folds < 2 {
        return Err(Failure::usage("--folds must be at least 2"));
    }
    let rows = read_feature_csv_file(features)?;
    let (x, y) = labeled(&rows)?;
    let report = kfold_cv(&x, &y, folds, config, seed)?;
    print_cv(&report);
    let model = EnsembleModel::train(&x, &y, config, seed)?;
    write_file(out, &model.to_json()?)?;
    info!("wrote model to {}", out.display());
    Ok(())
}

fn cmd_cv(features: &Path, folds: usize, seed: u64, config: &RadarConfig) -> CliResult {
    if folds < 2 {
        return Err(Failure::usage("--folds must be at least 2"));
    }
    let rows = read_feature_csv_file(features)?;
    let (x, y) = labeled(&rows)?;
    print_cv(&kfold_cv(&x, &y, folds, config, seed)?);
    Ok(())
}

#[derive(Serialize)]
struct PredictOutput<'a> {
    radar_version: &'a str,
    prompt_id: &'a str,
    label: Label,
    confidence: f64,
    mean_probability: f64,
    members: &'a [MemberOutput],
    scores: ScoreSet,
    features: FeatureVector,
}

fn cmd_predict(model: &Path, trace_path: &Path, out: Option<&Path>, config: &RadarConfig) -> CliResult {
    let model = EnsembleModel::load(model)?;
    if config.analysis != model.analysis {
        warn!("extracting with the model's analysis settings, not the configured ones");
    }
    let t = trace::read_trace_file(trace_path)?;
    let features = radar::features::extract_features(&t, &model.analysis)?;
    let p = model.predict(&features)?;
    let doc = to_json(&PredictOutput {
        radar_version: VERSION,
        prompt_id: &t.prompt_id,
        label: p.label,
        confidence: p.confidence,
        mean_probability: p.mean_probability,
        members: &p.members,
        scores: p.scores,
        features,
    })?;
    match out {
        Some(path) => write_file(path, &doc),
        None => std::io::stdout()
            .write_all(&doc)
            .map_err(|e| Failure::data(e.to_string())),
    }
}

fn cmd_evaluate(model: &Path, features: &Path, out: &Path, quiet: bool) -> CliResult {
    let model = EnsembleModel::load(model)?;
    let rows = read_feature_csv_file(features)?;
    let report = dataset::evaluate(&model, &rows)?;
    write_file(out, &report.to_json()?)?;
    let table = report.render_table();
    write_file(&out.with_extension("txt"), table.as_bytes())?;
    let mut csv = Vec::new();
    write_prediction_csv(&mut csv, &rows, &report)?;
    write_file(&out.with_extension("csv"), &csv)?;
    if !quiet {
        print!("{table}");
    }
    Ok(())
}

fn cmd_synth(out: &Path, split: Split, seed: u64, noise: f64, gzip: bool) -> CliResult {
    if !(noise.is_finite() && noise >= 0.0) {
        return Err(Failure::usage("--noise must be a nonnegative number"));
    }
    let spec = CorpusSpec {
        noise,
        ..CorpusSpec::default()
    };
    let traces = match split {
        Split::Train => synth::train_corpus(spec, seed),
        Split::Test => synth::test_corpus(spec, seed),
    };
    fs::create_dir_all(out).map_err(|e| Failure::data(format!("{}: {e}", out.display())))?;
    let suffix = if gzip {
        trace::TRACE_SUFFIX_GZ
    } else {
        trace::TRACE_SUFFIX
    };
    traces
        .par_iter()
        .try_for_each(|t| trace::write_trace_file(&out.join(format!("{}{suffix}", t.prompt_id)), t))?;
    info!("wrote {} traces to {}", traces.len(), out.display());
    Ok(())
}
