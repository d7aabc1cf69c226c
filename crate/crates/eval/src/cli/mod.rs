//! The `tablegrid` command line.
//!
//! Exit codes: 0 on success, 1 when evaluation finished but some samples
//! failed (each failure is recorded in the report), 2 on a configuration
//! error. Diagnostics go to stderr as one JSON object per line.

mod commands;
mod render;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use tablegrid_core::datagen::DEFAULT_MATCH_THRESHOLD;
use tablegrid_core::grits::DEFAULT_ORACLE_LIMIT;
use tablegrid_core::Criterion;

use crate::io::PredictionFormat;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SAMPLE_FAILURES: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "tablegrid",
    version,
    about = "Table extraction evaluation toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cropped tables: one ground-truth grid and one prediction per sample.
    EvalTsr(TableArgs),
    /// Pages: table sets matched per page.
    EvalPage(TableArgs),
    /// Documents: table sets matched per document.
    EvalDoc(TableArgs),
    /// Page graphs: edge F1 and detection AP.
    EvalGraph(GraphArgs),
    /// Corpus statistics.
    Stats(StatsArgs),
    /// Edit-distance check of extracted table text against a reference.
    VerifyMultipart(VerifyArgs),
    /// Page pairs for the cross-page continuation task.
    SamplePairs(SampleArgs),
    /// Precision, recall and F1 of continuation predictions.
    ScorePairs(ScoreArgs),
}

fn parse_jobs(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("expected a positive integer, got {s:?}")),
    }
}

fn parse_unit_open(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v <= 1.0 => Ok(v),
        _ => Err(format!("expected a number in (0, 1], got {s:?}")),
    }
}

fn parse_unit_closed(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if (0.0..=1.0).contains(&v) => Ok(v),
        _ => Err(format!("expected a number in [0, 1], got {s:?}")),
    }
}

fn parse_format(s: &str) -> Result<PredictionFormat, String> {
    PredictionFormat::from_name(s)
        .ok_or_else(|| format!("expected html, span-markdown or grid-json, got {s:?}"))
}

fn parse_criterion(s: &str) -> Result<Criterion, String> {
    Criterion::ALL
        .into_iter()
        .find(|c| c.name() == s)
        .ok_or_else(|| format!("expected top or con, got {s:?}"))
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Worker threads.
    #[arg(long, env = "TABLEGRID_EVAL_JOBS", default_value = "1", value_parser = parse_jobs)]
    jobs: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print an aligned text table to stdout.
    #[arg(long)]
    text: bool,
}

#[derive(Debug, Args)]
struct TableArgs {
    /// Directory of ground-truth grid JSON files, one per sample.
    #[arg(long)]
    gt: PathBuf,
    /// Directory of predictions named after the ground-truth files.
    #[arg(long)]
    pred: PathBuf,
    /// Prediction format; by default chosen from the file extension.
    #[arg(long, value_parser = parse_format)]
    format: Option<PredictionFormat>,
    #[arg(long, value_delimiter = ',', default_value = "top,con", value_parser = parse_criterion)]
    criterion: Vec<Criterion>,
    /// Also compute the exact optimum for grids within the oracle limit.
    #[arg(long)]
    oracle_check: bool,
    #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
    oracle_limit: usize,
    /// Program that converts each raw prediction to HTML (stdin to stdout).
    #[arg(long)]
    pre_convert: Option<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct GraphArgs {
    /// Directory of ground-truth page graph JSON files.
    #[arg(long)]
    gt: PathBuf,
    /// Directory of predicted page graphs named after the ground truth.
    #[arg(long)]
    pred: PathBuf,
    /// IoU a node must reach to match.
    #[arg(long, default_value = "0.8", value_parser = parse_unit_open)]
    iou: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// Corpus root or a single collection.
    #[arg(long, visible_alias = "root")]
    gt: PathBuf,
    /// Fail on unknown class names and malformed files instead of skipping.
    #[arg(long)]
    strict_classes: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Text file with the reference table text.
    #[arg(long)]
    reference: PathBuf,
    /// Text file with the extracted text.
    #[arg(long, required_unless_present = "parts", conflicts_with = "parts")]
    extracted: Option<PathBuf>,
    /// JSON list of detected parts, `[{"page": i, "text": "..."}]`.
    #[arg(long)]
    parts: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MATCH_THRESHOLD, value_parser = parse_unit_closed)]
    threshold: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SampleArgs {
    /// A documents.json file, a collection or a corpus root.
    #[arg(long)]
    gt: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// Gold pairs as JSON lines.
    #[arg(long)]
    gt: PathBuf,
    /// Predicted pairs as JSON lines.
    #[arg(long)]
    pred: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

/// A configuration problem; reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

/// What a command produced.
struct Outcome {
    /// The machine-readable report, newline-terminated.
    report: Vec<u8>,
    /// Optional human-readable rendering.
    text: Option<String>,
    /// JSON lines for stderr.
    warnings: Vec<String>,
    failed: bool,
}

/// Runs the command line; `argv[0]` is the program name.
pub fn run<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let out: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(out, "{}", e.render());
            return code;
        }
    };
    let (result, output) = match &cli.command {
        Command::EvalTsr(a) => (commands::eval_tables("eval-tsr", a), &a.output),
        Command::EvalPage(a) => (commands::eval_tables("eval-page", a), &a.output),
        Command::EvalDoc(a) => (commands::eval_tables("eval-doc", a), &a.output),
        Command::EvalGraph(a) => (commands::eval_graph(a), &a.output),
        Command::Stats(a) => (commands::stats(a), &a.output),
        Command::VerifyMultipart(a) => (commands::verify_multipart(a), &a.output),
        Command::SamplePairs(a) => (commands::sample_pairs(a), &a.output),
        Command::ScorePairs(a) => (commands::score_pairs(a), &a.output),
    };
    let outcome = match result {
        Ok(outcome) => outcome,
        Err(ConfigError(message)) => {
            let _ = writeln!(stderr, "error: {message}");
            return EXIT_CONFIG;
        }
    };
    for line in &outcome.warnings {
        let _ = writeln!(stderr, "{line}");
    }
    if let Some(path) = &output.out {
        if let Err(e) = std::fs::write(path, &outcome.report) {
            let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
            return EXIT_CONFIG;
        }
    }
    let shown = match (&outcome.text, output.text, &output.out) {
        (Some(text), true, _) => stdout.write_all(text.as_bytes()),
        (_, _, None) => stdout.write_all(&outcome.report),
        _ => Ok(()),
    };
    if shown.is_err() {
        return EXIT_CONFIG;
    }
    if outcome.failed {
        EXIT_SAMPLE_FAILURES
    } else {
        EXIT_OK
    }
}
