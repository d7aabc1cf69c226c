use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use tablegrid_core::binary_prf;
use tablegrid_core::datagen::{
    enumerate_part_combinations, sample_continuation_pairs, verify_multipart_match, MatchVerdict,
    PairLabel,
};
use tablegrid_core::document::DocumentRecord;
use tablegrid_core::table::TableGrid;

use super::render;
use super::{
    ConfigError, GraphArgs, Outcome, SampleArgs, ScoreArgs, StatsArgs, TableArgs, VerifyArgs,
};
use crate::evaluate::{
    graph_report, par_map, score_graph_sample, score_table_sample, table_report, GraphSample,
    SampleWarning, TableEvalOptions, TableSample,
};
use crate::io::{
    collection_dirs, corpus_stats, load_documents_json, load_graph_json, load_grid_list,
    parse_prediction, read_file, read_pairs_jsonl, read_voc_annotation, sorted_entries,
    write_pairs_jsonl, ClassPolicy, CommandConverter, PreConvert, PredictionFormat, SPLITS,
};

fn require_dir(flag: &str, path: &Path) -> Result<(), ConfigError> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(ConfigError(format!(
            "--{flag} {} is not a directory",
            path.display()
        )))
    }
}

fn require_file(flag: &str, path: &Path) -> Result<(), ConfigError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(ConfigError(format!(
            "--{flag} {} is not a file",
            path.display()
        )))
    }
}

fn listing(dir: &Path) -> Result<Vec<PathBuf>, ConfigError> {
    sorted_entries(dir).map_err(|e| ConfigError(e.to_string()))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Ground-truth JSON files in name order.
fn gt_files(dir: &Path) -> Result<Vec<PathBuf>, ConfigError> {
    Ok(listing(dir)?
        .into_iter()
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "json"))
        .collect())
}

/// Prediction files keyed by stem, in name order.
fn pred_index(dir: &Path) -> Result<HashMap<String, Vec<PathBuf>>, ConfigError> {
    let mut index: HashMap<String, Vec<PathBuf>> = HashMap::new();
    for path in listing(dir)?.into_iter().filter(|p| p.is_file()) {
        index.entry(stem(&path)).or_default().push(path);
    }
    Ok(index)
}

fn to_json_pretty<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("reports always serialize");
    out.push(b'\n');
    out
}

fn warning_lines(warnings: &[SampleWarning]) -> Vec<String> {
    warnings
        .iter()
        .map(|w| serde_json::to_string(w).expect("warnings always serialize"))
        .collect()
}

struct PredictionSource<'a> {
    index: HashMap<String, Vec<PathBuf>>,
    format: Option<PredictionFormat>,
    converter: Option<&'a dyn PreConvert>,
}

impl PredictionSource<'_> {
    /// The prediction file for a sample and the format to parse it with.
    fn locate(&self, sample: &str) -> Option<(&Path, PredictionFormat)> {
        let candidates = self.index.get(sample)?;
        if self.converter.is_some() {
            let path = candidates.first()?;
            return Some((path, self.format.unwrap_or(PredictionFormat::Html)));
        }
        let formats: &[PredictionFormat] = match &self.format {
            Some(f) => std::slice::from_ref(f),
            None => &PredictionFormat::ALL,
        };
        formats.iter().find_map(|&f| {
            candidates
                .iter()
                .find(|p| PredictionFormat::from_path(p) == Some(f))
                .map(|p| (p.as_path(), f))
        })
    }

    fn load(
        &self,
        sample: &str,
        warnings: &mut Vec<SampleWarning>,
    ) -> (Result<Vec<TableGrid>, String>, bool) {
        let Some((path, format)) = self.locate(sample) else {
            return (Err(String::from("no prediction file")), false);
        };
        let raw = match read_file(path) {
            Ok(raw) => raw,
            Err(e) => return (Err(e.to_string()), false),
        };
        let bytes = match self.converter {
            Some(c) => match c.convert(raw) {
                Ok(b) => b,
                Err(e) => return (Err(format!("pre-conversion failed: {e}")), false),
            },
            None => raw,
        };
        match parse_prediction(&bytes, format) {
            Ok(report) => {
                warnings.extend(
                    report
                        .warnings
                        .iter()
                        .map(|w| SampleWarning::from_parse(sample, w)),
                );
                (Ok(report.grids), report.repaired)
            }
            Err(e) => (Err(e.to_string()), false),
        }
    }
}

fn load_table_sample(command: &str, gt_path: &Path, source: &PredictionSource) -> TableSample {
    let id = stem(gt_path);
    let mut warnings = Vec::new();
    let mut gt = read_file(gt_path)
        .and_then(|b| load_grid_list(&b))
        .map_err(|e| e.to_string());
    let (mut pred, repaired) = source.load(&id, &mut warnings);
    if command == "eval-tsr" {
        gt = gt.and_then(|g| match g.len() {
            1 => Ok(g),
            n => Err(format!("expected one ground-truth table, found {n}")),
        });
        if let Ok(p) = &mut pred {
            if p.len() > 1 {
                warnings.push(SampleWarning::new(
                    &id,
                    "ExtraTables",
                    format!("{} tables predicted; only the first is scored", p.len()),
                ));
                p.truncate(1);
            }
        }
    }
    TableSample {
        id,
        gt,
        pred,
        repaired,
        warnings,
    }
}

pub(super) fn eval_tables(command: &str, args: &TableArgs) -> Result<Outcome, ConfigError> {
    require_dir("gt", &args.gt)?;
    require_dir("pred", &args.pred)?;
    let mut criteria = args.criterion.clone();
    criteria.sort();
    criteria.dedup();
    let converter = match &args.pre_convert {
        Some(line) => Some(
            CommandConverter::from_command_line(line)
                .ok_or_else(|| ConfigError(String::from("--pre-convert is empty")))?,
        ),
        None => None,
    };
    let source = PredictionSource {
        index: pred_index(&args.pred)?,
        format: args.format,
        converter: converter.as_ref().map(|c| c as &dyn PreConvert),
    };
    let options = TableEvalOptions {
        criteria: &criteria,
        oracle_limit: args.oracle_check.then_some(args.oracle_limit),
    };
    let files = gt_files(&args.gt)?;
    let scored = par_map(&files, args.output.jobs, |path| {
        score_table_sample(&load_table_sample(command, path, &source), options)
    });
    let warnings: Vec<SampleWarning> = scored.iter().flat_map(|s| s.warnings.clone()).collect();
    let report = table_report(command, &criteria, scored);
    let label = args.pred.file_name().map_or_else(
        || args.pred.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    );
    Ok(Outcome {
        text: Some(render::table_report(&label, &report)),
        failed: report.corpus.n_failed > 0,
        report: to_json_pretty(&report),
        warnings: warning_lines(&warnings),
    })
}

pub(super) fn eval_graph(args: &GraphArgs) -> Result<Outcome, ConfigError> {
    require_dir("gt", &args.gt)?;
    require_dir("pred", &args.pred)?;
    let files = gt_files(&args.gt)?;
    let pred_dir = &args.pred;
    let scored = par_map(&files, args.output.jobs, |path| {
        let id = stem(path);
        let load = |p: &Path| {
            read_file(p)
                .and_then(|b| load_graph_json(&b, ClassPolicy::Strict))
                .map(|g| g.graph)
                .map_err(|e| e.to_string())
        };
        let pred_path = pred_dir.join(format!("{id}.json"));
        let pred = if pred_path.is_file() {
            load(&pred_path)
        } else {
            Err(String::from("no prediction file"))
        };
        let sample = GraphSample {
            gt: load(path),
            pred,
            warnings: Vec::new(),
            id,
        };
        score_graph_sample(&sample, args.iou)
    });
    let warnings: Vec<SampleWarning> = scored.iter().flat_map(|s| s.warnings.clone()).collect();
    let report = graph_report("eval-graph", args.iou, scored);
    let label = args.pred.file_name().map_or_else(
        || args.pred.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    );
    Ok(Outcome {
        text: Some(render::graph_report(&label, &report)),
        failed: report.corpus.n_failed > 0,
        report: to_json_pretty(&report),
        warnings: warning_lines(&warnings),
    })
}

#[derive(Serialize)]
struct FileWarningLine<'a> {
    file: String,
    code: &'a str,
    message: &'a str,
}

pub(super) fn stats(args: &StatsArgs) -> Result<Outcome, ConfigError> {
    require_dir("gt", &args.gt)?;
    let policy = if args.strict_classes {
        ClassPolicy::Strict
    } else {
        ClassPolicy::Lenient
    };
    let (report, warnings) =
        corpus_stats(&args.gt, policy, args.output.jobs).map_err(|e| ConfigError(e.to_string()))?;
    let failed = warnings.iter().any(|w| w.code == "SkippedFile");
    let lines = warnings
        .iter()
        .map(|w| {
            serde_json::to_string(&FileWarningLine {
                file: w.path.display().to_string(),
                code: w.code,
                message: &w.message,
            })
            .expect("warnings always serialize")
        })
        .collect();
    Ok(Outcome {
        text: Some(render::stats_report(&report)),
        report: to_json_pretty(&report),
        warnings: lines,
        failed,
    })
}

fn read_text(flag: &str, path: &Path) -> Result<String, ConfigError> {
    require_file(flag, path)?;
    let bytes = read_file(path).map_err(|e| ConfigError(e.to_string()))?;
    String::from_utf8(bytes).map_err(|_| ConfigError(format!("--{flag} is not UTF-8 text")))
}

#[derive(Serialize)]
struct VerdictRecord {
    normalized_distance: f64,
    edit_distance: usize,
    matched: bool,
    threshold: f64,
}

impl From<MatchVerdict> for VerdictRecord {
    fn from(v: MatchVerdict) -> Self {
        Self {
            normalized_distance: v.normalized_distance,
            edit_distance: v.edit_distance,
            matched: v.matched,
            threshold: v.threshold,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PartInput {
    page: usize,
    text: String,
}

#[derive(Serialize)]
struct CandidateRecord {
    start: usize,
    end: usize,
    pages: Vec<usize>,
    #[serde(flatten)]
    verdict: VerdictRecord,
}

#[derive(Serialize)]
struct PartsReport {
    /// First matching candidate in enumeration order.
    best: Option<usize>,
    candidates: Vec<CandidateRecord>,
}

pub(super) fn verify_multipart(args: &VerifyArgs) -> Result<Outcome, ConfigError> {
    let reference = read_text("reference", &args.reference)?;
    let report = if let Some(path) = &args.extracted {
        let extracted = read_text("extracted", path)?;
        to_json_pretty(&VerdictRecord::from(verify_multipart_match(
            &extracted,
            &reference,
            args.threshold,
        )))
    } else {
        let path = args.parts.as_ref().expect("clap requires --parts");
        let parts: Vec<PartInput> = serde_json::from_str(&read_text("parts", path)?)
            .map_err(|e| ConfigError(format!("--parts: {e}")))?;
        let parts: Vec<(usize, String)> = parts.into_iter().map(|p| (p.page, p.text)).collect();
        let candidates: Vec<CandidateRecord> = enumerate_part_combinations(&parts)
            .into_iter()
            .map(|c| CandidateRecord {
                pages: parts[c.start..c.end].iter().map(|(p, _)| *p).collect(),
                verdict: verify_multipart_match(&c.text, &reference, args.threshold).into(),
                start: c.start,
                end: c.end,
            })
            .collect();
        to_json_pretty(&PartsReport {
            best: candidates.iter().position(|c| c.verdict.matched),
            candidates,
        })
    };
    Ok(Outcome {
        report,
        text: None,
        warnings: Vec::new(),
        failed: false,
    })
}

/// Documents with page objects filled in from the VOC files of the splits.
fn load_documents(
    root: &Path,
    warnings: &mut Vec<String>,
) -> Result<Vec<DocumentRecord>, ConfigError> {
    let config = |e: crate::io::IoError| ConfigError(e.to_string());
    if root.is_file() {
        return load_documents_json(&read_file(root).map_err(config)?).map_err(config);
    }
    let mut docs = Vec::new();
    for collection in collection_dirs(root).map_err(config)? {
        let mut indexes = vec![collection.join("documents.json")];
        let mut pages: BTreeMap<String, PathBuf> = BTreeMap::new();
        for split in SPLITS {
            let dir = collection.join(split);
            if !dir.is_dir() {
                continue;
            }
            indexes.push(dir.join("documents.json"));
            for path in listing(&dir)? {
                if path.extension().is_some_and(|e| e == "xml") {
                    pages.entry(stem(&path)).or_insert(path);
                }
            }
        }
        for index in indexes.into_iter().filter(|p| p.is_file()) {
            let mut batch =
                load_documents_json(&read_file(&index).map_err(config)?).map_err(config)?;
            for doc in &mut batch {
                for page in &mut doc.pages {
                    let Some(path) = pages.get(&page.image_id) else {
                        continue;
                    };
                    match read_file(path).and_then(|b| read_voc_annotation(&b, ClassPolicy::Lenient)) {
                        Ok(voc) => page.objects = voc.annotation.objects,
                        Err(e) => warnings.push(
                            serde_json::json!({"file": path.display().to_string(), "code": "SkippedFile", "message": e.to_string()})
                                .to_string(),
                        ),
                    }
                }
            }
            docs.extend(batch);
        }
    }
    Ok(docs)
}

pub(super) fn sample_pairs(args: &SampleArgs) -> Result<Outcome, ConfigError> {
    if !args.gt.exists() {
        return Err(ConfigError(format!(
            "--gt {} does not exist",
            args.gt.display()
        )));
    }
    let mut warnings = Vec::new();
    let docs = load_documents(&args.gt, &mut warnings)?;
    let pairs = sample_continuation_pairs(&docs);
    Ok(Outcome {
        report: write_pairs_jsonl(&pairs),
        text: None,
        failed: !warnings.is_empty(),
        warnings,
    })
}

#[derive(Serialize)]
struct PairScoreReport {
    n_pairs: usize,
    n_missing_predictions: usize,
    recall: f64,
    precision: f64,
    f1: f64,
    true_positives: usize,
    false_positives: usize,
    false_negatives: usize,
}

pub(super) fn score_pairs(args: &ScoreArgs) -> Result<Outcome, ConfigError> {
    require_file("gt", &args.gt)?;
    require_file("pred", &args.pred)?;
    let read = |p: &Path| {
        read_file(p)
            .and_then(|b| read_pairs_jsonl(&b))
            .map_err(|e| ConfigError(format!("{}: {e}", p.display())))
    };
    let gold = read(&args.gt)?;
    let predicted: BTreeMap<(String, usize), PairLabel> = read(&args.pred)?
        .into_iter()
        .map(|p| ((p.doc_id, p.first_page), p.label))
        .collect();
    let mut warnings = Vec::new();
    let mut labels = (
        Vec::with_capacity(gold.len()),
        Vec::with_capacity(gold.len()),
    );
    for pair in &gold {
        let key = (pair.doc_id.clone(), pair.first_page);
        let label = predicted.get(&key).copied().unwrap_or_else(|| {
            warnings.push(SampleWarning::new(
                &format!("{}#{}", pair.doc_id, pair.first_page),
                "MissingPrediction",
                "no predicted label; counted as negative",
            ));
            PairLabel::Negative
        });
        labels.0.push(pair.label.is_positive());
        labels.1.push(label.is_positive());
    }
    let scores = binary_prf(&labels.0, &labels.1).map_err(|e| ConfigError(e.to_string()))?;
    Ok(Outcome {
        report: to_json_pretty(&PairScoreReport {
            n_pairs: gold.len(),
            n_missing_predictions: warnings.len(),
            recall: scores.recall,
            precision: scores.precision,
            f1: scores.f1,
            true_positives: scores.true_positives,
            false_positives: scores.false_positives,
            false_negatives: scores.false_negatives,
        }),
        text: None,
        failed: !warnings.is_empty(),
        warnings: warning_lines(&warnings),
    })
}
