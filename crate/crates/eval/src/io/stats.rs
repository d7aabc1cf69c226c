//! Corpus statistics.
//!
//! A collection is a directory holding `train`, `val` or `test` splits
//! and/or a `documents.json` index. Inside a split, `<sample>.xml` files are
//! VOC page annotations and `<sample>_grid.json` files are table grids; a
//! split may carry its own `documents.json`. Counts are additive, so
//! per-file reports are merged in path order.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use tablegrid_core::document::DocumentRecord;
use tablegrid_core::table::TableGrid;

use super::{
    load_documents_json, load_grid_json, read_file, read_voc_annotation, sorted_entries,
    ClassPolicy, IoError, VocPage,
};

pub const SPLITS: [&str; 3] = ["train", "val", "test"];
const DOCUMENTS_FILE: &str = "documents.json";
const GRID_SUFFIX: &str = "_grid.json";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsReport {
    /// Samples per `collection/split`.
    pub samples: BTreeMap<String, u64>,
    pub objects_per_class: BTreeMap<String, u64>,
    /// Objects dropped for an unknown class name.
    pub unknown_classes: BTreeMap<String, u64>,
    pub documents: u64,
    pub tables_by_pages_spanned: BTreeMap<usize, u64>,
    /// Tables with parts on two or more pages.
    pub multi_page_tables: u64,
    pub grids: u64,
    pub long_tables: u64,
    pub wide_tables: u64,
    pub long_and_wide_tables: u64,
}

fn add_counts<K: Ord + Clone>(into: &mut BTreeMap<K, u64>, from: &BTreeMap<K, u64>) {
    for (k, v) in from {
        *into.entry(k.clone()).or_default() += v;
    }
}

impl StatsReport {
    /// Componentwise sum.
    pub fn merge(&mut self, other: &StatsReport) {
        add_counts(&mut self.samples, &other.samples);
        add_counts(&mut self.objects_per_class, &other.objects_per_class);
        add_counts(&mut self.unknown_classes, &other.unknown_classes);
        self.documents += other.documents;
        add_counts(
            &mut self.tables_by_pages_spanned,
            &other.tables_by_pages_spanned,
        );
        self.multi_page_tables += other.multi_page_tables;
        self.grids += other.grids;
        self.long_tables += other.long_tables;
        self.wide_tables += other.wide_tables;
        self.long_and_wide_tables += other.long_and_wide_tables;
    }

    pub fn add_page(&mut self, page: &VocPage) {
        for object in &page.annotation.objects {
            *self
                .objects_per_class
                .entry(object.class.to_string())
                .or_default() += 1;
        }
        for name in &page.unknown_classes {
            *self.unknown_classes.entry(name.clone()).or_default() += 1;
        }
    }

    pub fn add_grid(&mut self, grid: &TableGrid) {
        self.grids += 1;
        let (long, wide) = (grid.is_long(), grid.is_wide());
        self.long_tables += u64::from(long);
        self.wide_tables += u64::from(wide);
        self.long_and_wide_tables += u64::from(long && wide);
    }

    pub fn add_document(&mut self, doc: &DocumentRecord) {
        self.documents += 1;
        for table in &doc.tables {
            let pages = table.pages_spanned();
            *self.tables_by_pages_spanned.entry(pages).or_default() += 1;
            self.multi_page_tables += u64::from(pages >= 2);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileWarning {
    pub path: PathBuf,
    pub code: &'static str,
    pub message: String,
}

fn is_collection(dir: &Path) -> bool {
    dir.join(DOCUMENTS_FILE).is_file() || SPLITS.iter().any(|s| dir.join(s).is_dir())
}

/// The root itself if it is a collection, else its collection children.
pub fn collection_dirs(root: &Path) -> Result<Vec<PathBuf>, IoError> {
    if is_collection(root) {
        return Ok(vec![root.to_path_buf()]);
    }
    Ok(sorted_entries(root)?
        .into_iter()
        .filter(|p| p.is_dir() && is_collection(p))
        .collect())
}

enum Task {
    Page(PathBuf),
    Grid(PathBuf),
    Documents(PathBuf),
}

impl Task {
    fn path(&self) -> &Path {
        match self {
            Task::Page(p) | Task::Grid(p) | Task::Documents(p) => p,
        }
    }

    fn run(&self, policy: ClassPolicy) -> Result<(StatsReport, Vec<FileWarning>), IoError> {
        let bytes = read_file(self.path())?;
        let mut report = StatsReport::default();
        let mut warnings = Vec::new();
        match self {
            Task::Page(path) => {
                let page = read_voc_annotation(&bytes, policy)?;
                warnings.extend(page.unknown_classes.iter().map(|name| FileWarning {
                    path: path.clone(),
                    code: "UnknownClassName",
                    message: format!("object of unknown class {name:?} skipped"),
                }));
                report.add_page(&page);
            }
            Task::Grid(_) => report.add_grid(&load_grid_json(&bytes)?),
            Task::Documents(_) => {
                for doc in load_documents_json(&bytes)? {
                    report.add_document(&doc);
                }
            }
        }
        Ok((report, warnings))
    }
}

fn file_name(path: &Path) -> &str {
    path.file_name()
        .and_then(|n| n.to_str())
        .unwrap_or_default()
}

fn split_tasks(
    collection: &str,
    split: &str,
    dir: &Path,
    report: &mut StatsReport,
) -> Result<Vec<Task>, IoError> {
    let mut tasks = Vec::new();
    let mut samples = BTreeSet::new();
    for path in sorted_entries(dir)? {
        let name = file_name(&path);
        if !path.is_file() {
            continue;
        }
        if let Some(stem) = name.strip_suffix(".xml") {
            samples.insert(stem.to_string());
            tasks.push(Task::Page(path));
        } else if let Some(stem) = name.strip_suffix(GRID_SUFFIX) {
            samples.insert(stem.to_string());
            tasks.push(Task::Grid(path));
        } else if name == DOCUMENTS_FILE {
            tasks.push(Task::Documents(path));
        }
    }
    report
        .samples
        .insert(format!("{collection}/{split}"), samples.len() as u64);
    Ok(tasks)
}

/// Statistics over every collection under `root`.
///
/// Under [`ClassPolicy::Lenient`] unreadable or malformed files are skipped
/// with a warning; under [`ClassPolicy::Strict`] the first one is an error.
pub fn corpus_stats(
    root: &Path,
    policy: ClassPolicy,
    jobs: usize,
) -> Result<(StatsReport, Vec<FileWarning>), IoError> {
    let collections = collection_dirs(root)?;
    if collections.is_empty() {
        return Err(IoError::Io {
            path: root.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no collection found"),
        });
    }
    let mut report = StatsReport::default();
    let mut tasks = Vec::new();
    for dir in &collections {
        let name = file_name(dir).to_string();
        if dir.join(DOCUMENTS_FILE).is_file() {
            tasks.push(Task::Documents(dir.join(DOCUMENTS_FILE)));
        }
        for split in SPLITS {
            let split_dir = dir.join(split);
            if split_dir.is_dir() {
                tasks.extend(split_tasks(&name, split, &split_dir, &mut report)?);
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    let results: Vec<_> = pool.install(|| tasks.par_iter().map(|t| t.run(policy)).collect());

    let mut warnings = Vec::new();
    for (task, result) in tasks.iter().zip(results) {
        match result {
            Ok((part, w)) => {
                report.merge(&part);
                warnings.extend(w);
            }
            Err(e) if policy == ClassPolicy::Lenient => warnings.push(FileWarning {
                path: task.path().to_path_buf(),
                code: "SkippedFile",
                message: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    Ok((report, warnings))
}
