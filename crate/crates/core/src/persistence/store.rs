//! On-disk metric history.
//!
//! ```text
//! <store>/index.json                       label -> timestamp, tree files
//! <store>/snapshots/<label>/metrics.json   MetricsReport
//! <store>/snapshots/<label>/<file>.ecst.xml
//! ```
//!
//! Writers hold `<store>/.lock` (created exclusively) for the duration of a
//! save; readers take no lock.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::{self, OpenOptions};
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::xml::ecst_to_xml;
use crate::frontends::ParsedFile;
use crate::metrics::{unit_report, MetricsError, MetricsReport};

const INDEX: &str = "index.json";
const LOCK: &str = ".lock";
const LOCK_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("snapshot `{0}` already exists")]
    DuplicateLabel(String),
    #[error("no snapshot labelled `{0}`")]
    UnknownLabel(String),
    #[error("invalid snapshot label `{0}` (use letters, digits, `.`, `-`, `_`)")]
    InvalidLabel(String),
    #[error("{0}: store is locked by another writer")]
    Locked(PathBuf),
    #[error("two input files share the name `{0}`")]
    DuplicateBasename(String),
    #[error("function `{key}` is defined in both {first} and {second}")]
    DuplicateFunction {
        key: String,
        first: String,
        second: String,
    },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeFile {
    pub source: String,
    /// Relative to the snapshot directory.
    pub xml: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub label: String,
    /// Seconds since the Unix epoch, UTC.
    pub timestamp: u64,
    pub report: MetricsReport,
    pub tree_files: Vec<TreeFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct IndexEntry {
    label: String,
    timestamp: u64,
    tree_files: Vec<TreeFile>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct Index {
    snapshots: Vec<IndexEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FunctionKey {
    pub unit: String,
    pub name: String,
}

impl fmt::Display for FunctionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.unit, self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CcChange {
    pub key: FunctionKey,
    pub before: u32,
    pub after: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotDiff {
    pub added: Vec<FunctionKey>,
    pub removed: Vec<FunctionKey>,
    pub changed: Vec<CcChange>,
}

impl SnapshotDiff {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty() && self.changed.is_empty()
    }
}

/// Function-level comparison of two reports, keyed by `(unit, name)`.
pub fn diff_reports(before: &MetricsReport, after: &MetricsReport) -> SnapshotDiff {
    let index = |r: &MetricsReport| -> BTreeMap<FunctionKey, u32> {
        r.functions
            .iter()
            .map(|f| {
                (
                    FunctionKey {
                        unit: f.unit.clone(),
                        name: f.function.clone(),
                    },
                    f.cc,
                )
            })
            .collect()
    };
    let a = index(before);
    let b = index(after);
    let mut diff = SnapshotDiff::default();
    for (key, &cc_b) in &b {
        match a.get(key) {
            None => diff.added.push(key.clone()),
            Some(&cc_a) if cc_a != cc_b => diff.changed.push(CcChange {
                key: key.clone(),
                before: cc_a,
                after: cc_b,
            }),
            Some(_) => {}
        }
    }
    diff.removed = a.keys().filter(|k| !b.contains_key(*k)).cloned().collect();
    diff
}

fn valid_label(label: &str) -> bool {
    !label.is_empty()
        && !label.starts_with('.')
        && label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_'))
}

struct LockGuard(PathBuf);

impl LockGuard {
    fn acquire(root: &Path) -> Result<Self, StoreError> {
        let path = root.join(LOCK);
        let started = Instant::now();
        loop {
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(_) => return Ok(LockGuard(path)),
                Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                    if started.elapsed() > LOCK_TIMEOUT {
                        return Err(StoreError::Locked(root.to_path_buf()));
                    }
                    std::thread::sleep(Duration::from_millis(10));
                }
                Err(e) => return Err(io_err(&path)(e)),
            }
        }
    }
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

/// A snapshot store rooted at a directory.
#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Store { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn snapshot_dir(&self, label: &str) -> PathBuf {
        self.root.join("snapshots").join(label)
    }

    fn read_index(&self) -> Result<Index, StoreError> {
        let path = self.root.join(INDEX);
        match fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes).map_err(|source| StoreError::Json {
                path: path.clone(),
                source,
            }),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Index::default()),
            Err(e) => Err(io_err(&path)(e)),
        }
    }

    fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), StoreError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|source| StoreError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        bytes.push(b'\n');
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
        fs::rename(&tmp, path).map_err(io_err(path))
    }

    /// Labels in the order they were saved.
    pub fn labels(&self) -> Result<Vec<String>, StoreError> {
        Ok(self
            .read_index()?
            .snapshots
            .into_iter()
            .map(|e| e.label)
            .collect())
    }

    /// Records metrics and trees for `files` under a new `label`.
    pub fn save(&self, label: &str, files: &[ParsedFile]) -> Result<Snapshot, StoreError> {
        if !valid_label(label) {
            return Err(StoreError::InvalidLabel(label.to_string()));
        }
        let report = unit_report(files)?;
        let mut names = BTreeSet::new();
        for f in files {
            let name = basename(&f.path);
            if !names.insert(name.clone()) {
                return Err(StoreError::DuplicateBasename(name));
            }
        }
        let mut keys: BTreeMap<String, &str> = BTreeMap::new();
        for f in &report.functions {
            if let Some(first) = keys.insert(f.key(), &f.path) {
                return Err(StoreError::DuplicateFunction {
                    key: f.key(),
                    first: first.to_string(),
                    second: f.path.clone(),
                });
            }
        }

        fs::create_dir_all(&self.root).map_err(io_err(&self.root))?;
        let _lock = LockGuard::acquire(&self.root)?;
        let mut index = self.read_index()?;
        if index.snapshots.iter().any(|e| e.label == label) {
            return Err(StoreError::DuplicateLabel(label.to_string()));
        }

        let dir = self.snapshot_dir(label);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let mut ordered: Vec<&ParsedFile> = files.iter().collect();
        ordered.sort_by(|a, b| a.path.cmp(&b.path));
        let mut tree_files = Vec::new();
        for f in ordered {
            let xml_name = format!("{}.ecst.xml", basename(&f.path));
            let xml_path = dir.join(&xml_name);
            fs::write(&xml_path, ecst_to_xml(&f.tree, f.lang)).map_err(io_err(&xml_path))?;
            tree_files.push(TreeFile {
                source: f.path.clone(),
                xml: xml_name,
            });
        }
        Self::write_json(&dir.join("metrics.json"), &report)?;

        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        index.snapshots.push(IndexEntry {
            label: label.to_string(),
            timestamp,
            tree_files: tree_files.clone(),
        });
        Self::write_json(&self.root.join(INDEX), &index)?;
        Ok(Snapshot {
            label: label.to_string(),
            timestamp,
            report,
            tree_files,
        })
    }

    pub fn load(&self, label: &str) -> Result<Snapshot, StoreError> {
        let entry = self
            .read_index()?
            .snapshots
            .into_iter()
            .find(|e| e.label == label)
            .ok_or_else(|| StoreError::UnknownLabel(label.to_string()))?;
        let path = self.snapshot_dir(label).join("metrics.json");
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        let report = serde_json::from_slice(&bytes).map_err(|source| StoreError::Json {
            path: path.clone(),
            source,
        })?;
        Ok(Snapshot {
            label: entry.label,
            timestamp: entry.timestamp,
            report,
            tree_files: entry.tree_files,
        })
    }

    /// Path of a stored tree file of snapshot `label`.
    pub fn tree_path(&self, label: &str, tree: &TreeFile) -> PathBuf {
        self.snapshot_dir(label).join(&tree.xml)
    }

    pub fn diff(&self, before: &str, after: &str) -> Result<SnapshotDiff, StoreError> {
        let a = self.load(before)?;
        let b = self.load(after)?;
        Ok(diff_reports(&a.report, &b.report))
    }
}

fn basename(path: &str) -> String {
    Path::new(path)
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string())
}

pub fn save_snapshot(
    store: &Path,
    label: &str,
    files: &[ParsedFile],
) -> Result<Snapshot, StoreError> {
    Store::new(store).save(label, files)
}

pub fn diff_snapshots(store: &Path, before: &str, after: &str) -> Result<SnapshotDiff, StoreError> {
    Store::new(store).diff(before, after)
}
