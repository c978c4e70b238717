//! Review session state: per-pair edit sets behind a revision counter, with an
//! append-only journal that is fsynced before a write is acknowledged.

mod http;

pub use http::{router, serve, CorrectionRequest, LabelOp, LabelRequest};

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::{prealign, AlignConfig, AlignError};
use crate::corpus::{load_corpus, Corpus, CorpusError, LoadedPair};
use crate::edits::{apply_corrections, Correction, EditGraphError};
use crate::model::{validate_edit_set, Edit, SCHEMA_VERSION};
use crate::similarity::EmbeddingProvider;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("pair {pair}: {source}")]
    Align { pair: String, source: AlignError },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}: corrupt journal entry: {message}")]
    Journal { path: String, line: usize, message: String },
}

/// Why a write was refused.
#[derive(Debug, Error)]
pub enum CommitError {
    #[error("unknown pair {0}")]
    UnknownPair(String),
    #[error("stale revision {expected}, current is {}", current.revision)]
    Stale { expected: u64, current: Arc<Snapshot> },
    #[error("{reason}")]
    Invalid { position: Option<usize>, reason: String },
    #[error("journal write failed: {0}")]
    Io(#[from] std::io::Error),
}

impl CommitError {
    fn invalid(reason: impl Into<String>) -> Self {
        CommitError::Invalid { position: None, reason: reason.into() }
    }
}

/// An immutable view of one pair's edit set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub revision: u64,
    pub edits: Vec<Edit>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JournalEntry {
    schema_version: u32,
    revision: u64,
    ops: Vec<Correction>,
}

/// One document pair under review.
pub struct PairSlot {
    pub data: Arc<LoadedPair>,
    current: RwLock<Arc<Snapshot>>,
    /// Serializes writers of this pair and owns its journal file.
    writer: Mutex<File>,
}

impl PairSlot {
    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.current.read().expect("snapshot lock").clone()
    }
}

/// All pairs of a served corpus.
pub struct Store {
    pairs: BTreeMap<String, PairSlot>,
    journal_dir: PathBuf,
    pub bins: usize,
}

/// Journal file name: the pair id made filesystem-safe, plus a hash so distinct ids
/// never share a file.
fn journal_name(pair_id: &str) -> String {
    let safe: String =
        pair_id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in pair_id.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
    }
    format!("{safe}-{h:016x}.jsonl")
}

fn replay(path: &Path, pair: &LoadedPair, base: Vec<Edit>) -> Result<Snapshot, ServiceError> {
    let mut snap = Snapshot { revision: 0, edits: base };
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(snap),
        Err(source) => return Err(ServiceError::Io { path: path.display().to_string(), source }),
    };
    let corrupt = |line: usize, message: String| ServiceError::Journal { path: path.display().to_string(), line, message };
    let complete = if text.ends_with('\n') { text.as_str() } else { &text[..text.rfind('\n').map_or(0, |k| k + 1)] };
    if complete.len() < text.len() {
        // a torn final line was never acknowledged
        tracing::warn!(path = %path.display(), "ignoring incomplete trailing journal line");
    }
    for (k, line) in complete.lines().enumerate() {
        let entry: JournalEntry = serde_json::from_str(line).map_err(|e| corrupt(k + 1, e.to_string()))?;
        if entry.revision != snap.revision + 1 {
            return Err(corrupt(k + 1, format!("revision {} follows {}", entry.revision, snap.revision)));
        }
        snap.edits = apply_corrections(&snap.edits, &entry.ops, &pair.old, &pair.new)
            .map_err(|e| corrupt(k + 1, e.to_string()))?;
        snap.revision = entry.revision;
    }
    if complete.len() < text.len() {
        fs::write(path, complete).map_err(|source| ServiceError::Io { path: path.display().to_string(), source })?;
    }
    Ok(snap)
}

impl Store {
    /// Open a loaded corpus. Pairs without an edit file start from the pre-alignment;
    /// existing journals are replayed on top.
    pub fn open(
        corpus: Corpus,
        journal_dir: &Path,
        config: &AlignConfig,
        embedder: &dyn EmbeddingProvider,
    ) -> Result<Self, ServiceError> {
        let io = |source| ServiceError::Io { path: journal_dir.display().to_string(), source };
        fs::create_dir_all(journal_dir).map_err(io)?;
        let mut pairs = BTreeMap::new();
        for pair in corpus.pairs {
            let base = if pair.annotated {
                pair.edits.clone()
            } else {
                prealign(&pair.old, &pair.new, config, embedder)
                    .map_err(|source| ServiceError::Align { pair: pair.pair_id.clone(), source })?
            };
            let path = journal_dir.join(journal_name(&pair.pair_id));
            let snap = replay(&path, &pair, base)?;
            let file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&path)
                .map_err(|source| ServiceError::Io { path: path.display().to_string(), source })?;
            tracing::info!(pair = %pair.pair_id, revision = snap.revision, edits = snap.edits.len(), "pair ready");
            pairs.insert(
                pair.pair_id.clone(),
                PairSlot { data: Arc::new(pair), current: RwLock::new(Arc::new(snap)), writer: Mutex::new(file) },
            );
        }
        Ok(Store { pairs, journal_dir: journal_dir.to_path_buf(), bins: 10 })
    }

    pub fn open_manifest(
        manifest: &Path,
        journal_dir: &Path,
        config: &AlignConfig,
        embedder: &dyn EmbeddingProvider,
    ) -> Result<Self, ServiceError> {
        Self::open(load_corpus(manifest)?, journal_dir, config, embedder)
    }

    pub fn journal_dir(&self) -> &Path {
        &self.journal_dir
    }

    pub fn pair_ids(&self) -> impl Iterator<Item = &str> {
        self.pairs.keys().map(String::as_str)
    }

    pub fn pair(&self, id: &str) -> Option<&PairSlot> {
        self.pairs.get(id)
    }

    /// Apply a correction batch if `expected_revision` is current.
    pub fn commit(&self, id: &str, expected_revision: u64, ops: Vec<Correction>) -> Result<Arc<Snapshot>, CommitError> {
        self.commit_with(id, expected_revision, |_| Ok(ops))
    }

    /// Like [`Store::commit`], but the batch is built from the current snapshot while the
    /// pair's write lock is held.
    pub fn commit_with(
        &self,
        id: &str,
        expected_revision: u64,
        build: impl FnOnce(&Snapshot) -> Result<Vec<Correction>, CommitError>,
    ) -> Result<Arc<Snapshot>, CommitError> {
        let slot = self.pairs.get(id).ok_or_else(|| CommitError::UnknownPair(id.to_string()))?;
        let mut journal = slot.writer.lock().unwrap_or_else(|e| e.into_inner());
        let current = slot.snapshot();
        if current.revision != expected_revision {
            return Err(CommitError::Stale { expected: expected_revision, current });
        }
        let ops = build(&current)?;
        if ops.is_empty() {
            return Err(CommitError::invalid("empty correction batch"));
        }
        let pair = &slot.data;
        let edits = apply_corrections(&current.edits, &ops, &pair.old, &pair.new).map_err(|e| match e {
            EditGraphError::Correction { position, reason } => CommitError::Invalid { position: Some(position), reason },
            other => CommitError::invalid(other.to_string()),
        })?;
        if let Some((edit, v)) = validate_edit_set(&edits, &pair.old, &pair.new).into_iter().next() {
            return Err(CommitError::invalid(format!("edit {edit}: {v}")));
        }
        let revision = current.revision + 1;
        let entry = JournalEntry { schema_version: SCHEMA_VERSION, revision, ops };
        let mut line = serde_json::to_vec(&entry).expect("journal entries serialize");
        line.push(b'\n');
        journal.write_all(&line)?;
        journal.sync_data()?;
        let next = Arc::new(Snapshot { revision, edits });
        *slot.current.write().expect("snapshot lock") = next.clone();
        Ok(next)
    }
}
