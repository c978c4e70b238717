//! Corpus manifests, document/edit/annotation files, and the experimental datasets built
//! from them (intent, alignment and review-request), with document-level splits.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::generate_alignment_negatives;
use crate::llm::Example;
use crate::model::{
    validate_edit_set, CrossLink, DocumentGraph, DocumentRecord, Edit, EditAction, Granularity, ModelError,
    RequestKind, ReviewRequest, SCHEMA_VERSION,
};
use crate::segment::{segment_paragraph, RuleSegmenter, SegmentError, Segmenter};
use crate::similarity::{EmbedError, EmbeddingProvider};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("{path}: {source}")]
    Model { path: String, source: ModelError },
    #[error("{path}: {source}")]
    Segment { path: String, source: SegmentError },
    #[error("{path}:{line}: edit {edit}: {violation}")]
    Violation { path: String, line: usize, edit: String, violation: String },
    #[error("{path}: unsupported schema_version {found} (expected {SCHEMA_VERSION})")]
    SchemaVersion { path: String, found: u32 },
    #[error("duplicate pair id {0}")]
    DuplicatePair(String),
    #[error("not enough negatives: need {needed}, only {available} non-request sentences available")]
    NotEnoughNegatives { needed: usize, available: usize },
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io { path: path.display().to_string(), source }
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub pair_id: String,
    pub old_path: PathBuf,
    pub new_path: PathBuf,
    #[serde(default)]
    pub review_paths: Vec<PathBuf>,
    #[serde(default)]
    pub response_path: Option<PathBuf>,
    /// Edit JSONL; absent for pairs that have not been aligned yet.
    #[serde(default)]
    pub annotation_path: Option<PathBuf>,
    /// Review request labels, JSONL of `{sentence_id, kind}`.
    #[serde(default)]
    pub requests_path: Option<PathBuf>,
    /// Review/response cross links, JSONL of `{kind, edit_id, sentence_id}`.
    #[serde(default)]
    pub links_path: Option<PathBuf>,
    /// Independent annotator labels, JSONL of `{item, labels: [label|null, ...]}`.
    #[serde(default)]
    pub annotator_labels_path: Option<PathBuf>,
}

impl ManifestEntry {
    pub fn new(pair_id: impl Into<String>, old_path: impl Into<PathBuf>, new_path: impl Into<PathBuf>) -> Self {
        ManifestEntry {
            pair_id: pair_id.into(),
            old_path: old_path.into(),
            new_path: new_path.into(),
            review_paths: Vec::new(),
            response_path: None,
            annotation_path: None,
            requests_path: None,
            links_path: None,
            annotator_labels_path: None,
        }
    }
}

/// Corpus index. Relative paths resolve against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    pub entries: Vec<ManifestEntry>,
}

impl CorpusManifest {
    pub fn load(path: &Path) -> Result<(Self, PathBuf), CorpusError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let m: CorpusManifest = serde_json::from_str(&text).map_err(|e| parse_err(path, e.line(), e))?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(CorpusError::SchemaVersion { path: path.display().to_string(), found: m.schema_version });
        }
        let mut seen = BTreeSet::new();
        for e in &m.entries {
            if !seen.insert(&e.pair_id) {
                return Err(CorpusError::DuplicatePair(e.pair_id.clone()));
            }
        }
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((m, base))
    }
}

fn parse_err(path: &Path, line: usize, e: impl std::fmt::Display) -> CorpusError {
    CorpusError::Parse { path: path.display().to_string(), line, message: e.to_string() }
}

/// Read a document, segmenting any unprotected paragraph that has no sentences yet.
pub fn load_document(path: &Path) -> Result<DocumentGraph, CorpusError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let record: DocumentRecord = serde_json::from_str(&text).map_err(|e| parse_err(path, e.line(), e))?;
    if record.schema_version != SCHEMA_VERSION {
        return Err(CorpusError::SchemaVersion { path: path.display().to_string(), found: record.schema_version });
    }
    let model = |source| CorpusError::Model { path: path.display().to_string(), source };
    let graph = DocumentGraph::build(&record).map_err(model)?;
    if graph.is_segmented() {
        return Ok(graph);
    }
    let seg = RuleSegmenter::default();
    let segs: [&dyn Segmenter; 1] = [&seg];
    let mut sentences = HashMap::new();
    for p in graph.paragraphs().filter(|p| !p.protected && graph.children(&p.id).is_empty()) {
        let spans = segment_paragraph(&p.text, &segs)
            .map_err(|source| CorpusError::Segment { path: path.display().to_string(), source })?;
        sentences.insert(p.id.clone(), spans.into_iter().map(|s| p.text[s].to_string()).collect());
    }
    graph.with_sentences(&sentences).map_err(model)
}

pub fn save_document(path: &Path, graph: &DocumentGraph) -> Result<(), CorpusError> {
    let json = serde_json::to_string_pretty(graph).expect("documents serialize");
    fs::write(path, json + "\n").map_err(io_err(path))
}

#[derive(Serialize, Deserialize)]
struct Versioned<T> {
    #[serde(default = "default_schema")]
    schema_version: u32,
    #[serde(flatten)]
    body: T,
}

/// Read a JSONL file where every line carries an optional `schema_version`.
/// Returns each record with its 1-based line number.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>, CorpusError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: Versioned<T> = serde_json::from_str(line).map_err(|e| parse_err(path, k + 1, e))?;
        if v.schema_version != SCHEMA_VERSION {
            return Err(CorpusError::SchemaVersion { path: path.display().to_string(), found: v.schema_version });
        }
        out.push((k + 1, v.body));
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), CorpusError> {
    let mut buf = Vec::new();
    for body in items {
        let line = serde_json::to_string(&Versioned { schema_version: SCHEMA_VERSION, body }).expect("serializes");
        writeln!(buf, "{line}").expect("in-memory write");
    }
    fs::write(path, buf).map_err(io_err(path))
}

/// Read an edit file and validate it against both document versions.
pub fn load_edits(path: &Path, old: &DocumentGraph, new: &DocumentGraph) -> Result<Vec<Edit>, CorpusError> {
    let rows: Vec<(usize, Edit)> = read_jsonl(path)?;
    let line_of: HashMap<&str, usize> = rows.iter().map(|(l, e)| (e.id.as_str(), *l)).collect();
    let edits: Vec<Edit> = rows.iter().map(|(_, e)| e.clone()).collect();
    if let Some((id, v)) = validate_edit_set(&edits, old, new).into_iter().next() {
        return Err(CorpusError::Violation {
            path: path.display().to_string(),
            line: line_of.get(id.as_str()).copied().unwrap_or(0),
            edit: id,
            violation: v.to_string(),
        });
    }
    Ok(edits)
}

pub fn save_edits(path: &Path, edits: &[Edit]) -> Result<(), CorpusError> {
    write_jsonl(path, edits)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatorLabels {
    pub item: String,
    pub labels: Vec<Option<String>>,
}

/// One document pair with everything the manifest lists for it.
#[derive(Debug, Clone)]
pub struct LoadedPair {
    pub pair_id: String,
    pub old: DocumentGraph,
    pub new: DocumentGraph,
    pub reviews: Vec<DocumentGraph>,
    pub response: Option<DocumentGraph>,
    /// Whether the manifest lists an edit file; unannotated pairs get pre-aligned on demand.
    pub annotated: bool,
    pub edits: Vec<Edit>,
    pub requests: Vec<ReviewRequest>,
    pub links: Vec<CrossLink>,
    pub annotator_labels: Vec<AnnotatorLabels>,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() { p.to_path_buf() } else { base.join(p) }
}

fn optional_rows<T: DeserializeOwned>(base: &Path, p: &Option<PathBuf>) -> Result<Vec<T>, CorpusError> {
    Ok(match p {
        Some(p) => read_jsonl(&resolve(base, p))?.into_iter().map(|(_, x)| x).collect(),
        None => Vec::new(),
    })
}

pub fn load_pair(base: &Path, entry: &ManifestEntry) -> Result<LoadedPair, CorpusError> {
    let old = load_document(&resolve(base, &entry.old_path))?;
    let new = load_document(&resolve(base, &entry.new_path))?;
    let reviews = entry.review_paths.iter().map(|p| load_document(&resolve(base, p))).collect::<Result<_, _>>()?;
    let response = entry.response_path.as_ref().map(|p| load_document(&resolve(base, p))).transpose()?;
    let edits = match &entry.annotation_path {
        Some(p) => load_edits(&resolve(base, p), &old, &new)?,
        None => Vec::new(),
    };
    let requests: Vec<ReviewRequest> = optional_rows(base, &entry.requests_path)?;
    let links: Vec<CrossLink> = optional_rows(base, &entry.links_path)?;
    let annotator_labels: Vec<AnnotatorLabels> = optional_rows(base, &entry.annotator_labels_path)?;
    Ok(LoadedPair {
        pair_id: entry.pair_id.clone(),
        old,
        new,
        reviews,
        response,
        annotated: entry.annotation_path.is_some(),
        edits, requests, links, annotator_labels })
}

/// A loaded corpus in manifest order.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub seed: u64,
    pub pairs: Vec<LoadedPair>,
}

pub fn load_corpus(manifest_path: &Path) -> Result<Corpus, CorpusError> {
    let (m, base) = CorpusManifest::load(manifest_path)?;
    let pairs = m.entries.par_iter().map(|e| load_pair(&base, e)).collect::<Result<_, _>>()?;
    Ok(Corpus { seed: m.seed, pairs })
}

/// Document-level split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Split {
    pub train: Vec<String>,
    pub test: Vec<String>,
    pub warnings: Vec<String>,
}

pub const TRAIN_FRACTION: f64 = 0.2;

/// Shuffle document ids under `seed`; the first ⌊20%⌋ train, the rest test.
pub fn split_documents(ids: &[String], seed: u64) -> Split {
    let mut sorted: Vec<String> = ids.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    sorted.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (sorted.len() as f64 * TRAIN_FRACTION).floor() as usize;
    let mut test = sorted.split_off(n_train);
    let mut train = sorted;
    train.sort();
    test.sort();
    let mut warnings = Vec::new();
    if train.is_empty() && !test.is_empty() {
        warnings.push(format!("{} document(s): training split is empty", test.len()));
    }
    Split { train, test, warnings }
}

/// Train/test examples plus the document split behind them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset<T> {
    pub split: Split,
    pub train: Vec<T>,
    pub test: Vec<T>,
}

fn partition<T>(split: Split, items: Vec<(String, T)>) -> Dataset<T> {
    let train_docs: BTreeSet<&String> = split.train.iter().collect();
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (doc, item) in items {
        if train_docs.contains(&doc) { train.push(item) } else { test.push(item) }
    }
    Dataset { split, train, test }
}

fn texts_of(g: &DocumentGraph, ids: &BTreeSet<String>) -> Option<String> {
    let t: Vec<&str> = ids.iter().filter_map(|id| g.node(id)).map(|n| n.text.as_str()).collect();
    (!t.is_empty()).then(|| t.join(" "))
}

/// Intent classification items: one per labeled 1-to-1 revision pair, addition or deletion.
pub fn intent_examples(pair: &LoadedPair) -> Vec<Example> {
    pair.edits
        .iter()
        .filter(|e| e.granularity == Granularity::Sentence && e.intents.len() == 1)
        .filter(|e| matches!(e.action, EditAction::Add | EditAction::Delete | EditAction::Modify))
        .map(|e| {
            let section = |g: &DocumentGraph, ids: &BTreeSet<String>| {
                ids.iter().next().and_then(|id| g.section_title(id)).map(str::to_string)
            };
            Example {
                id: format!("{}/{}", pair.pair_id, e.id),
                old: texts_of(&pair.old, &e.old_nodes),
                new: texts_of(&pair.new, &e.new_nodes),
                old_section: section(&pair.old, &e.old_nodes),
                new_section: section(&pair.new, &e.new_nodes),
                label: e.intents.iter().next().map(|i| i.label().to_string()),
                reason: None,
            }
        })
        .collect()
}

pub fn split_intent_dataset(corpus: &Corpus, seed: u64) -> Dataset<Example> {
    let ids: Vec<String> = corpus.pairs.iter().map(|p| p.pair_id.clone()).collect();
    let items = corpus.pairs.iter().flat_map(|p| intent_examples(p).into_iter().map(|x| (p.pair_id.clone(), x))).collect();
    partition(split_documents(&ids, seed), items)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentSample {
    pub pair_id: String,
    pub new_id: String,
    pub old_id: String,
    pub new: String,
    pub old: String,
    pub is_pair: bool,
}

impl AlignmentSample {
    /// As a yes/no classification item.
    pub fn to_example(&self) -> Example {
        Example::pair(format!("{}/{}~{}", self.pair_id, self.new_id, self.old_id), &self.old, &self.new)
            .labeled(if self.is_pair { "yes" } else { "no" }, None)
    }
}

/// Positives are all 1-to-1 revision pairs; each gets one hard negative.
pub fn build_alignment_dataset(
    corpus: &Corpus,
    embedder: &dyn EmbeddingProvider,
    seed: u64,
) -> Result<Dataset<AlignmentSample>, CorpusError> {
    let mut items = Vec::new();
    for p in &corpus.pairs {
        let sample = |n: &str, o: &str, is_pair| AlignmentSample {
            pair_id: p.pair_id.clone(),
            new_id: n.to_string(),
            old_id: o.to_string(),
            new: p.new.node(n).map(|x| x.text.clone()).unwrap_or_default(),
            old: p.old.node(o).map(|x| x.text.clone()).unwrap_or_default(),
            is_pair,
        };
        for e in p.edits.iter().filter(|e| {
            e.granularity == Granularity::Sentence && e.action == EditAction::Modify && e.new_nodes.len() == 1
        }) {
            for (n, o) in e.links() {
                items.push((p.pair_id.clone(), sample(&n, &o, true)));
            }
        }
        for (n, o) in generate_alignment_negatives(&p.edits, &p.old, &p.new, embedder)? {
            items.push((p.pair_id.clone(), sample(&n, &o, false)));
        }
    }
    let ids: Vec<String> = corpus.pairs.iter().map(|p| p.pair_id.clone()).collect();
    Ok(partition(split_documents(&ids, seed), items))
}

/// Default negatives-to-positives ratio for review-request extraction.
pub const REQUEST_NEGATIVE_RATIO: f64 = 440.0 / 560.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestSample {
    pub pair_id: String,
    pub sentence_id: String,
    pub text: String,
    pub kind: Option<RequestKind>,
    pub is_request: bool,
}

impl RequestSample {
    /// As a yes/no classification item; the review sentence goes in `new`.
    pub fn to_example(&self) -> Example {
        Example {
            id: format!("{}/{}", self.pair_id, self.sentence_id),
            new: Some(self.text.clone()),
            label: Some(if self.is_request { "yes" } else { "no" }.to_string()),
            ..Example::default()
        }
    }
}

/// Request sentences as positives plus ⌊ratio · positives⌋ negatives drawn uniformly
/// (seeded) from the other sentences of the same review documents.
pub fn build_request_dataset(corpus: &Corpus, ratio: f64, seed: u64) -> Result<Dataset<RequestSample>, CorpusError> {
    let mut positives = Vec::new();
    let mut pool = Vec::new();
    for p in &corpus.pairs {
        let kinds: BTreeMap<&str, RequestKind> =
            p.requests.iter().map(|r| (r.sentence_id.as_str(), r.kind)).collect();
        for review in &p.reviews {
            for s in review.sentences() {
                let kind = kinds.get(s.id.as_str()).copied();
                let sample = RequestSample {
                    pair_id: p.pair_id.clone(),
                    sentence_id: s.id.clone(),
                    text: s.text.clone(),
                    kind,
                    is_request: kind.is_some_and(|k| k != RequestKind::NonRequest),
                };
                if sample.is_request { positives.push(sample) } else { pool.push(sample) }
            }
        }
    }
    let needed = (positives.len() as f64 * ratio).floor() as usize;
    if needed > pool.len() {
        return Err(CorpusError::NotEnoughNegatives { needed, available: pool.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = index::sample(&mut rng, pool.len(), needed).into_vec();
    chosen.sort_unstable();
    let items = positives
        .into_iter()
        .chain(chosen.into_iter().map(|k| pool[k].clone()))
        .map(|s| (s.pair_id.clone(), s))
        .collect();
    let ids: Vec<String> = corpus.pairs.iter().map(|p| p.pair_id.clone()).collect();
    Ok(partition(split_documents(&ids, seed), items))
}

/// Item × annotator label matrix for agreement computation, across the corpus.
pub fn annotator_matrix(corpus: &Corpus) -> Vec<Vec<Option<String>>> {
    corpus.pairs.iter().flat_map(|p| p.annotator_labels.iter().map(|a| a.labels.clone())).collect()
}
