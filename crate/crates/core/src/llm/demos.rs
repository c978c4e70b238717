//! In-context demonstration selection: dynamic retrieval from a labeled pool (cat, diff,
//! loc) and the static default sets.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::prompt::{Example, TaskKind};
use crate::similarity::{cosine, EmbedError, EmbeddingProvider};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DemoMethod {
    /// Similarity of concatenated new and old sentence embeddings.
    Cat,
    /// Similarity of the new-minus-old embedding difference.
    Diff,
    /// Similarity of concatenated section-title embeddings.
    Loc,
    /// Static default examples only.
    Def,
}

impl std::str::FromStr for DemoMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cat" => Ok(DemoMethod::Cat),
            "diff" => Ok(DemoMethod::Diff),
            "loc" => Ok(DemoMethod::Loc),
            "def" => Ok(DemoMethod::Def),
            _ => Err(format!("unknown demo method `{s}` (expected cat, diff, loc or def)")),
        }
    }
}

/// Relative placement of static defaults and dynamically selected demonstrations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemoOrdering {
    #[default]
    DefThenDyn,
    DynThenDef,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemoSelector {
    pub method: DemoMethod,
    /// Number of dynamically selected demonstrations (ignored for `Def`).
    pub n: usize,
    /// Also include the static defaults next to the dynamic ones.
    pub with_defaults: bool,
    pub ordering: DemoOrdering,
}

impl DemoSelector {
    pub fn def() -> Self {
        DemoSelector { method: DemoMethod::Def, n: 0, with_defaults: true, ordering: DemoOrdering::DefThenDyn }
    }

    pub fn dynamic(method: DemoMethod, n: usize) -> Self {
        DemoSelector { method, n, with_defaults: false, ordering: DemoOrdering::DefThenDyn }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DemoError {
    #[error("dynamic demonstration selection needs a non-empty pool")]
    EmptyPool,
    #[error("pool item {0} has no gold label")]
    Unlabeled(String),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error("cannot read demonstration file {path}: {reason}")]
    File { path: String, reason: String },
}

/// The selected demonstrations, in prompt order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub demos: Vec<Example>,
    /// The diff vector of the test item was zero, so `cat` was used instead.
    pub fell_back_to_cat: bool,
}

/// Embedding keys of one example for each dynamic method.
#[derive(Debug, Clone)]
struct Keys {
    cat: Vec<f64>,
    diff: Vec<f64>,
    loc: Vec<f64>,
}

fn side(embedder: &dyn EmbeddingProvider, text: &Option<String>) -> Result<Option<Vec<f64>>, EmbedError> {
    match text.as_deref().filter(|t| !t.is_empty()) {
        Some(t) => embedder.embed(t).map(Some),
        None => Ok(None),
    }
}

fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().chain(b).copied().collect()
}

/// Pair keys; a single available embedding `e` stands in for both sides, so single
/// sentence items compare by `e` alone and remain comparable with pairs.
fn pair_keys(new: Option<Vec<f64>>, old: Option<Vec<f64>>, dim: usize) -> (Vec<f64>, Vec<f64>) {
    match (new, old) {
        (Some(n), Some(o)) => {
            let diff = n.iter().zip(&o).map(|(a, b)| a - b).collect();
            (concat(&n, &o), diff)
        }
        (Some(e), None) | (None, Some(e)) => (concat(&e, &e), e),
        (None, None) => (vec![0.0; 2 * dim], vec![0.0; dim]),
    }
}

fn keys(ex: &Example, embedder: &dyn EmbeddingProvider) -> Result<Keys, EmbedError> {
    let dim = embedder.dimension();
    let (cat, diff) = pair_keys(side(embedder, &ex.new)?, side(embedder, &ex.old)?, dim);
    let (loc, _) = pair_keys(side(embedder, &ex.new_section)?, side(embedder, &ex.old_section)?, dim);
    Ok(Keys { cat, diff, loc })
}

/// A labeled pool with precomputed embedding keys.
pub struct DemoIndex {
    pool: Vec<Example>,
    keys: Vec<Keys>,
}

impl DemoIndex {
    pub fn new(pool: Vec<Example>, embedder: &dyn EmbeddingProvider) -> Result<Self, DemoError> {
        if let Some(e) = pool.iter().find(|e| e.label.is_none()) {
            return Err(DemoError::Unlabeled(e.id.clone()));
        }
        let keys = pool.iter().map(|e| keys(e, embedder)).collect::<Result<_, _>>()?;
        Ok(DemoIndex { pool, keys })
    }

    pub fn pool(&self) -> &[Example] {
        &self.pool
    }

    pub fn len(&self) -> usize {
        self.pool.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pool.is_empty()
    }

    /// Pool indices ranked by cosine to `item` under `method`, ties by pool index.
    /// Returns the ranking and whether a zero diff vector forced the `cat` fallback.
    pub fn rank(
        &self,
        item: &Example,
        method: DemoMethod,
        embedder: &dyn EmbeddingProvider,
    ) -> Result<(Vec<(usize, f64)>, bool), DemoError> {
        let k = keys(item, embedder)?;
        let mut method = method;
        let mut fell_back = false;
        if method == DemoMethod::Diff && k.diff.iter().all(|&x| x == 0.0) {
            method = DemoMethod::Cat;
            fell_back = true;
        }
        let pick = |keys: &Keys| -> Vec<f64> {
            match method {
                DemoMethod::Cat | DemoMethod::Def => keys.cat.clone(),
                DemoMethod::Diff => keys.diff.clone(),
                DemoMethod::Loc => keys.loc.clone(),
            }
        };
        let q = pick(&k);
        let mut scored: Vec<(usize, f64)> =
            self.keys.iter().enumerate().map(|(i, pk)| (i, cosine(&q, &pick(pk)))).collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok((scored, fell_back))
    }
}

/// Choose demonstrations for one test item.
pub fn select_demos(
    selector: &DemoSelector,
    item: &Example,
    index: Option<&DemoIndex>,
    defaults: &[Example],
    embedder: &dyn EmbeddingProvider,
) -> Result<Selection, DemoError> {
    if selector.method == DemoMethod::Def {
        return Ok(Selection { demos: defaults.to_vec(), fell_back_to_cat: false });
    }
    let mut dynamic = Vec::new();
    let mut fell_back_to_cat = false;
    if selector.n > 0 {
        let index = index.filter(|i| !i.is_empty()).ok_or(DemoError::EmptyPool)?;
        let (ranked, fb) = index.rank(item, selector.method, embedder)?;
        fell_back_to_cat = fb;
        dynamic.extend(ranked.into_iter().take(selector.n).map(|(i, _)| index.pool[i].clone()));
    }
    let demos = match (selector.with_defaults, selector.ordering) {
        (false, _) => dynamic,
        (true, DemoOrdering::DefThenDyn) => defaults.iter().cloned().chain(dynamic).collect(),
        (true, DemoOrdering::DynThenDef) => dynamic.into_iter().chain(defaults.iter().cloned()).collect(),
    };
    Ok(Selection { demos, fell_back_to_cat })
}

/// The static default demonstrations shipped for each task.
pub fn default_demos(task: TaskKind) -> Vec<Example> {
    let raw = match task {
        TaskKind::Intent => include_str!("../../data/demos/intent.json"),
        TaskKind::IntentAddDelete => include_str!("../../data/demos/intent_add_delete.json"),
        TaskKind::Alignment => include_str!("../../data/demos/alignment.json"),
        TaskKind::Request => include_str!("../../data/demos/request.json"),
    };
    serde_json::from_str(raw).expect("bundled demonstrations are valid")
}

/// Load a demonstration file (JSON array of examples), e.g. a custom default set.
pub fn load_demos(path: &Path) -> Result<Vec<Example>, DemoError> {
    let err = |reason: String| DemoError::File { path: path.display().to_string(), reason };
    let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    let demos: Vec<Example> = serde_json::from_str(&text).map_err(|e| err(e.to_string()))?;
    if let Some(d) = demos.iter().find(|d| d.label.is_none()) {
        return Err(err(format!("example {} has no label", d.id)));
    }
    Ok(demos)
}
