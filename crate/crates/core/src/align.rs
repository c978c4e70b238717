//! Sentence pre-alignment between two document versions, the LLM-verified second stage,
//! and hard-negative mining for alignment datasets.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::edits::{edit_from_component, sort_edits, EditGraphError};
use crate::model::{
    collapse_whitespace, DocVersion, DocumentGraph, Edit, EditAction, Granularity, Provenance,
};
use crate::similarity::{
    levenshtein_chars, ratio_from_distance, sem_score, token_sort_key, EmbedError,
    EmbeddingProvider, Measure,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlignError {
    #[error("invalid alignment config: {0}")]
    InvalidConfig(String),
    #[error("{0} document is not segmented into sentences")]
    Unsegmented(DocVersion),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Edit(#[from] EditGraphError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignConfig {
    /// Floor every measure must exceed.
    pub t0: f64,
    /// Bar at least one measure must exceed.
    pub t1: f64,
    pub measures: Vec<Measure>,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig { t0: 40.0, t1: 85.0, measures: vec![Measure::Lev, Measure::Fuzzy, Measure::Sem] }
    }
}

impl AlignConfig {
    pub fn validate(&self) -> Result<(), AlignError> {
        let (t0, t1) = (self.t0, self.t1);
        if !(0.0 < t0 && t0 < t1 && t1 < 100.0) {
            return Err(AlignError::InvalidConfig(format!("need 0 < t0 < t1 < 100, got t0={t0}, t1={t1}")));
        }
        if self.measures.is_empty() {
            return Err(AlignError::InvalidConfig("no similarity measures".into()));
        }
        let distinct: BTreeSet<&str> = self.measures.iter().map(|m| m.name()).collect();
        if distinct.len() != self.measures.len() {
            return Err(AlignError::InvalidConfig("duplicate similarity measure".into()));
        }
        Ok(())
    }
}

/// A sentence that survived identical-pair removal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualSentence {
    pub id: String,
    pub text: String,
    /// Linear index of the containing paragraph.
    pub paragraph: usize,
}

/// Scores `[measure][new][old]` over residual sentences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityTensor {
    pub measures: Vec<Measure>,
    pub rows: usize,
    pub cols: usize,
    scores: Vec<f64>,
}

impl SimilarityTensor {
    pub fn zeros(measures: Vec<Measure>, rows: usize, cols: usize) -> Self {
        let n = measures.len() * rows * cols;
        SimilarityTensor { measures, rows, cols, scores: vec![0.0; n] }
    }

    fn offset(&self, m: usize, i: usize, j: usize) -> usize {
        (m * self.rows + i) * self.cols + j
    }

    pub fn get(&self, m: usize, i: usize, j: usize) -> f64 {
        self.scores[self.offset(m, i, j)]
    }

    pub fn set(&mut self, m: usize, i: usize, j: usize, v: f64) {
        let o = self.offset(m, i, j);
        self.scores[o] = v;
    }

    /// True when pair `(i, j)` clears `t0` on every measure.
    pub fn above_floor(&self, i: usize, j: usize, t0: f64) -> bool {
        (0..self.measures.len()).all(|m| self.get(m, i, j) > t0)
    }
}

/// Everything prealign computed, for inspection and the second alignment stage.
#[derive(Debug, Clone, Serialize)]
pub struct Prealignment {
    pub edits: Vec<Edit>,
    pub new_residual: Vec<ResidualSentence>,
    pub old_residual: Vec<ResidualSentence>,
    pub tensor: SimilarityTensor,
    /// Chosen old residual index per new residual sentence (None = Add).
    pub choice: Vec<Option<usize>>,
}

/// `|p_i / #P_new − p_j / #P_old|` over linear paragraph indices.
pub fn location_distance(p_new: usize, n_new: usize, p_old: usize, n_old: usize) -> f64 {
    (p_new as f64 / n_new as f64 - p_old as f64 / n_old as f64).abs()
}

fn sentence_list(g: &DocumentGraph) -> Vec<ResidualSentence> {
    g.sentences()
        .map(|s| ResidualSentence {
            id: s.id.clone(),
            text: s.text.clone(),
            paragraph: g
                .container(&s.id, Granularity::Paragraph)
                .and_then(|p| g.paragraph_index(&p.id))
                .expect("sentence has a paragraph"),
        })
        .collect()
}

/// Step 1: drop identical paragraph pairs, then identical sentence pairs, both matched
/// greedily in document order on whitespace-collapsed text.
pub fn residual_sentences(
    old: &DocumentGraph,
    new: &DocumentGraph,
) -> (Vec<ResidualSentence>, Vec<ResidualSentence>) {
    let mut old_paras: Vec<Option<String>> =
        old.paragraphs().map(|p| Some(collapse_whitespace(&p.text))).collect();
    let mut dropped_new = BTreeSet::new();
    let mut dropped_old = BTreeSet::new();
    for (pi, p) in new.paragraphs().enumerate() {
        let t = collapse_whitespace(&p.text);
        if let Some(k) = old_paras.iter().position(|o| o.as_deref() == Some(t.as_str())) {
            old_paras[k] = None;
            dropped_new.insert(pi);
            dropped_old.insert(k);
        }
    }
    let new_s: Vec<ResidualSentence> =
        sentence_list(new).into_iter().filter(|s| !dropped_new.contains(&s.paragraph)).collect();
    let mut old_s: Vec<Option<ResidualSentence>> = sentence_list(old)
        .into_iter()
        .filter(|s| !dropped_old.contains(&s.paragraph))
        .map(Some)
        .collect();
    let old_keys: Vec<String> = old_s.iter().map(|s| collapse_whitespace(&s.as_ref().unwrap().text)).collect();
    let mut new_out = Vec::new();
    for s in new_s {
        let t = collapse_whitespace(&s.text);
        match (0..old_s.len()).find(|&k| old_s[k].is_some() && old_keys[k] == t) {
            Some(k) => old_s[k] = None,
            None => new_out.push(s),
        }
    }
    (new_out, old_s.into_iter().flatten().collect())
}

/// Per-sentence precomputation shared by all pairs.
struct Prepared {
    chars: Vec<char>,
    sorted: Vec<char>,
    emb: Option<Vec<f64>>,
}

fn prepare(
    sents: &[ResidualSentence],
    need_sem: bool,
    embedder: &dyn EmbeddingProvider,
) -> Result<Vec<Prepared>, EmbedError> {
    sents
        .par_iter()
        .map(|s| {
            Ok(Prepared {
                chars: s.text.chars().collect(),
                sorted: token_sort_key(&s.text).chars().collect(),
                emb: if need_sem { Some(embedder.embed(&s.text)?) } else { None },
            })
        })
        .collect()
}

/// Step 2: the similarity tensor over residual sentences, computed in parallel rows.
pub fn similarity_tensor(
    new_res: &[ResidualSentence],
    old_res: &[ResidualSentence],
    measures: &[Measure],
    embedder: &dyn EmbeddingProvider,
) -> Result<SimilarityTensor, EmbedError> {
    let need_sem = measures.contains(&Measure::Sem);
    let np = prepare(new_res, need_sem, embedder)?;
    let op = prepare(old_res, need_sem, embedder)?;
    let (k, l) = (new_res.len(), old_res.len());
    let mut t = SimilarityTensor::zeros(measures.to_vec(), k, l);
    let rows: Vec<Vec<f64>> = (0..k)
        .into_par_iter()
        .map(|i| {
            let mut scratch = Vec::new();
            let mut row = vec![0.0; measures.len() * l];
            for j in 0..l {
                let (a, b) = (&np[i], &op[j]);
                for (m, measure) in measures.iter().enumerate() {
                    row[m * l + j] = match measure {
                        Measure::Lev => ratio_from_distance(
                            levenshtein_chars(&a.chars, &b.chars, &mut scratch),
                            a.chars.len(),
                            b.chars.len(),
                        ),
                        Measure::Fuzzy => ratio_from_distance(
                            levenshtein_chars(&a.sorted, &b.sorted, &mut scratch),
                            a.sorted.len(),
                            b.sorted.len(),
                        ),
                        Measure::Sem if new_res[i].text == old_res[j].text => 100.0,
                        Measure::Sem => sem_score(
                            a.emb.as_deref().expect("embedding"),
                            b.emb.as_deref().expect("embedding"),
                        ),
                    };
                }
            }
            row
        })
        .collect();
    for (i, row) in rows.into_iter().enumerate() {
        for m in 0..measures.len() {
            for j in 0..l {
                t.set(m, i, j, row[m * l + j]);
            }
        }
    }
    Ok(t)
}

/// Steps 3 and 4 for one new sentence: candidates per measure, most frequent candidate,
/// location distance on ties. Returns the chosen old residual index.
fn choose(
    t: &SimilarityTensor,
    i: usize,
    cfg: &AlignConfig,
    new_res: &[ResidualSentence],
    old_res: &[ResidualSentence],
    n_new: usize,
    n_old: usize,
) -> Option<usize> {
    if t.cols == 0 {
        return None;
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for m in 0..t.measures.len() {
        let max = (0..t.cols).map(|j| t.get(m, i, j)).fold(f64::NEG_INFINITY, f64::max);
        if max <= cfg.t1 {
            continue;
        }
        // every j attaining the maximum is a candidate for this measure
        for j in (0..t.cols).filter(|&j| t.get(m, i, j) == max) {
            if t.above_floor(i, j, cfg.t0) {
                *counts.entry(j).or_default() += 1;
            }
        }
    }
    let top = *counts.values().max()?;
    let winners = counts.iter().filter(|(_, &c)| c == top).map(|(&j, _)| j);
    let p_i = new_res[i].paragraph;
    winners.min_by(|&a, &b| {
        let da = location_distance(p_i, n_new, old_res[a].paragraph, n_old);
        let db = location_distance(p_i, n_new, old_res[b].paragraph, n_old);
        da.total_cmp(&db)
            .then(old_res[a].paragraph.cmp(&old_res[b].paragraph))
            .then(a.cmp(&b))
    })
}

/// Turn a new-to-old choice vector into edits: one edit per chosen old sentence (Modify,
/// or Split when several new sentences picked it), Add for unchosen new sentences and
/// Delete for unchosen old ones.
pub fn edits_from_choice(
    choice: &[Option<usize>],
    new_res: &[ResidualSentence],
    old_res: &[ResidualSentence],
    old: &DocumentGraph,
    new: &DocumentGraph,
    provenance: Provenance,
) -> Result<Vec<Edit>, EditGraphError> {
    let mut by_old: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut edits = Vec::new();
    for (i, c) in choice.iter().enumerate() {
        match c {
            Some(j) => by_old.entry(*j).or_default().push(i),
            None => edits.push(Edit::add(Granularity::Sentence, new_res[i].id.clone(), provenance)),
        }
    }
    for (j, o) in old_res.iter().enumerate() {
        match by_old.get(&j) {
            None => edits.push(Edit::delete(Granularity::Sentence, o.id.clone(), provenance)),
            Some(is) => {
                let new_nodes: BTreeSet<String> = is.iter().map(|&i| new_res[i].id.clone()).collect();
                let links = new_nodes.iter().map(|n| (n.clone(), o.id.clone())).collect();
                edits.push(edit_from_component(
                    Granularity::Sentence,
                    new_nodes,
                    [o.id.clone()].into(),
                    &links,
                    old,
                    new,
                    &BTreeMap::new(),
                    provenance,
                )?);
            }
        }
    }
    sort_edits(&mut edits, old, new);
    Ok(edits)
}

/// Sentence pre-alignment with full intermediate state.
pub fn prealign_detailed(
    old: &DocumentGraph,
    new: &DocumentGraph,
    cfg: &AlignConfig,
    embedder: &dyn EmbeddingProvider,
) -> Result<Prealignment, AlignError> {
    cfg.validate()?;
    for g in [old, new] {
        if !g.is_segmented() {
            return Err(AlignError::Unsegmented(g.version()));
        }
    }
    let (new_res, old_res) = residual_sentences(old, new);
    let tensor = similarity_tensor(&new_res, &old_res, &cfg.measures, embedder)?;
    let (n_new, n_old) = (new.paragraph_count(), old.paragraph_count());
    let choice: Vec<Option<usize>> =
        (0..new_res.len()).map(|i| choose(&tensor, i, cfg, &new_res, &old_res, n_new, n_old)).collect();
    let edits = edits_from_choice(&choice, &new_res, &old_res, old, new, Provenance::Auto)?;
    Ok(Prealignment { edits, new_residual: new_res, old_residual: old_res, tensor, choice })
}

/// Sentence pre-alignment: a partition-respecting set of sentence edits with provenance
/// `Auto`. Identical content produces no edit.
pub fn prealign(
    old: &DocumentGraph,
    new: &DocumentGraph,
    cfg: &AlignConfig,
    embedder: &dyn EmbeddingProvider,
) -> Result<Vec<Edit>, AlignError> {
    Ok(prealign_detailed(old, new, cfg, embedder)?.edits)
}

/// Decides whether an old and a new sentence are revisions of each other.
pub trait AlignmentJudge {
    fn same_content(&self, old_text: &str, new_text: &str) -> Result<bool, String>;
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoStageResult {
    pub edits: Vec<Edit>,
    /// Candidate pairs submitted to the judge.
    pub queried: usize,
    pub accepted: usize,
    /// One line per failed judgement; those candidates keep their Add/Delete edits.
    pub warnings: Vec<String>,
}

/// Pre-alignment followed by judge verification of leftover Add/Delete pairs.
///
/// Each added sentence (in document order) is paired with the still-unclaimed deleted
/// sentence of highest mean similarity among those exceeding `t0` on every measure.
/// Accepted pairs become Modify edits with provenance `LlmAssisted`.
pub fn two_stage_align(
    old: &DocumentGraph,
    new: &DocumentGraph,
    cfg: &AlignConfig,
    embedder: &dyn EmbeddingProvider,
    judge: &dyn AlignmentJudge,
) -> Result<TwoStageResult, AlignError> {
    let pre = prealign_detailed(old, new, cfg, embedder)?;
    let chosen: BTreeSet<usize> = pre.choice.iter().flatten().copied().collect();
    let mut free_old: Vec<usize> = (0..pre.old_residual.len()).filter(|j| !chosen.contains(j)).collect();
    let t = &pre.tensor;
    let mean = |i: usize, j: usize| (0..t.measures.len()).map(|m| t.get(m, i, j)).sum::<f64>() / t.measures.len() as f64;

    let mut accepted_pairs: Vec<(usize, usize)> = Vec::new();
    let (mut queried, mut warnings) = (0, Vec::new());
    for i in (0..pre.new_residual.len()).filter(|&i| pre.choice[i].is_none()) {
        let best = free_old
            .iter()
            .copied()
            .filter(|&j| t.above_floor(i, j, cfg.t0))
            .max_by(|&a, &b| mean(i, a).total_cmp(&mean(i, b)).then(b.cmp(&a)));
        let Some(j) = best else { continue };
        queried += 1;
        let (n, o) = (&pre.new_residual[i], &pre.old_residual[j]);
        match judge.same_content(&o.text, &n.text) {
            Ok(true) => {
                accepted_pairs.push((i, j));
                free_old.retain(|&x| x != j);
            }
            Ok(false) => {}
            Err(e) => warnings.push(format!("{} / {}: {e}", n.id, o.id)),
        }
    }
    if accepted_pairs.is_empty() {
        return Ok(TwoStageResult { edits: pre.edits, queried, accepted: 0, warnings });
    }
    let mut edits: Vec<Edit> = Vec::with_capacity(pre.edits.len());
    let replaced: BTreeSet<&String> = accepted_pairs
        .iter()
        .flat_map(|&(i, j)| [&pre.new_residual[i].id, &pre.old_residual[j].id])
        .collect();
    edits.extend(pre.edits.iter().filter(|e| !e.nodes().any(|n| replaced.contains(n))).cloned());
    for &(i, j) in &accepted_pairs {
        edits.push(Edit::modify(
            Granularity::Sentence,
            pre.new_residual[i].id.clone(),
            pre.old_residual[j].id.clone(),
            Provenance::LlmAssisted,
        ));
    }
    sort_edits(&mut edits, old, new);
    Ok(TwoStageResult { edits, queried, accepted: accepted_pairs.len(), warnings })
}

/// Hard negatives for alignment training: for every 1-to-1 Modify pair, the new sentence
/// paired with the most similar old sentence of a *different* revision pair.
///
/// Documents with fewer than two revision pairs yield nothing.
pub fn generate_alignment_negatives(
    edits: &[Edit],
    old: &DocumentGraph,
    new: &DocumentGraph,
    embedder: &dyn EmbeddingProvider,
) -> Result<Vec<(String, String)>, EmbedError> {
    let pairs: Vec<(String, String)> = edits
        .iter()
        .filter(|e| e.action == EditAction::Modify && e.new_nodes.len() == 1 && e.old_nodes.len() == 1)
        .flat_map(|e| e.links())
        .collect();
    if pairs.len() < 2 {
        return Ok(Vec::new());
    }
    let text = |g: &DocumentGraph, id: &str| g.node(id).map(|n| n.text.clone()).unwrap_or_default();
    let mut cache: HashMap<String, Vec<f64>> = HashMap::new();
    let mut emb = |t: String| -> Result<Vec<f64>, EmbedError> {
        if let Some(v) = cache.get(&t) {
            return Ok(v.clone());
        }
        let v = embedder.embed(&t)?;
        cache.insert(t, v.clone());
        Ok(v)
    };
    let old_embs: Vec<(String, Vec<f64>)> = pairs
        .iter()
        .map(|(_, o)| {
            let t = text(old, o);
            Ok((t.clone(), emb(t)?))
        })
        .collect::<Result<_, EmbedError>>()?;
    let mut out = Vec::with_capacity(pairs.len());
    for (k, (n, _)) in pairs.iter().enumerate() {
        let nt = text(new, n);
        let ne = emb(nt.clone())?;
        let score = |q: usize| {
            if old_embs[q].0 == nt { 100.0 } else { sem_score(&ne, &old_embs[q].1) }
        };
        let best = (0..pairs.len())
            .filter(|&q| q != k)
            .max_by(|&a, &b| score(a).total_cmp(&score(b)).then(b.cmp(&a)))
            .expect("at least one other pair");
        out.push((n.clone(), pairs[best].1.clone()));
    }
    Ok(out)
}
