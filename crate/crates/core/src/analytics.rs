//! Revision statistics: edit ratios, edit concentration (crest factor), positional and
//! label distributions, review-request uptake, annotator agreement and summary metrics.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::location_distance;
use crate::model::{
    CrossLink, CrossLinkKind, DocumentGraph, Edit, EditAction, Granularity, RequestKind,
    ReviewRequest,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyticsError {
    #[error("document has no sentences")]
    NoSentences,
    #[error("no edits")]
    NoEdits,
    #[error("bins must be at least 1")]
    ZeroBins,
    #[error("no item was labeled by two or more annotators")]
    NoCoAnnotatedItems,
    #[error("empty corpus")]
    EmptyCorpus,
}

const UNLABELED: &str = "Unlabeled";

fn sentence_edits(edits: &[Edit]) -> impl Iterator<Item = &Edit> {
    edits.iter().filter(|e| e.granularity == Granularity::Sentence)
}

/// Sentence edits per sentence of the old version. May exceed 1.
pub fn edit_ratio(edits: &[Edit], old: &DocumentGraph) -> Result<f64, AnalyticsError> {
    let n = old.sentence_count();
    if n == 0 {
        return Err(AnalyticsError::NoSentences);
    }
    Ok(sentence_edits(edits).count() as f64 / n as f64)
}

/// Sentence edits carrying a Fact/Evidence or Claim intent, per old sentence.
pub fn semantic_edit_ratio(edits: &[Edit], old: &DocumentGraph) -> Result<f64, AnalyticsError> {
    let n = old.sentence_count();
    if n == 0 {
        return Err(AnalyticsError::NoSentences);
    }
    Ok(sentence_edits(edits).filter(|e| e.is_semantic()).count() as f64 / n as f64)
}

/// Peak over root-mean-square of a count vector; 1 for a perfectly even spread.
pub fn crest_factor(counts: &[u64]) -> Result<f64, AnalyticsError> {
    let peak = counts.iter().copied().max().unwrap_or(0);
    if peak == 0 {
        return Err(AnalyticsError::NoEdits);
    }
    let mean_sq = counts.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>() / counts.len() as f64;
    Ok(peak as f64 / mean_sq.sqrt())
}

/// Per-container edit counts over the containers of the new version.
///
/// Edits touching the new version count toward the container of their first new node;
/// pure deletions count toward the new container closest in relative position to the
/// deleted text's old container.
pub fn container_edit_counts(
    edits: &[Edit],
    old: &DocumentGraph,
    new: &DocumentGraph,
    level: Granularity,
) -> Vec<u64> {
    type IndexFn = fn(&DocumentGraph, &str) -> Option<usize>;
    let (index, count): (IndexFn, fn(&DocumentGraph) -> usize) = match level {
        Granularity::Section => (|g, id| g.section_index(id), |g| g.section_count()),
        _ => (|g, id| g.paragraph_index(id), |g| g.paragraph_count()),
    };
    let (n_new, n_old) = (count(new), count(old));
    let mut counts = vec![0u64; n_new];
    for e in sentence_edits(edits) {
        let slot = if let Some(n) = e.new_nodes.iter().next() {
            new.container(n, level).and_then(|c| index(new, &c.id))
        } else {
            e.old_nodes.iter().next().and_then(|o| old.container(o, level)).and_then(|c| index(old, &c.id)).and_then(
                |p_old| {
                    (0..n_new).min_by(|&a, &b| {
                        location_distance(a, n_new, p_old, n_old)
                            .total_cmp(&location_distance(b, n_new, p_old, n_old))
                            .then(a.cmp(&b))
                    })
                },
            )
        };
        if let Some(s) = slot {
            counts[s] += 1;
        }
    }
    counts
}

/// Edit counts per relative-position bin, keyed by action and by intent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionalHistogram {
    pub bins: usize,
    pub by_action: BTreeMap<String, Vec<u64>>,
    pub by_intent: BTreeMap<String, Vec<u64>>,
}

impl PositionalHistogram {
    /// CSV with one row per (dimension, label) and one column per bin.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dimension,label");
        for b in 0..self.bins {
            out.push_str(&format!(",bin{b}"));
        }
        out.push('\n');
        for (dim, map) in [("action", &self.by_action), ("intent", &self.by_intent)] {
            for (label, counts) in map {
                out.push_str(&format!("{dim},{label}"));
                for c in counts {
                    out.push_str(&format!(",{c}"));
                }
                out.push('\n');
            }
        }
        out
    }

    fn merge(&mut self, other: &PositionalHistogram) {
        for (mine, theirs) in [(&mut self.by_action, &other.by_action), (&mut self.by_intent, &other.by_intent)] {
            for (k, v) in theirs {
                let slot = mine.entry(k.clone()).or_insert_with(|| vec![0; v.len()]);
                for (a, b) in slot.iter_mut().zip(v) {
                    *a += b;
                }
            }
        }
    }
}

/// Relative position of an edit: sentence ordinal over sentence count, in the new version
/// unless the edit only touches the old one.
pub fn relative_position(e: &Edit, old: &DocumentGraph, new: &DocumentGraph) -> Option<f64> {
    let (g, ids) = if e.new_nodes.is_empty() { (old, &e.old_nodes) } else { (new, &e.new_nodes) };
    let ord = ids.iter().filter_map(|id| g.sentence_ordinal(id)).min()?;
    Some(ord as f64 / g.sentence_count() as f64)
}

pub fn positional_distribution(
    edits: &[Edit],
    old: &DocumentGraph,
    new: &DocumentGraph,
    bins: usize,
) -> Result<PositionalHistogram, AnalyticsError> {
    if bins == 0 {
        return Err(AnalyticsError::ZeroBins);
    }
    let mut h = PositionalHistogram { bins, by_action: BTreeMap::new(), by_intent: BTreeMap::new() };
    for e in sentence_edits(edits) {
        let Some(pos) = relative_position(e, old, new) else { continue };
        let bin = ((pos * bins as f64).floor() as usize).min(bins - 1);
        h.by_action.entry(e.action.as_str().to_string()).or_insert_with(|| vec![0; bins])[bin] += 1;
        for label in intent_keys(e) {
            h.by_intent.entry(label).or_insert_with(|| vec![0; bins])[bin] += 1;
        }
    }
    Ok(h)
}

fn intent_keys(e: &Edit) -> Vec<String> {
    if e.intents.is_empty() {
        vec![UNLABELED.to_string()]
    } else {
        e.intents.iter().map(|i| i.label().to_string()).collect()
    }
}

/// Label proportions. Each distribution sums to 1 (or is empty when there are no edits).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LabelDistribution {
    pub total_edits: usize,
    pub action: BTreeMap<String, f64>,
    /// Over intent assignments; edits without an intent count as "Unlabeled".
    pub intent: BTreeMap<String, f64>,
    /// Over (action, intent) assignments, keyed "Action/Intent".
    pub joint: BTreeMap<String, f64>,
}

fn proportions(counts: BTreeMap<String, u64>) -> BTreeMap<String, f64> {
    let total: u64 = counts.values().sum();
    counts.into_iter().map(|(k, v)| (k, v as f64 / total as f64)).collect()
}

/// Raw counts behind a [`LabelDistribution`]; additive across documents.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelCounts {
    pub total_edits: usize,
    pub action: BTreeMap<String, u64>,
    pub intent: BTreeMap<String, u64>,
    pub joint: BTreeMap<String, u64>,
}

impl LabelCounts {
    pub fn from_edits<'a>(edits: impl IntoIterator<Item = &'a Edit>) -> Self {
        let mut c = LabelCounts::default();
        for e in edits {
            c.total_edits += 1;
            *c.action.entry(e.action.as_str().to_string()).or_default() += 1;
            for i in intent_keys(e) {
                *c.joint.entry(format!("{}/{i}", e.action.as_str())).or_default() += 1;
                *c.intent.entry(i).or_default() += 1;
            }
        }
        c
    }

    pub fn add(&mut self, other: &LabelCounts) {
        self.total_edits += other.total_edits;
        for (mine, theirs) in [
            (&mut self.action, &other.action),
            (&mut self.intent, &other.intent),
            (&mut self.joint, &other.joint),
        ] {
            for (k, v) in theirs {
                *mine.entry(k.clone()).or_default() += v;
            }
        }
    }

    pub fn distribution(&self) -> LabelDistribution {
        LabelDistribution {
            total_edits: self.total_edits,
            action: proportions(self.action.clone()),
            intent: proportions(self.intent.clone()),
            joint: proportions(self.joint.clone()),
        }
    }
}

pub fn label_distribution(edits: &[Edit]) -> LabelDistribution {
    LabelCounts::from_edits(edits).distribution()
}

/// How often a request kind was acted upon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestUptake {
    pub requests: usize,
    pub not_acted: f64,
    pub single_edit: f64,
    pub multi_edit: f64,
}

/// Per request kind (non-requests excluded): fractions of requests linked to no edit,
/// exactly one edit, or several edits. Kinds without any request are omitted.
pub fn request_impact(requests: &[ReviewRequest], links: &[CrossLink]) -> BTreeMap<RequestKind, RequestUptake> {
    let mut linked: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for l in links.iter().filter(|l| l.kind == CrossLinkKind::ReviewToEdit) {
        linked.entry(l.sentence_id.as_str()).or_default().insert(l.edit_id.as_str());
    }
    let mut tally: BTreeMap<RequestKind, [usize; 3]> = BTreeMap::new();
    for r in requests.iter().filter(|r| r.kind != RequestKind::NonRequest) {
        let n = linked.get(r.sentence_id.as_str()).map_or(0, BTreeSet::len);
        tally.entry(r.kind).or_default()[n.min(2)] += 1;
    }
    tally
        .into_iter()
        .map(|(k, [a, b, c])| {
            let total = a + b + c;
            let f = |x: usize| x as f64 / total as f64;
            (k, RequestUptake { requests: total, not_acted: f(a), single_edit: f(b), multi_edit: f(c) })
        })
        .collect()
}

/// Nominal Krippendorff's alpha over an item × annotator matrix (`None` = missing).
///
/// Items with fewer than two labels are not pairable and are ignored. When all pairable
/// labels are identical the expected disagreement is zero and alpha is 1.
pub fn krippendorff_alpha<L: Ord + Clone>(matrix: &[Vec<Option<L>>]) -> Result<f64, AnalyticsError> {
    let mut coincidence: BTreeMap<(L, L), f64> = BTreeMap::new();
    for item in matrix {
        let values: Vec<&L> = item.iter().flatten().collect();
        let m = values.len();
        if m < 2 {
            continue;
        }
        let w = 1.0 / (m - 1) as f64;
        for (a, x) in values.iter().enumerate() {
            for (b, y) in values.iter().enumerate() {
                if a != b {
                    *coincidence.entry(((*x).clone(), (*y).clone())).or_default() += w;
                }
            }
        }
    }
    if coincidence.is_empty() {
        return Err(AnalyticsError::NoCoAnnotatedItems);
    }
    let mut marginals: BTreeMap<&L, f64> = BTreeMap::new();
    for ((c, _), v) in &coincidence {
        *marginals.entry(c).or_default() += v;
    }
    let n: f64 = marginals.values().sum();
    let observed: f64 = coincidence.iter().filter(|((c, k), _)| c != k).map(|(_, v)| v).sum();
    let sum_sq: f64 = marginals.values().map(|v| v * v).sum();
    let expected = n * n - sum_sq;
    if expected == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - (n - 1.0) * observed / expected)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryFlags {
    #[serde(default)]
    pub non_factual: BTreeSet<String>,
    #[serde(default)]
    pub non_specific: BTreeSet<String>,
}

/// Computable summary quality metrics; `None` where the denominator is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryMetrics {
    pub comprehensiveness: Option<f64>,
    pub compactness: Option<f64>,
    pub specificity: Option<f64>,
    pub factuality: Option<f64>,
}

/// `links` are `(summary sentence id, edit id)` pairs.
pub fn summary_metrics(
    summary_sentences: &[String],
    edit_ids: &[String],
    links: &[(String, String)],
    flags: &SummaryFlags,
) -> SummaryMetrics {
    let ratio = |a: usize, b: usize| (b > 0).then(|| a as f64 / b as f64);
    let all_edits: BTreeSet<&String> = edit_ids.iter().collect();
    let unique: BTreeSet<(&String, &String)> = links.iter().map(|(s, e)| (s, e)).collect();
    let covered: BTreeSet<&String> = unique.iter().map(|(_, e)| *e).filter(|e| all_edits.contains(e)).collect();
    let mut per_sentence: BTreeMap<&String, usize> = BTreeMap::new();
    for (s, _) in &unique {
        *per_sentence.entry(s).or_default() += 1;
    }
    let n = summary_sentences.len();
    let flagged = |set: &BTreeSet<String>| summary_sentences.iter().filter(|s| set.contains(*s)).count();
    SummaryMetrics {
        comprehensiveness: ratio(covered.len(), all_edits.len()),
        compactness: ratio(per_sentence.values().sum(), per_sentence.len()),
        specificity: ratio(n - flagged(&flags.non_specific), n),
        factuality: ratio(n - flagged(&flags.non_factual), n),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticsReport {
    pub doc_id: String,
    pub sentence_edits: usize,
    pub edit_ratio: f64,
    pub semantic_edit_ratio: f64,
    /// `None` when the document has no sentence edits.
    pub cf_paragraph: Option<f64>,
    pub cf_section: Option<f64>,
    pub paragraph_counts: Vec<u64>,
    pub section_counts: Vec<u64>,
    pub positional_histogram: PositionalHistogram,
    pub label_distribution: LabelDistribution,
    pub request_impact: BTreeMap<RequestKind, RequestUptake>,
}

/// Everything computable for one document pair. Distributions cover sentence edits.
pub fn analyze(
    old: &DocumentGraph,
    new: &DocumentGraph,
    edits: &[Edit],
    requests: &[ReviewRequest],
    links: &[CrossLink],
    bins: usize,
) -> Result<AnalyticsReport, AnalyticsError> {
    let paragraph_counts = container_edit_counts(edits, old, new, Granularity::Paragraph);
    let section_counts = container_edit_counts(edits, old, new, Granularity::Section);
    let sentence: Vec<Edit> = sentence_edits(edits).cloned().collect();
    Ok(AnalyticsReport {
        doc_id: new.doc_id().to_string(),
        sentence_edits: sentence.len(),
        edit_ratio: edit_ratio(edits, old)?,
        semantic_edit_ratio: semantic_edit_ratio(edits, old)?,
        cf_paragraph: crest_factor(&paragraph_counts).ok(),
        cf_section: crest_factor(&section_counts).ok(),
        paragraph_counts,
        section_counts,
        positional_histogram: positional_distribution(edits, old, new, bins)?,
        label_distribution: label_distribution(&sentence),
        request_impact: request_impact(requests, links),
    })
}

/// One document's inputs to corpus-level analytics.
pub struct DocumentInput<'a> {
    pub old: &'a DocumentGraph,
    pub new: &'a DocumentGraph,
    pub edits: &'a [Edit],
    pub requests: &'a [ReviewRequest],
    pub links: &'a [CrossLink],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub documents: usize,
    pub mean_edit_ratio: f64,
    pub mean_semantic_edit_ratio: f64,
    /// Pooled over all sentence edits of the corpus.
    pub label_distribution: LabelDistribution,
    pub positional_histogram: PositionalHistogram,
    pub request_impact: BTreeMap<RequestKind, RequestUptake>,
    pub per_document: Vec<AnalyticsReport>,
}

pub fn analyze_corpus(docs: &[DocumentInput<'_>], bins: usize) -> Result<CorpusReport, AnalyticsError> {
    if docs.is_empty() {
        return Err(AnalyticsError::EmptyCorpus);
    }
    let reports: Vec<AnalyticsReport> = docs
        .par_iter()
        .map(|d| analyze(d.old, d.new, d.edits, d.requests, d.links, bins))
        .collect::<Result<_, _>>()?;
    let n = reports.len() as f64;
    let mut counts = LabelCounts::default();
    let mut hist = PositionalHistogram { bins, by_action: BTreeMap::new(), by_intent: BTreeMap::new() };
    for (d, r) in docs.iter().zip(&reports) {
        counts.add(&LabelCounts::from_edits(sentence_edits(d.edits)));
        hist.merge(&r.positional_histogram);
    }
    let all_requests: Vec<ReviewRequest> = docs.iter().flat_map(|d| d.requests.iter().cloned()).collect();
    let all_links: Vec<CrossLink> = docs.iter().flat_map(|d| d.links.iter().cloned()).collect();
    Ok(CorpusReport {
        documents: reports.len(),
        mean_edit_ratio: reports.iter().map(|r| r.edit_ratio).sum::<f64>() / n,
        mean_semantic_edit_ratio: reports.iter().map(|r| r.semantic_edit_ratio).sum::<f64>() / n,
        label_distribution: counts.distribution(),
        positional_histogram: hist,
        request_impact: request_impact(&all_requests, &all_links),
        per_document: reports,
    })
}

/// Share of edits with the given action, from a distribution.
pub fn action_share(d: &LabelDistribution, action: EditAction) -> f64 {
    d.action.get(action.as_str()).copied().unwrap_or(0.0)
}
