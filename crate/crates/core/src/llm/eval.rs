//! Answer parsing and classification metrics, plus random and majority baselines.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reserved predicted class for answers that could not be parsed.
pub const UNPARSED: &str = "unparsed";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    /// Canonical label from the task's label set.
    pub label: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("no LABEL found in answer: {raw:?}")]
    MissingLabel { raw: String },
    #[error("unknown label {value:?} in answer: {raw:?}")]
    UnknownLabel { value: String, raw: String },
}

static LABEL_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\blabel\s*:").unwrap());
static REASON_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\breason\s*:").unwrap());

fn squash(s: &str) -> String {
    s.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect()
}

/// Map a free-form label value onto the label set, ignoring case and punctuation.
pub fn normalize_label(value: &str, labels: &[impl AsRef<str>]) -> Option<String> {
    let v = squash(value);
    if v.is_empty() {
        return None;
    }
    labels.iter().map(AsRef::as_ref).find(|l| squash(l) == v).map(str::to_string)
}

/// Extract `LABEL:` and `REASON:` from a model answer.
///
/// Chatter around the template is tolerated, as is REASON before LABEL. The first LABEL
/// whose value maps onto `labels` wins; the reason is the REASON text following it (or,
/// failing that, preceding it).
pub fn parse_verdict(text: &str, labels: &[impl AsRef<str>]) -> Result<Verdict, ParseError> {
    let label_marks: Vec<(usize, usize)> = LABEL_RE.find_iter(text).map(|m| (m.start(), m.end())).collect();
    let reason_marks: Vec<(usize, usize)> = REASON_RE.find_iter(text).map(|m| (m.start(), m.end())).collect();
    if label_marks.is_empty() {
        return Err(ParseError::MissingLabel { raw: text.to_string() });
    }
    let next_mark = |from: usize| {
        label_marks
            .iter()
            .chain(&reason_marks)
            .map(|&(s, _)| s)
            .filter(|&s| s >= from)
            .min()
            .unwrap_or(text.len())
    };
    let mut first_value = None;
    for &(start, end) in &label_marks {
        let stop = next_mark(end);
        let raw_value = &text[end..stop];
        let value = raw_value.lines().next().unwrap_or("").trim();
        let value = value.trim_matches(|c: char| "<>\"'*`[](){}.,;:".contains(c) || c.is_whitespace());
        first_value.get_or_insert_with(|| value.to_string());
        let Some(label) = normalize_label(value, labels) else { continue };
        let after = reason_marks.iter().find(|&&(s, _)| s >= end);
        let before = reason_marks.iter().rev().find(|&&(s, _)| s < start);
        let reason = match (after, before) {
            (Some(&(_, re)), _) => {
                let stop = label_marks.iter().map(|&(s, _)| s).find(|&s| s > re).unwrap_or(text.len());
                text[re..stop].trim()
            }
            (None, Some(&(_, re))) => text[re..start].trim(),
            (None, None) => "",
        };
        return Ok(Verdict { label, reason: reason.to_string() });
    }
    Err(ParseError::UnknownLabel { value: first_value.unwrap_or_default(), raw: text.to_string() })
}

/// Render an answer in the template format (the inverse of [`parse_verdict`]).
pub fn render_verdict(label: &str, reason: &str) -> String {
    format!("LABEL: {label} REASON: {reason}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub n: usize,
    pub accuracy: f64,
    /// Unweighted mean of per-label F1 over the label set.
    pub macro_f1: f64,
    pub labels: Vec<String>,
    pub per_label: BTreeMap<String, LabelScores>,
    /// Predicted-class columns: the label set followed by [`UNPARSED`].
    pub columns: Vec<String>,
    /// Raw counts, rows = gold labels, columns = `columns`.
    pub counts: Vec<Vec<usize>>,
    /// Row-normalized percentages; rows without support are all zero.
    pub confusion_pct: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("nothing to evaluate")]
    Empty,
    #[error("{predictions} predictions for {gold} gold labels")]
    LengthMismatch { predictions: usize, gold: usize },
    #[error("gold label {0:?} is not in the label set")]
    UnknownGold(String),
}

/// Score predictions against gold labels. `None` and out-of-set predictions count as
/// [`UNPARSED`] and are always wrong.
pub fn evaluate(
    predictions: &[Option<String>],
    gold: &[String],
    labels: &[impl AsRef<str>],
) -> Result<EvalResult, EvalError> {
    if gold.is_empty() {
        return Err(EvalError::Empty);
    }
    if predictions.len() != gold.len() {
        return Err(EvalError::LengthMismatch { predictions: predictions.len(), gold: gold.len() });
    }
    let labels: Vec<String> = labels.iter().map(|l| l.as_ref().to_string()).collect();
    let col = |l: &str| labels.iter().position(|x| x == l);
    let k = labels.len();
    let mut counts = vec![vec![0usize; k + 1]; k];
    for (p, g) in predictions.iter().zip(gold) {
        let r = col(g).ok_or_else(|| EvalError::UnknownGold(g.clone()))?;
        let c = p.as_deref().and_then(col).unwrap_or(k);
        counts[r][c] += 1;
    }
    let n = gold.len();
    let correct: usize = (0..k).map(|i| counts[i][i]).sum();
    let mut per_label = BTreeMap::new();
    let mut f1_sum = 0.0;
    for (i, l) in labels.iter().enumerate() {
        let tp = counts[i][i] as f64;
        let support: usize = counts[i].iter().sum();
        let predicted: usize = (0..k).map(|r| counts[r][i]).sum();
        let precision = if predicted > 0 { tp / predicted as f64 } else { 0.0 };
        let recall = if support > 0 { tp / support as f64 } else { 0.0 };
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        f1_sum += f1;
        per_label.insert(l.clone(), LabelScores { precision, recall, f1, support });
    }
    let confusion_pct = counts
        .iter()
        .map(|row| {
            let s: usize = row.iter().sum();
            row.iter().map(|&c| if s > 0 { 100.0 * c as f64 / s as f64 } else { 0.0 }).collect()
        })
        .collect();
    let mut columns = labels.clone();
    columns.push(UNPARSED.to_string());
    Ok(EvalResult {
        n,
        accuracy: correct as f64 / n as f64,
        macro_f1: f1_sum / k as f64,
        labels,
        per_label,
        columns,
        counts,
        confusion_pct,
    })
}

/// Uniformly random predictions over the label set.
pub fn random_baseline(n: usize, labels: &[impl AsRef<str>], seed: u64) -> Vec<Option<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Some(labels[rng.random_range(0..labels.len())].as_ref().to_string())).collect()
}

/// Majority label among the selected demonstrations of one item, given in decreasing
/// similarity order. Ties go to the label of the most similar tied member.
pub fn majority_label(ranked_labels: &[String]) -> Option<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in ranked_labels {
        *counts.entry(l).or_default() += 1;
    }
    let top = *counts.values().max()?;
    ranked_labels.iter().find(|l| counts[l.as_str()] == top).cloned()
}
