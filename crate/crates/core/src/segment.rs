//! Sentence segmentation.
//!
//! Paragraph text is split by an ensemble of segmenters; the candidate with the fewest
//! sentences wins, ties going to the earlier segmenter. Splitters mostly err by cutting
//! too eagerly (e.g. on a period inside a number), so the coarsest split is the safest.

use std::collections::{HashMap, HashSet};
use std::ops::Range;
use std::path::Path;

use thiserror::Error;

use crate::model::{DocumentGraph, ModelError};

/// Byte range into the paragraph text.
pub type Span = Range<usize>;

#[derive(Debug, Error)]
pub enum SegmentError {
    #[error("no segmenters configured")]
    NoSegmenters,
    #[error("segmenter `{name}` produced invalid spans: {reason}")]
    InvalidSpans { name: String, reason: String },
    #[error("unknown segmenter `{0}`")]
    UnknownSegmenter(String),
    #[error("reading abbreviation list: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub trait Segmenter: Send + Sync {
    fn name(&self) -> &str;
    /// Ordered, non-overlapping sentence spans. Text between spans must be whitespace.
    fn split(&self, text: &str) -> Vec<Span>;
}

const BUILTIN_ABBREVIATIONS: &str = include_str!("../data/abbreviations.txt");

fn parse_abbreviations(list: &str) -> impl Iterator<Item = String> + '_ {
    list.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
}

const TERMINATORS: &[char] = &['.', '!', '?'];
const CLOSERS: &[char] = &[')', ']', '}', '"', '\'', '\u{201d}', '\u{2019}', '\u{bb}'];
const OPENERS: &[char] = &['(', '[', '{', '"', '\'', '\u{201c}', '\u{2018}', '\u{ab}'];

/// Rule-based splitter: a boundary is a run of `.`, `!` or `?` (optionally followed by
/// closing quotes or brackets), then whitespace, then an uppercase letter (optionally
/// behind an opening quote or bracket). A single period after a listed abbreviation is
/// never a boundary; decimals such as `3.50` never satisfy the whitespace rule.
#[derive(Debug, Clone)]
pub struct RuleSegmenter {
    abbreviations: HashSet<String>,
}

impl Default for RuleSegmenter {
    fn default() -> Self {
        RuleSegmenter { abbreviations: parse_abbreviations(BUILTIN_ABBREVIATIONS).collect() }
    }
}

impl RuleSegmenter {
    pub fn with_abbreviations<I, S>(mut self, extra: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.abbreviations.extend(extra.into_iter().map(|s| s.as_ref().trim().to_lowercase()));
        self
    }

    /// Extend the built-in list from a file in the same one-per-line format.
    pub fn with_abbreviation_file(self, path: &Path) -> Result<Self, SegmentError> {
        let text = std::fs::read_to_string(path)?;
        let extra: Vec<String> = parse_abbreviations(&text).collect();
        Ok(self.with_abbreviations(extra))
    }

    fn is_abbreviation(&self, text: &str, period: usize) -> bool {
        let start = text[..period]
            .rfind(|c: char| c.is_whitespace() || OPENERS.contains(&c))
            .map(|i| i + text[i..].chars().next().map_or(1, char::len_utf8))
            .unwrap_or(0);
        let token = text[start..=period].to_lowercase();
        self.abbreviations.contains(&token)
    }
}

impl Segmenter for RuleSegmenter {
    fn name(&self) -> &str {
        "rule"
    }

    fn split(&self, text: &str) -> Vec<Span> {
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let mut spans = Vec::new();
        let mut start = 0usize;
        let mut i = 0usize;
        while i < chars.len() {
            if !TERMINATORS.contains(&chars[i].1) {
                i += 1;
                continue;
            }
            let run_start = i;
            while i < chars.len() && TERMINATORS.contains(&chars[i].1) {
                i += 1;
            }
            let single_period = i - run_start == 1 && chars[run_start].1 == '.';
            while i < chars.len() && CLOSERS.contains(&chars[i].1) {
                i += 1;
            }
            let boundary_end = chars.get(i).map_or(text.len(), |c| c.0);
            let mut j = i;
            while j < chars.len() && chars[j].1.is_whitespace() {
                j += 1;
            }
            if j == i || j == chars.len() {
                continue;
            }
            let mut k = j;
            while k < chars.len() && OPENERS.contains(&chars[k].1) {
                k += 1;
            }
            if k == chars.len() || !chars[k].1.is_uppercase() {
                continue;
            }
            if single_period && self.is_abbreviation(text, chars[run_start].0) {
                continue;
            }
            push_trimmed(text, start..boundary_end, &mut spans);
            start = chars[j].0;
        }
        push_trimmed(text, start..text.len(), &mut spans);
        spans
    }
}

/// Splits after every terminator run followed by whitespace, with no guards.
#[derive(Debug, Clone, Default)]
pub struct NaiveSegmenter;

impl Segmenter for NaiveSegmenter {
    fn name(&self) -> &str {
        "naive"
    }

    fn split(&self, text: &str) -> Vec<Span> {
        let mut spans = Vec::new();
        let mut start = 0;
        let mut prev_term = false;
        for (idx, c) in text.char_indices() {
            if c.is_whitespace() && prev_term {
                push_trimmed(text, start..idx, &mut spans);
                start = idx;
            }
            prev_term = TERMINATORS.contains(&c);
        }
        push_trimmed(text, start..text.len(), &mut spans);
        spans
    }
}

fn push_trimmed(text: &str, range: Span, out: &mut Vec<Span>) {
    let slice = &text[range.clone()];
    let lead = slice.len() - slice.trim_start().len();
    let trail = slice.len() - slice.trim_end().len();
    if lead + trail < slice.len() {
        out.push(range.start + lead..range.end - trail);
    }
}

/// Resolve segmenter names (the `segmenters` config key) to instances.
pub fn segmenters_by_name(names: &[String]) -> Result<Vec<Box<dyn Segmenter>>, SegmentError> {
    names
        .iter()
        .map(|n| -> Result<Box<dyn Segmenter>, SegmentError> {
            match n.as_str() {
                "rule" | "default" => Ok(Box::new(RuleSegmenter::default())),
                "naive" => Ok(Box::new(NaiveSegmenter)),
                other => Err(SegmentError::UnknownSegmenter(other.to_string())),
            }
        })
        .collect()
}

fn check_spans(text: &str, spans: &[Span]) -> Result<(), String> {
    let mut cursor = 0;
    for s in spans {
        if s.start < cursor {
            return Err(format!("span {s:?} overlaps or is out of order"));
        }
        if s.end > text.len() || s.start >= s.end {
            return Err(format!("span {s:?} is empty or out of bounds"));
        }
        if !text.is_char_boundary(s.start) || !text.is_char_boundary(s.end) {
            return Err(format!("span {s:?} splits a character"));
        }
        let piece = &text[s.clone()];
        if piece.trim() != piece {
            return Err(format!("span {s:?} has surrounding whitespace"));
        }
        if !text[cursor..s.start].trim().is_empty() {
            return Err(format!("text before span {s:?} is not covered"));
        }
        cursor = s.end;
    }
    if !text[cursor..].trim().is_empty() {
        return Err("trailing text is not covered".into());
    }
    Ok(())
}

/// Run every segmenter and keep the segmentation with the fewest sentences.
pub fn segment_paragraph(
    text: &str,
    segmenters: &[&dyn Segmenter],
) -> Result<Vec<Span>, SegmentError> {
    let mut best: Option<Vec<Span>> = None;
    for seg in segmenters {
        let spans = seg.split(text);
        check_spans(text, &spans).map_err(|reason| SegmentError::InvalidSpans {
            name: seg.name().to_string(),
            reason,
        })?;
        if best.as_ref().is_none_or(|b| spans.len() < b.len()) {
            best = Some(spans);
        }
    }
    best.ok_or(SegmentError::NoSegmenters)
}

/// The built-in rule segmenter on its own.
pub fn default_segmenter(text: &str) -> Vec<Span> {
    RuleSegmenter::default().split(text)
}

/// Add sentence nodes to every unprotected paragraph, replacing existing ones.
pub fn segment_document(
    graph: &DocumentGraph,
    segmenters: &[&dyn Segmenter],
) -> Result<DocumentGraph, SegmentError> {
    let mut sentences = HashMap::new();
    for p in graph.paragraphs() {
        let spans = if p.protected { Vec::new() } else { segment_paragraph(&p.text, segmenters)? };
        sentences.insert(p.id.clone(), spans.into_iter().map(|s| p.text[s].to_string()).collect());
    }
    Ok(graph.with_sentences(&sentences)?)
}
