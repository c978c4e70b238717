//! Random document builders for property and oracle tests.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use revgraph::model::{DocVersion, DocumentGraph, DocumentRecord, ParagraphRecord, SectionRecord};

pub type Rng8 = ChaCha8Rng;

/// Sections of paragraphs of sentences.
pub type Layout = Vec<Vec<Vec<String>>>;

pub fn build(doc_id: &str, version: DocVersion, layout: &Layout) -> DocumentGraph {
    let sections = layout
        .iter()
        .enumerate()
        .map(|(k, paras)| {
            let ps = paras
                .iter()
                .map(|sents| {
                    let mut p = ParagraphRecord::new(sents.join(" "));
                    p.sentences = Some(sents.clone());
                    p
                })
                .collect();
            SectionRecord::new(format!("Section {k}"), ps)
        })
        .collect();
    DocumentGraph::build(&DocumentRecord { schema_version: 1, doc_id: doc_id.into(), version, sections })
        .expect("generated documents are valid")
}

pub fn layout(sections: &[&[&[&str]]]) -> Layout {
    sections
        .iter()
        .map(|s| s.iter().map(|p| p.iter().map(|x| x.to_string()).collect()).collect())
        .collect()
}

/// Small vocabulary: many near-duplicates and score ties.
const SMALL: [&str; 16] = [
    "the", "model", "data", "we", "use", "results", "show", "a", "new", "method", "on", "three", "tasks", "is",
    "better", "set",
];

const LARGE: [&str; 48] = [
    "annotation", "benchmark", "corpus", "document", "evaluation", "framework", "gradient", "hypothesis",
    "inference", "journal", "kernel", "language", "measure", "network", "objective", "parameter", "quality",
    "revision", "sentence", "transformer", "uncertainty", "variance", "weighting", "experiment", "baseline",
    "classifier", "dataset", "encoder", "feature", "generation", "heuristic", "instance", "judgement",
    "knowledge", "latency", "matrix", "normalization", "optimizer", "pipeline", "query", "reviewer", "sampling",
    "tokenizer", "utility", "vocabulary", "workflow", "accuracy", "embedding",
];

fn capitalize(mut words: Vec<&str>) -> String {
    let first = words.remove(0);
    let mut s: String = first[..1].to_uppercase() + &first[1..];
    for w in words {
        s.push(' ');
        s.push_str(w);
    }
    s.push('.');
    s
}

pub fn small_sentence(rng: &mut Rng8) -> String {
    let n = rng.random_range(3..=7);
    capitalize((0..n).map(|_| *SMALL.choose(rng).unwrap()).collect())
}

/// A long sentence that is very unlikely to resemble any other one.
pub fn distinct_sentence(rng: &mut Rng8) -> String {
    let n = rng.random_range(10..=16);
    let mut words: Vec<String> = (0..n).map(|_| LARGE.choose(rng).unwrap().to_string()).collect();
    words.push(format!("{}", rng.random_range(100..100_000)));
    capitalize(words.iter().map(String::as_str).collect())
}

/// One random word-level change.
pub fn perturb_words(rng: &mut Rng8, s: &str) -> String {
    let body = s.trim_end_matches('.').to_lowercase();
    let mut words: Vec<&str> = body.split(' ').collect();
    match rng.random_range(0..3) {
        0 => {
            let k = rng.random_range(0..words.len());
            words[k] = SMALL.choose(rng).unwrap();
        }
        1 => {
            let k = rng.random_range(0..=words.len());
            words.insert(k, SMALL.choose(rng).unwrap());
        }
        _ if words.len() > 2 => {
            words.remove(rng.random_range(0..words.len()));
        }
        _ => words.push(SMALL.choose(rng).unwrap()),
    }
    capitalize(words)
}

/// Substitute `k` lowercase letters by other letters.
pub fn perturb_chars(rng: &mut Rng8, s: &str, k: usize) -> String {
    let mut chars: Vec<char> = s.chars().collect();
    let letters: Vec<usize> = (0..chars.len()).filter(|&i| chars[i].is_ascii_lowercase()).collect();
    for &i in letters.choose_multiple(rng, k) {
        let mut c = chars[i];
        while c == chars[i] {
            c = rng.random_range(b'a'..=b'z') as char;
        }
        chars[i] = c;
    }
    chars.into_iter().collect()
}

/// Group a flat paragraph list into sections of 1..=3 paragraphs.
pub fn sectionize(rng: &mut Rng8, paras: Vec<Vec<String>>) -> Layout {
    let mut out = Vec::new();
    let mut it = paras.into_iter().peekable();
    while it.peek().is_some() {
        let n = rng.random_range(1..=3);
        out.push(it.by_ref().take(n).collect());
    }
    out
}

fn paragraphs(rng: &mut Rng8, sentences: Vec<String>) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut it = sentences.into_iter().peekable();
    while it.peek().is_some() {
        let n = rng.random_range(1..=4);
        out.push(it.by_ref().take(n).collect());
    }
    out
}

/// A random old/new pair of at most `max_sentences` sentences per version, built from a
/// small vocabulary with repeated sentences, identical paragraphs, rewrites, deletions,
/// insertions and moves.
pub fn random_pair(rng: &mut Rng8, max_sentences: usize) -> (DocumentGraph, DocumentGraph) {
    let n = rng.random_range(1..=max_sentences);
    let mut old_sents: Vec<String> = Vec::with_capacity(n);
    for _ in 0..n {
        if !old_sents.is_empty() && rng.random_bool(0.15) {
            let s = old_sents.choose(rng).unwrap().clone();
            old_sents.push(s);
        } else {
            old_sents.push(small_sentence(rng));
        }
    }
    let old_paras = paragraphs(rng, old_sents);
    let mut new_paras: Vec<Vec<String>> = Vec::new();
    let mut moved: Vec<String> = Vec::new();
    for p in &old_paras {
        if rng.random_bool(0.1) {
            new_paras.push(vec![small_sentence(rng)]);
        }
        if rng.random_bool(0.3) {
            new_paras.push(p.clone());
            continue;
        }
        let mut q = Vec::new();
        for s in p {
            match rng.random_range(0..100) {
                0..40 => q.push(s.clone()),
                40..65 => q.push(perturb_words(rng, s)),
                65..75 => {}
                75..85 => q.push(small_sentence(rng)),
                85..92 => moved.push(s.clone()),
                _ => {
                    q.push(s.clone());
                    q.push(small_sentence(rng));
                }
            }
        }
        if q.is_empty() {
            q.push(small_sentence(rng));
        }
        new_paras.push(q);
    }
    for s in moved {
        let k = rng.random_range(0..new_paras.len());
        new_paras[k].push(s);
    }
    let mut budget = max_sentences;
    new_paras.retain_mut(|p| {
        p.truncate(budget);
        budget -= p.len();
        !p.is_empty()
    });
    let old = build("r", DocVersion::Old, &sectionize(rng, old_paras));
    let new = build("r", DocVersion::New, &sectionize(rng, new_paras));
    (old, new)
}
