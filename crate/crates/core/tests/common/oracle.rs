//! Independent reference implementations used as test oracles. Deliberately naive: full
//! matrices, nested loops, no shared code with the library beyond its data types.

#![allow(clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet};

use revgraph::align::AlignConfig;
use revgraph::model::{
    ContentSublabel, DocumentGraph, Edit, EditAction, Granularity, LinkLabel, Provenance,
};
use revgraph::similarity::{EmbeddingProvider, Measure};

fn collapse(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Textbook Levenshtein distance with a full (n+1)×(m+1) table.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = if a[i - 1] == b[j - 1] { 0 } else { 1 };
            d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + sub);
        }
    }
    d[a.len()][b.len()]
}

pub fn lev(a: &str, b: &str) -> f64 {
    let max = a.chars().count().max(b.chars().count());
    if max == 0 {
        return 100.0;
    }
    (1.0 - levenshtein(a, b) as f64 / max as f64) * 100.0
}

fn token_sort(s: &str) -> String {
    let lowered: String = s.chars().map(|c| if c.is_alphanumeric() { c.to_ascii_lowercase() } else { ' ' }).collect();
    let mut toks: Vec<&str> = lowered.split_whitespace().collect();
    toks.sort();
    toks.join(" ")
}

pub fn fuzzy(a: &str, b: &str) -> f64 {
    lev(&token_sort(a), &token_sort(b))
}

pub fn sem(a: &str, b: &str, e: &dyn EmbeddingProvider) -> f64 {
    if a == b {
        return 100.0;
    }
    let (x, y) = (e.embed(a).unwrap(), e.embed(b).unwrap());
    let dot: f64 = x.iter().zip(&y).map(|(p, q)| p * q).sum();
    let nx: f64 = x.iter().map(|p| p * p).sum::<f64>().sqrt();
    let ny: f64 = y.iter().map(|p| p * p).sum::<f64>().sqrt();
    if nx == 0.0 || ny == 0.0 {
        return 0.0;
    }
    (dot / (nx * ny)).clamp(0.0, 1.0) * 100.0
}

struct Sent {
    id: String,
    text: String,
    paragraph: usize,
}

/// Sentence pre-alignment transcribed step by step.
pub fn reference_prealign(
    old: &DocumentGraph,
    new: &DocumentGraph,
    cfg: &AlignConfig,
    embedder: &dyn EmbeddingProvider,
) -> Vec<Edit> {
    // step 1a: identical paragraphs, first unused match in document order
    let new_p: Vec<_> = new.paragraphs().collect();
    let old_p: Vec<_> = old.paragraphs().collect();
    let mut new_gone = vec![false; new_p.len()];
    let mut old_gone = vec![false; old_p.len()];
    for i in 0..new_p.len() {
        for j in 0..old_p.len() {
            if !old_gone[j] && collapse(&new_p[i].text) == collapse(&old_p[j].text) {
                old_gone[j] = true;
                new_gone[i] = true;
                break;
            }
        }
    }
    let sents = |g: &DocumentGraph, ps: &[&revgraph::model::TextNode], gone: &[bool]| -> Vec<Sent> {
        let mut v = Vec::new();
        for (k, p) in ps.iter().enumerate() {
            if gone[k] {
                continue;
            }
            for s in g.children(&p.id) {
                v.push(Sent { id: s.id.clone(), text: s.text.clone(), paragraph: k });
            }
        }
        v
    };
    let new_all = sents(new, &new_p, &new_gone);
    let old_all = sents(old, &old_p, &old_gone);
    // step 1b: identical sentences
    let mut old_alive = vec![true; old_all.len()];
    let mut s_new = Vec::new();
    for s in new_all {
        let mut matched = false;
        for j in 0..old_all.len() {
            if old_alive[j] && collapse(&s.text) == collapse(&old_all[j].text) {
                old_alive[j] = false;
                matched = true;
                break;
            }
        }
        if !matched {
            s_new.push(s);
        }
    }
    let s_old: Vec<Sent> = old_all.into_iter().zip(old_alive).filter(|(_, a)| *a).map(|(s, _)| s).collect();

    // step 2: the tensor
    let (k, l, nm) = (s_new.len(), s_old.len(), cfg.measures.len());
    let mut sim = vec![vec![vec![0.0; l]; k]; nm];
    for m in 0..nm {
        for i in 0..k {
            for j in 0..l {
                let (a, b) = (&s_new[i].text, &s_old[j].text);
                sim[m][i][j] = match cfg.measures[m] {
                    Measure::Lev => lev(a, b),
                    Measure::Fuzzy => fuzzy(a, b),
                    Measure::Sem => sem(a, b, embedder),
                };
            }
        }
    }

    // steps 3 and 4
    let (pn, po) = (new_p.len() as f64, old_p.len() as f64);
    let mut chosen: Vec<Option<usize>> = vec![None; k];
    for i in 0..k {
        let mut candidates: Vec<usize> = Vec::new();
        for m in 0..nm {
            let mut best = f64::NEG_INFINITY;
            for j in 0..l {
                if sim[m][i][j] > best {
                    best = sim[m][i][j];
                }
            }
            if best <= cfg.t1 {
                continue;
            }
            for j in 0..l {
                if sim[m][i][j] == best && (0..nm).all(|m2| sim[m2][i][j] > cfg.t0) {
                    candidates.push(j);
                }
            }
        }
        if candidates.is_empty() {
            continue;
        }
        let mut freq: BTreeMap<usize, usize> = BTreeMap::new();
        for c in &candidates {
            *freq.entry(*c).or_insert(0) += 1;
        }
        let top = *freq.values().max().unwrap();
        let mut best: Option<(f64, usize, usize)> = None;
        for (&j, &f) in &freq {
            if f != top {
                continue;
            }
            let d = (s_new[i].paragraph as f64 / pn - s_old[j].paragraph as f64 / po).abs();
            let key = (d, s_old[j].paragraph, j);
            let better = match best {
                None => true,
                Some(b) => key.0 < b.0 || (key.0 == b.0 && (key.1, key.2) < (b.1, b.2)),
            };
            if better {
                best = Some(key);
            }
        }
        chosen[i] = best.map(|b| b.2);
    }

    // step 5: edits
    let mut edits = Vec::new();
    for i in 0..k {
        if chosen[i].is_none() {
            edits.push(Edit::add(Granularity::Sentence, s_new[i].id.clone(), Provenance::Auto));
        }
    }
    for j in 0..l {
        let news: Vec<usize> = (0..k).filter(|&i| chosen[i] == Some(j)).collect();
        let old_id = s_old[j].id.clone();
        match news.len() {
            0 => edits.push(Edit::delete(Granularity::Sentence, old_id, Provenance::Auto)),
            1 => edits.push(Edit::modify(Granularity::Sentence, s_new[news[0]].id.clone(), old_id, Provenance::Auto)),
            _ => {
                let set: BTreeSet<String> = news.iter().map(|&i| s_new[i].id.clone()).collect();
                let mut e = Edit::from_sets(Granularity::Sentence, EditAction::Split, set, [old_id.clone()].into(), Provenance::Auto);
                e.sublabels = news
                    .iter()
                    .map(|&i| LinkLabel {
                        new: s_new[i].id.clone(),
                        old: old_id.clone(),
                        label: if collapse(&s_new[i].text) == collapse(&s_old[j].text) {
                            ContentSublabel::Identical
                        } else {
                            ContentSublabel::Modify
                        },
                    })
                    .collect();
                edits.push(e);
            }
        }
    }
    canonical(edits)
}

/// Order-insensitive form of an edit set for comparisons.
pub fn canonical(mut edits: Vec<Edit>) -> Vec<Edit> {
    for e in &mut edits {
        e.sublabels.sort_by(|a, b| (&a.new, &a.old).cmp(&(&b.new, &b.old)));
    }
    edits.sort_by(|a, b| a.id.cmp(&b.id));
    edits
}

/// Nominal alpha from its pairwise definition: observed disagreement over ordered pairs
/// within items, expected disagreement over ordered pairs across all pairable values.
pub fn brute_alpha(matrix: &[Vec<Option<u8>>]) -> Option<f64> {
    let items: Vec<Vec<u8>> = matrix
        .iter()
        .map(|row| row.iter().flatten().copied().collect::<Vec<_>>())
        .filter(|v| v.len() >= 2)
        .collect();
    let n: usize = items.iter().map(Vec::len).sum();
    if n == 0 {
        return None;
    }
    let mut d_o = 0.0;
    for v in &items {
        let mut dis = 0.0;
        for a in 0..v.len() {
            for b in 0..v.len() {
                if a != b && v[a] != v[b] {
                    dis += 1.0;
                }
            }
        }
        d_o += dis / (v.len() - 1) as f64;
    }
    d_o /= n as f64;
    let all: Vec<u8> = items.concat();
    let mut dis = 0.0;
    for a in 0..all.len() {
        for b in 0..all.len() {
            if a != b && all[a] != all[b] {
                dis += 1.0;
            }
        }
    }
    let d_e = dis / (n * (n - 1)) as f64;
    Some(if d_e == 0.0 { 1.0 } else { 1.0 - d_o / d_e })
}

/// Classify a connected link set by node degrees.
pub fn classify_by_degree(new_count: usize, old_count: usize, links: &[(usize, usize)]) -> Option<EditAction> {
    if new_count == 0 && old_count == 0 {
        return None;
    }
    if old_count == 0 {
        return Some(EditAction::Add);
    }
    if new_count == 0 {
        return Some(EditAction::Delete);
    }
    let deg_new = (0..new_count).map(|i| links.iter().filter(|l| l.0 == i).count()).max().unwrap();
    let deg_old = (0..old_count).map(|j| links.iter().filter(|l| l.1 == j).count()).max().unwrap();
    Some(match (deg_new > 1, deg_old > 1) {
        (false, false) => EditAction::Modify,
        (true, false) => EditAction::Merge,
        (false, true) => EditAction::Split,
        (true, true) => EditAction::Fusion,
    })
}
