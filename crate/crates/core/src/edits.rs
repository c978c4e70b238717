//! Edit topology: action derivation from link counts, re-partitioning after human or
//! LLM corrections, and lifting sentence edits to paragraph and section granularity.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    collapse_whitespace, ContentSublabel, DocumentGraph, Edit, EditAction, EditIntent, Granularity,
    LinkLabel, Provenance,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EditGraphError {
    #[error("an edit needs at least one node on either side")]
    EmptyTopology,
    #[error("correction #{position} rejected: {reason}")]
    Correction { position: usize, reason: String },
}

/// Action implied by the number of new and old elements an edit links.
///
/// Alignment direction is new-to-old: Merge is 1-to-n (one new element consolidating n
/// old ones), Split is n-to-1.
pub fn derive_action(new_count: usize, old_count: usize) -> Result<EditAction, EditGraphError> {
    Ok(match (new_count, old_count) {
        (0, 0) => return Err(EditGraphError::EmptyTopology),
        (_, 0) => EditAction::Add,
        (0, _) => EditAction::Delete,
        (1, 1) => EditAction::Modify,
        (1, _) => EditAction::Merge,
        (_, 1) => EditAction::Split,
        _ => EditAction::Fusion,
    })
}

/// Content label of one link: Identical when the linked texts match after whitespace
/// normalization.
pub fn content_sublabel(new_text: &str, old_text: &str) -> ContentSublabel {
    if collapse_whitespace(new_text) == collapse_whitespace(old_text) {
        ContentSublabel::Identical
    } else {
        ContentSublabel::Modify
    }
}

/// Build an edit from a connected set of links (plus isolated nodes for Add/Delete),
/// deriving the action and, for partition edits, the per-link content labels.
#[allow(clippy::too_many_arguments)]
pub fn edit_from_component(
    granularity: Granularity,
    new_nodes: BTreeSet<String>,
    old_nodes: BTreeSet<String>,
    links: &BTreeSet<(String, String)>,
    old: &DocumentGraph,
    new: &DocumentGraph,
    overrides: &BTreeMap<(String, String), ContentSublabel>,
    provenance: Provenance,
) -> Result<Edit, EditGraphError> {
    let action = derive_action(new_nodes.len(), old_nodes.len())?;
    let mut edit = Edit::from_sets(granularity, action, new_nodes, old_nodes, provenance);
    if action.is_partition() {
        edit.sublabels = links
            .iter()
            .map(|(n, o)| {
                let label = overrides.get(&(n.clone(), o.clone())).copied().unwrap_or_else(|| {
                    let nt = new.node(n).map_or("", |x| x.text.as_str());
                    let ot = old.node(o).map_or("", |x| x.text.as_str());
                    content_sublabel(nt, ot)
                });
                LinkLabel { new: n.clone(), old: o.clone(), label }
            })
            .collect();
    }
    Ok(edit)
}

/// A single correction to an edit set, as sent by the review UI or replayed from a journal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Correction {
    AddLink { new: String, old: String },
    RemoveLink { new: String, old: String },
    /// Set (or clear, with `null`) the intent of the edit containing `node`.
    SetIntent { node: String, intent: Option<EditIntent> },
    SetActionSublabel { new: String, old: String, label: ContentSublabel },
}

#[derive(Default)]
struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn add(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.parent.len() - 1
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Sort key: edits touching the new version first, in new-document order; pure
/// deletions after, in old-document order.
fn edit_order_key(e: &Edit, old: &DocumentGraph, new: &DocumentGraph) -> (usize, usize, usize) {
    let pos = |g: &DocumentGraph, ids: &BTreeSet<String>| {
        ids.iter()
            .filter_map(|id| {
                let n = g.node(id)?;
                Some(match n.granularity {
                    Granularity::Sentence | Granularity::Subsentence => g.sentence_ordinal(id)?,
                    Granularity::Paragraph => g.paragraph_index(id)?,
                    Granularity::Section => g.section_index(id)?,
                })
            })
            .min()
            .unwrap_or(usize::MAX)
    };
    let n = pos(new, &e.new_nodes);
    let o = pos(old, &e.old_nodes);
    (usize::from(e.new_nodes.is_empty()), n, o)
}

pub fn sort_edits(edits: &mut [Edit], old: &DocumentGraph, new: &DocumentGraph) {
    edits.sort_by_cached_key(|e| (edit_order_key(e, old, new), e.id.clone()));
}

fn check_sentence(graph: &DocumentGraph, id: &str, position: usize) -> Result<(), EditGraphError> {
    match graph.node(id) {
        Some(n) if n.granularity == Granularity::Sentence => Ok(()),
        Some(n) => Err(EditGraphError::Correction {
            position,
            reason: format!("node {id} is a {} node, expected a sentence", n.granularity),
        }),
        None => Err(EditGraphError::Correction {
            position,
            reason: format!("unknown {} node {id}", graph.version()),
        }),
    }
}

/// Apply a batch of corrections to a sentence-level edit set.
///
/// The corrected links form a bipartite graph whose connected components become the new
/// edits, with actions re-derived from their topology. A component whose nodes and links
/// match an input edit, and which no labeling op touched, keeps that edit unchanged;
/// every other component gets provenance `Human`. Nodes that only entered the graph
/// through an added link and end up unlinked again are dropped.
pub fn apply_corrections(
    edits: &[Edit],
    corrections: &[Correction],
    old: &DocumentGraph,
    new: &DocumentGraph,
) -> Result<Vec<Edit>, EditGraphError> {
    if corrections.is_empty() {
        return Ok(edits.to_vec());
    }
    let original_nodes: BTreeSet<&String> = edits.iter().flat_map(|e| e.nodes()).collect();
    let mut new_side: BTreeSet<String> = edits.iter().flat_map(|e| e.new_nodes.iter().cloned()).collect();
    let mut old_side: BTreeSet<String> = edits.iter().flat_map(|e| e.old_nodes.iter().cloned()).collect();
    let mut links: BTreeSet<(String, String)> = edits.iter().flat_map(|e| e.links()).collect();
    let mut overrides: BTreeMap<(String, String), ContentSublabel> = edits
        .iter()
        .flat_map(|e| e.sublabels.iter().map(|l| ((l.new.clone(), l.old.clone()), l.label)))
        .collect();
    let mut intent_ops: BTreeMap<String, (usize, Option<EditIntent>)> = BTreeMap::new();
    let mut labeled: BTreeSet<String> = BTreeSet::new();

    for (pos, op) in corrections.iter().enumerate() {
        match op {
            Correction::AddLink { new: n, old: o } => {
                check_sentence(new, n, pos)?;
                check_sentence(old, o, pos)?;
                new_side.insert(n.clone());
                old_side.insert(o.clone());
                links.insert((n.clone(), o.clone()));
            }
            Correction::RemoveLink { new: n, old: o } => {
                check_sentence(new, n, pos)?;
                check_sentence(old, o, pos)?;
                let key = (n.clone(), o.clone());
                links.remove(&key);
                overrides.remove(&key);
            }
            Correction::SetIntent { node, intent } => {
                if !new_side.contains(node) && !old_side.contains(node) {
                    return Err(EditGraphError::Correction {
                        position: pos,
                        reason: format!("node {node} is not part of any edit"),
                    });
                }
                intent_ops.insert(node.clone(), (pos, *intent));
                labeled.insert(node.clone());
            }
            Correction::SetActionSublabel { new: n, old: o, label } => {
                let key = (n.clone(), o.clone());
                if !links.contains(&key) {
                    return Err(EditGraphError::Correction {
                        position: pos,
                        reason: format!("no link {n} -> {o}"),
                    });
                }
                overrides.insert(key, *label);
                labeled.insert(n.clone());
            }
        }
    }

    // Components over the corrected link graph.
    let mut uf = UnionFind::default();
    let mut slot: HashMap<(bool, &String), usize> = HashMap::new();
    for n in &new_side {
        slot.insert((true, n), uf.add());
    }
    for o in &old_side {
        slot.insert((false, o), uf.add());
    }
    for (n, o) in &links {
        uf.union(slot[&(true, n)], slot[&(false, o)]);
    }
    let mut linked: BTreeSet<(bool, &String)> = BTreeSet::new();
    for (n, o) in &links {
        linked.insert((true, n));
        linked.insert((false, o));
    }
    let mut components: BTreeMap<usize, (BTreeSet<String>, BTreeSet<String>)> = BTreeMap::new();
    for (&(is_new, id), &s) in &slot {
        if !linked.contains(&(is_new, id)) && !original_nodes.contains(id) {
            continue;
        }
        let root = uf.find(s);
        let entry = components.entry(root).or_default();
        if is_new {
            entry.0.insert(id.clone());
        } else {
            entry.1.insert(id.clone());
        }
    }

    let by_structure: HashMap<(BTreeSet<String>, BTreeSet<String>), &Edit> = edits
        .iter()
        .map(|e| ((e.new_nodes.clone(), e.old_nodes.clone()), e))
        .collect();
    let node_owner: HashMap<&String, &Edit> =
        edits.iter().flat_map(|e| e.nodes().map(move |n| (n, e))).collect();

    let mut out = Vec::with_capacity(components.len());
    for (new_nodes, old_nodes) in components.into_values() {
        let comp_links: BTreeSet<(String, String)> = links
            .iter()
            .filter(|(n, _)| new_nodes.contains(n))
            .cloned()
            .collect();
        let touched = new_nodes.iter().chain(&old_nodes).any(|n| labeled.contains(n));
        if !touched {
            if let Some(orig) = by_structure.get(&(new_nodes.clone(), old_nodes.clone())) {
                let orig_links: BTreeSet<(String, String)> = orig.links().into_iter().collect();
                if orig_links == comp_links {
                    out.push((*orig).clone());
                    continue;
                }
            }
        }
        let latest_intent = new_nodes
            .iter()
            .chain(&old_nodes)
            .filter_map(|n| intent_ops.get(n))
            .max_by_key(|(pos, _)| *pos)
            .map(|(_, i)| *i);
        let intents: BTreeSet<EditIntent> = match latest_intent {
            Some(i) => i.into_iter().collect(),
            None => {
                let union: BTreeSet<EditIntent> = new_nodes
                    .iter()
                    .chain(&old_nodes)
                    .filter_map(|n| node_owner.get(n))
                    .flat_map(|e| e.intents.iter().copied())
                    .collect();
                if union.len() == 1 { union } else { BTreeSet::new() }
            }
        };
        let mut edit = edit_from_component(
            Granularity::Sentence,
            new_nodes,
            old_nodes,
            &comp_links,
            old,
            new,
            &overrides,
            Provenance::Human,
        )?;
        edit.intents = intents;
        out.push(edit);
    }
    sort_edits(&mut out, old, new);
    Ok(out)
}

/// Lift sentence edits to paragraph or section granularity.
///
/// Containers are connected through the links of the sentence edits. An added or
/// deleted sentence attaches its container to the counterpart container sharing the most
/// unrevised (identical) sentences with it; a container with no counterpart at all was
/// added or deleted as a whole. Each connected group of containers becomes one lifted
/// edit whose action follows from its topology and whose intents are the union of its
/// members' intents.
pub fn lift_edits(
    sentence_edits: &[Edit],
    target: Granularity,
    old: &DocumentGraph,
    new: &DocumentGraph,
) -> Vec<Edit> {
    assert!(
        matches!(target, Granularity::Paragraph | Granularity::Section),
        "lift target must be Paragraph or Section"
    );
    if sentence_edits.is_empty() {
        return Vec::new();
    }
    let container = |g: &DocumentGraph, id: &str| g.container(id, target).map(|n| n.id.clone());

    // Unrevised sentences pair up greedily by identical text.
    let edited: BTreeSet<&String> = sentence_edits.iter().flat_map(|e| e.nodes()).collect();
    let mut old_free: Vec<(String, String)> = old
        .sentences()
        .filter(|s| !edited.contains(&s.id))
        .map(|s| (s.id.clone(), collapse_whitespace(&s.text)))
        .collect();
    let mut identical: Vec<(String, String)> = Vec::new();
    for s in new.sentences().filter(|s| !edited.contains(&s.id)) {
        let t = collapse_whitespace(&s.text);
        if let Some(k) = old_free.iter().position(|(_, ot)| *ot == t) {
            let (oid, _) = old_free.remove(k);
            identical.push((s.id.clone(), oid));
        }
    }
    let mut shared: BTreeMap<(bool, String), BTreeMap<String, usize>> = BTreeMap::new();
    for (n, o) in &identical {
        if let (Some(cn), Some(co)) = (container(new, n), container(old, o)) {
            *shared.entry((true, cn.clone())).or_default().entry(co.clone()).or_default() += 1;
            *shared.entry((false, co)).or_default().entry(cn).or_default() += 1;
        }
    }

    let mut uf = UnionFind::default();
    let mut slot: BTreeMap<(bool, String), usize> = BTreeMap::new();
    let mut get = |uf: &mut UnionFind, key: (bool, String)| *slot.entry(key).or_insert_with(|| uf.add());
    let mut container_links: BTreeSet<(String, String)> = BTreeSet::new();
    let mut member_of: Vec<((bool, String), &Edit)> = Vec::new();

    for e in sentence_edits {
        let cn: BTreeSet<String> = e.new_nodes.iter().filter_map(|n| container(new, n)).collect();
        let co: BTreeSet<String> = e.old_nodes.iter().filter_map(|o| container(old, o)).collect();
        for (n, o) in e.links() {
            if let (Some(a), Some(b)) = (container(new, &n), container(old, &o)) {
                container_links.insert((a, b));
            }
        }
        let keys: Vec<(bool, String)> =
            cn.into_iter().map(|c| (true, c)).chain(co.into_iter().map(|c| (false, c))).collect();
        let Some(first) = keys.first().cloned() else { continue };
        let a = get(&mut uf, first.clone());
        for k in &keys[1..] {
            let b = get(&mut uf, k.clone());
            uf.union(a, b);
        }
        if e.new_nodes.is_empty() || e.old_nodes.is_empty() {
            // attach an added/deleted sentence's container to its best counterpart
            if let Some(counts) = shared.get(&first) {
                let best = counts
                    .iter()
                    .max_by(|x, y| x.1.cmp(y.1).then_with(|| y.0.cmp(x.0)))
                    .map(|(c, _)| c.clone());
                if let Some(best) = best {
                    let b = get(&mut uf, (!first.0, best.clone()));
                    uf.union(a, b);
                    let link = if first.0 { (first.1.clone(), best) } else { (best, first.1.clone()) };
                    container_links.insert(link);
                }
            }
        }
        member_of.push((first, e));
    }

    type Group<'a> = (BTreeSet<String>, BTreeSet<String>, Vec<&'a Edit>);
    let mut groups: BTreeMap<usize, Group> = BTreeMap::new();
    let slots: Vec<((bool, String), usize)> = slot.iter().map(|(k, v)| (k.clone(), *v)).collect();
    for ((is_new, id), s) in slots {
        let root = uf.find(s);
        let g = groups.entry(root).or_default();
        if is_new {
            g.0.insert(id);
        } else {
            g.1.insert(id);
        }
    }
    for (key, e) in member_of {
        let root = uf.find(slot[&key]);
        groups.get_mut(&root).expect("member group").2.push(e);
    }

    let mut out = Vec::new();
    for (new_nodes, old_nodes, members) in groups.into_values() {
        let links: BTreeSet<(String, String)> = container_links
            .iter()
            .filter(|(n, o)| new_nodes.contains(n) && old_nodes.contains(o))
            .cloned()
            .collect();
        let provenance = members
            .iter()
            .map(|e| e.provenance)
            .max_by_key(|p| match p {
                Provenance::Auto => 0,
                Provenance::LlmAssisted => 1,
                Provenance::Human => 2,
            })
            .unwrap_or(Provenance::Auto);
        let intents: BTreeSet<EditIntent> = members.iter().flat_map(|e| e.intents.iter().copied()).collect();
        let Ok(mut edit) = edit_from_component(
            target,
            new_nodes,
            old_nodes,
            &links,
            old,
            new,
            &BTreeMap::new(),
            provenance,
        ) else {
            continue;
        };
        edit.intents = intents;
        out.push(edit);
    }
    sort_edits(&mut out, old, new);
    out
}
