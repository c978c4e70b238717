use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::graph::DocumentGraph;
use super::types::{Edit, EditAction, Granularity};
use crate::edits::derive_action;

/// A violated edit invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    EmptyEdit,
    DanglingNode { id: String },
    GranularityMismatch { node: String, found: Granularity, expected: Granularity },
    TopologyActionMismatch { found: EditAction, expected: EditAction },
    IntentCardinality { count: usize },
    SublabelOutsideEdit { new: String, old: String },
    UnexpectedSublabels,
    MissingSublabels,
    NodeInMultipleEdits { id: String },
    DuplicateEditId { id: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyEdit => write!(f, "empty edit"),
            Violation::DanglingNode { id } => write!(f, "dangling node {id}"),
            Violation::GranularityMismatch { node, found, expected } => {
                write!(f, "granularity mismatch: {node} is {found}, edit is {expected}")
            }
            Violation::TopologyActionMismatch { expected, .. } => {
                write!(f, "topology/action mismatch: expected {expected}")
            }
            Violation::IntentCardinality { count } => {
                write!(f, "sentence edit carries {count} intents, at most one allowed")
            }
            Violation::SublabelOutsideEdit { new, old } => {
                write!(f, "sublabel link {new}->{old} references nodes outside the edit")
            }
            Violation::UnexpectedSublabels => write!(f, "sublabels on a non-partition edit"),
            Violation::MissingSublabels => write!(f, "partition edit without link sublabels"),
            Violation::NodeInMultipleEdits { id } => write!(f, "node {id} occurs in multiple edits"),
            Violation::DuplicateEditId { id } => write!(f, "duplicate edit id {id}"),
        }
    }
}

/// Check one edit against the two document versions. Returns every violation found.
///
/// Unlabeled sentence edits (no intent yet) are valid; labeled ones carry exactly one
/// intent. Lifted paragraph and section edits may carry an intent set.
pub fn validate_edit(edit: &Edit, old: &DocumentGraph, new: &DocumentGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    if edit.new_nodes.is_empty() && edit.old_nodes.is_empty() {
        out.push(Violation::EmptyEdit);
        return out;
    }
    let sides = [(&edit.new_nodes, new), (&edit.old_nodes, old)];
    for (ids, graph) in sides {
        for id in ids {
            match graph.node(id) {
                None => out.push(Violation::DanglingNode { id: id.clone() }),
                Some(n) if n.granularity != edit.granularity => {
                    out.push(Violation::GranularityMismatch {
                        node: id.clone(),
                        found: n.granularity,
                        expected: edit.granularity,
                    })
                }
                Some(_) => {}
            }
        }
    }
    if let Ok(expected) = derive_action(edit.new_nodes.len(), edit.old_nodes.len()) {
        if expected != edit.action {
            out.push(Violation::TopologyActionMismatch { found: edit.action, expected });
        }
    }
    if edit.granularity <= Granularity::Sentence && edit.intents.len() > 1 {
        out.push(Violation::IntentCardinality { count: edit.intents.len() });
    }
    if edit.action.is_partition() {
        if edit.sublabels.is_empty() {
            out.push(Violation::MissingSublabels);
        }
        for l in &edit.sublabels {
            if !edit.new_nodes.contains(&l.new) || !edit.old_nodes.contains(&l.old) {
                out.push(Violation::SublabelOutsideEdit { new: l.new.clone(), old: l.old.clone() });
            }
        }
    } else if !edit.sublabels.is_empty() {
        out.push(Violation::UnexpectedSublabels);
    }
    out
}

/// Validate a whole edit set: every edit individually plus the partition property (each
/// node occurs in at most one edit) and id uniqueness. Violations are keyed by edit id.
pub fn validate_edit_set(
    edits: &[Edit],
    old: &DocumentGraph,
    new: &DocumentGraph,
) -> Vec<(String, Violation)> {
    let mut out = Vec::new();
    let mut owner: HashMap<&str, &str> = HashMap::new();
    let mut ids = BTreeSet::new();
    for e in edits {
        if !ids.insert(e.id.as_str()) {
            out.push((e.id.clone(), Violation::DuplicateEditId { id: e.id.clone() }));
        }
        for v in validate_edit(e, old, new) {
            out.push((e.id.clone(), v));
        }
        for n in e.nodes() {
            if owner.insert(n.as_str(), e.id.as_str()).is_some() {
                out.push((e.id.clone(), Violation::NodeInMultipleEdits { id: n.clone() }));
            }
        }
    }
    out
}
