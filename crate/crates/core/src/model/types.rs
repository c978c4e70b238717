use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Scope of a text element. Ordered so that `Section > Paragraph > Sentence > Subsentence`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Granularity {
    Subsentence,
    Sentence,
    Paragraph,
    Section,
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Granularity::Section => "Section",
            Granularity::Paragraph => "Paragraph",
            Granularity::Sentence => "Sentence",
            Granularity::Subsentence => "Subsentence",
        };
        f.write_str(s)
    }
}

/// Which role a document graph plays in a revision cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocVersion {
    Old,
    New,
    Review,
    Response,
}

impl DocVersion {
    pub fn as_str(self) -> &'static str {
        match self {
            DocVersion::Old => "old",
            DocVersion::New => "new",
            DocVersion::Review => "review",
            DocVersion::Response => "response",
        }
    }
}

impl fmt::Display for DocVersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How an edit was executed, determined by its new-to-old link topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EditAction {
    Add,
    Delete,
    Modify,
    Merge,
    Split,
    Fusion,
}

impl EditAction {
    pub const ALL: [EditAction; 6] = [
        EditAction::Add,
        EditAction::Delete,
        EditAction::Modify,
        EditAction::Merge,
        EditAction::Split,
        EditAction::Fusion,
    ];

    /// Merge, Split and Fusion are partition changes; their individual links carry a
    /// [`ContentSublabel`].
    pub fn is_partition(self) -> bool {
        matches!(self, EditAction::Merge | EditAction::Split | EditAction::Fusion)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EditAction::Add => "Add",
            EditAction::Delete => "Delete",
            EditAction::Modify => "Modify",
            EditAction::Merge => "Merge",
            EditAction::Split => "Split",
            EditAction::Fusion => "Fusion",
        }
    }
}

impl fmt::Display for EditAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whether a single link inside a partition edit changed the linked content.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ContentSublabel {
    Modify,
    Identical,
}

/// Why an edit was made.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EditIntent {
    Grammar,
    Clarity,
    #[serde(rename = "Fact/Evidence", alias = "FactEvidence")]
    FactEvidence,
    Claim,
    Other,
}

impl EditIntent {
    pub const ALL: [EditIntent; 5] = [
        EditIntent::Grammar,
        EditIntent::Clarity,
        EditIntent::FactEvidence,
        EditIntent::Claim,
        EditIntent::Other,
    ];

    /// Fact/Evidence and Claim change meaning; Grammar and Clarity only touch the surface.
    pub fn is_semantic(self) -> bool {
        matches!(self, EditIntent::FactEvidence | EditIntent::Claim)
    }

    /// Display label as used in prompts and reports.
    pub fn label(self) -> &'static str {
        match self {
            EditIntent::Grammar => "Grammar",
            EditIntent::Clarity => "Clarity",
            EditIntent::FactEvidence => "Fact/Evidence",
            EditIntent::Claim => "Claim",
            EditIntent::Other => "Other",
        }
    }
}

impl fmt::Display for EditIntent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Provenance {
    Auto,
    Human,
    LlmAssisted,
}

/// One new-to-old link of a partition edit together with its content label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinkLabel {
    pub new: String,
    pub old: String,
    pub label: ContentSublabel,
}

/// A cross-version edit: a set of new-version nodes linked to a set of old-version
/// nodes at one granularity, labeled with action and intent.
///
/// Add edits have no old nodes, Delete edits no new nodes. For partition actions the
/// individual links are listed in `sublabels`; for every other action the links are the
/// full product `new_nodes × old_nodes` (which is at most one link).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub id: String,
    #[serde(default)]
    pub new_nodes: BTreeSet<String>,
    #[serde(default)]
    pub old_nodes: BTreeSet<String>,
    pub granularity: Granularity,
    pub action: EditAction,
    #[serde(default)]
    pub sublabels: Vec<LinkLabel>,
    #[serde(default)]
    pub intents: BTreeSet<EditIntent>,
    pub provenance: Provenance,
}

impl Edit {
    /// Stable id derived from the node sets; unique within any partition-respecting edit set.
    pub fn canonical_id(new_nodes: &BTreeSet<String>, old_nodes: &BTreeSet<String>) -> String {
        let join = |s: &BTreeSet<String>| s.iter().map(String::as_str).collect::<Vec<_>>().join(",");
        format!("[{}]~[{}]", join(new_nodes), join(old_nodes))
    }

    pub fn add(granularity: Granularity, new: impl Into<String>, provenance: Provenance) -> Self {
        Self::from_sets(granularity, EditAction::Add, [new.into()].into(), BTreeSet::new(), provenance)
    }

    pub fn delete(granularity: Granularity, old: impl Into<String>, provenance: Provenance) -> Self {
        Self::from_sets(granularity, EditAction::Delete, BTreeSet::new(), [old.into()].into(), provenance)
    }

    pub fn modify(
        granularity: Granularity,
        new: impl Into<String>,
        old: impl Into<String>,
        provenance: Provenance,
    ) -> Self {
        Self::from_sets(
            granularity,
            EditAction::Modify,
            [new.into()].into(),
            [old.into()].into(),
            provenance,
        )
    }

    pub fn from_sets(
        granularity: Granularity,
        action: EditAction,
        new_nodes: BTreeSet<String>,
        old_nodes: BTreeSet<String>,
        provenance: Provenance,
    ) -> Self {
        Edit {
            id: Edit::canonical_id(&new_nodes, &old_nodes),
            new_nodes,
            old_nodes,
            granularity,
            action,
            sublabels: Vec::new(),
            intents: BTreeSet::new(),
            provenance,
        }
    }

    pub fn with_intent(mut self, intent: EditIntent) -> Self {
        self.intents.insert(intent);
        self
    }

    /// Links of this edit as `(new, old)` pairs.
    pub fn links(&self) -> Vec<(String, String)> {
        if !self.sublabels.is_empty() {
            return self.sublabels.iter().map(|l| (l.new.clone(), l.old.clone())).collect();
        }
        let mut out = Vec::with_capacity(self.new_nodes.len() * self.old_nodes.len());
        for n in &self.new_nodes {
            for o in &self.old_nodes {
                out.push((n.clone(), o.clone()));
            }
        }
        out
    }

    pub fn nodes(&self) -> impl Iterator<Item = &String> {
        self.new_nodes.iter().chain(self.old_nodes.iter())
    }

    pub fn is_semantic(&self) -> bool {
        self.intents.iter().any(|i| i.is_semantic())
    }
}

/// Category of a review sentence with respect to revision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RequestKind {
    ExplicitEdit,
    ImplicitEdit,
    GeneralWeakness,
    NonRequest,
}

impl RequestKind {
    /// Kinds that count as requests; `NonRequest` is excluded.
    pub const REQUESTS: [RequestKind; 3] =
        [RequestKind::ExplicitEdit, RequestKind::ImplicitEdit, RequestKind::GeneralWeakness];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewRequest {
    pub sentence_id: String,
    pub kind: RequestKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CrossLinkKind {
    ReviewToEdit,
    ResponseToEdit,
}

/// Link from an edit to a review sentence (that prompted it) or to a response sentence
/// (that summarizes it).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CrossLink {
    pub kind: CrossLinkKind,
    pub edit_id: String,
    pub sentence_id: String,
}
