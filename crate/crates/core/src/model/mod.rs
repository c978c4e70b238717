//! Intertextual document model: document graphs for the old and new versions of a
//! document (plus reviews and responses), cross-version edits, review requests and the
//! links between edits and review/response sentences.

mod graph;
mod types;
mod validate;

use thiserror::Error;

pub use graph::{
    collapse_whitespace, normalize_text, DocumentGraph, DocumentRecord, ParagraphRecord,
    SectionRecord, TextNode, SCHEMA_VERSION,
};
pub use types::{
    ContentSublabel, CrossLink, CrossLinkKind, DocVersion, Edit, EditAction, EditIntent,
    Granularity, LinkLabel, Provenance, RequestKind, ReviewRequest,
};
pub use validate::{validate_edit, validate_edit_set, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("empty document")]
    EmptyDocument,
    #[error("duplicate node id {0}")]
    DuplicateId(String),
    #[error("empty text in non-container node {0}")]
    EmptyText(String),
    #[error("protected node {0} cannot have sentence children")]
    ProtectedSegmented(String),
    #[error("schema error: {0}")]
    Schema(String),
}
