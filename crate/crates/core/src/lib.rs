//! Revision analysis over intertextual document graphs.
//!
//! Old and new versions of a document are parsed into graphs of sections, paragraphs and
//! sentences; edits connect the two versions. The crate covers segmentation, automatic
//! sentence alignment, correction and lifting of edits, descriptive analytics, LLM-backed
//! labeling, corpus I/O and a small HTTP service for human review.

pub mod align;
pub mod analytics;
pub mod corpus;
pub mod edits;
pub mod llm;
pub mod model;
pub mod segment;
pub mod service;
pub mod similarity;
