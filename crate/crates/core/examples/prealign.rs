//! Sentence pre-alignment of two versions, with fixed embeddings so the result is
//! reproducible: one Modify, one Add, one Delete.
//!
//! cargo run --example prealign

use std::path::Path;

use revgraph::align::{prealign, AlignConfig};
use revgraph::corpus::load_document;
use revgraph::similarity::TableEmbedder;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/three");
    let old = load_document(&dir.join("old.json"))?;
    let new = load_document(&dir.join("new.json"))?;
    let embedder = TableEmbedder::load(&dir.join("embeddings.json"))?;
    let edits = prealign(&old, &new, &AlignConfig::default(), &embedder)?;
    for e in &edits {
        let text = |g: &revgraph::model::DocumentGraph, ids: &std::collections::BTreeSet<String>| {
            ids.iter().filter_map(|id| g.node(id)).map(|n| n.text.as_str()).collect::<Vec<_>>().join(" | ")
        };
        println!("{:<7} {:?} -> {:?}", e.action.as_str(), text(&old, &e.old_nodes), text(&new, &e.new_nodes));
    }
    Ok(())
}
