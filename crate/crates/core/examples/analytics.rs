//! Corpus analytics over an annotated corpus: edit ratios, label distribution,
//! positional histogram, request uptake and annotator agreement.
//!
//! cargo run --example analytics [-- path/to/manifest.json]

use std::path::PathBuf;

use revgraph::analytics::{analyze_corpus, crest_factor, krippendorff_alpha, DocumentInput};
use revgraph::corpus::{annotator_matrix, load_corpus};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let manifest = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mini/manifest.json"));
    let corpus = load_corpus(&manifest)?;
    let docs: Vec<DocumentInput> = corpus
        .pairs
        .iter()
        .map(|p| DocumentInput { old: &p.old, new: &p.new, edits: &p.edits, requests: &p.requests, links: &p.links })
        .collect();
    let report = analyze_corpus(&docs, 10)?;
    println!("documents             {}", report.documents);
    println!("mean edit ratio       {:.2}%", 100.0 * report.mean_edit_ratio);
    println!("mean semantic ratio   {:.2}%", 100.0 * report.mean_semantic_edit_ratio);
    println!("actions               {:?}", report.label_distribution.action);
    println!("intents               {:?}", report.label_distribution.intent);
    for (action, bins) in &report.positional_histogram.by_action {
        println!("position {action:<8}     {bins:?}");
    }
    for (kind, u) in &report.request_impact {
        println!("{kind:?}: {} requests, {:.0}% acted on", u.requests, 100.0 * (1.0 - u.not_acted));
    }
    for d in &report.per_document {
        println!("{:<8} cf(paragraph) = {:?}", d.doc_id, d.cf_paragraph);
    }
    println!("cf([0 x10, 2, 12, 0 x4]) = {:.4}", crest_factor(&[0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 2, 12, 0, 0, 0, 0])?);
    println!("labeling alpha        {:.3}", krippendorff_alpha(&annotator_matrix(&corpus))?);
    Ok(())
}
