//! Build seeded train/test datasets for intent labeling, alignment and review requests.
//!
//! cargo run --example datasets

use std::path::Path;

use revgraph::corpus::{
    build_alignment_dataset, build_request_dataset, load_corpus, split_intent_dataset, REQUEST_NEGATIVE_RATIO,
};
use revgraph::similarity::TrigramEmbedder;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = load_corpus(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mini/manifest.json"))?;
    let seed = corpus.seed;

    let intent = split_intent_dataset(&corpus, seed);
    println!("split: train {:?}, test {:?}", intent.split.train, intent.split.test);
    println!("intent: {} train / {} test items", intent.train.len(), intent.test.len());

    let alignment = build_alignment_dataset(&corpus, &TrigramEmbedder::default(), seed)?;
    let negatives = alignment.test.iter().filter(|s| !s.is_pair).count();
    println!("alignment: {} test samples, {negatives} negatives", alignment.test.len());
    if let Some(s) = alignment.test.iter().find(|s| !s.is_pair) {
        println!("  negative: {:?} vs {:?}", s.new, s.old);
    }

    let requests = build_request_dataset(&corpus, REQUEST_NEGATIVE_RATIO, seed)?;
    for s in requests.train.iter().chain(&requests.test).take(4) {
        println!("request {:<5} {}", s.is_request, s.text);
    }
    Ok(())
}
