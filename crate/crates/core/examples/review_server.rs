//! Serve the review API over a corpus on http://127.0.0.1:8080.
//!
//! cargo run --example review_server [-- path/to/manifest.json]
//!
//! curl localhost:8080/pairs
//! curl localhost:8080/pairs/alpha/analytics
//! curl -X POST localhost:8080/pairs/alpha/labels -H 'content-type: application/json' \
//!   -d '{"expected_revision":0,"labels":[{"edit_id":"[alpha:new:p0.s1]~[alpha:old:p0.s1]","intent":"Clarity"}]}'

use std::path::PathBuf;
use std::sync::Arc;

use revgraph::align::AlignConfig;
use revgraph::corpus::load_corpus;
use revgraph::service::{serve, Store};
use revgraph::similarity::TrigramEmbedder;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    tracing_subscriber::fmt().with_env_filter("info").init();
    let manifest = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mini/manifest.json"));
    let corpus = load_corpus(&manifest)?;
    let journal = std::env::temp_dir().join("revgraph-example-journal");
    let store = Store::open(corpus, &journal, &AlignConfig::default(), &TrigramEmbedder::default())?;
    println!("journal in {}", journal.display());
    serve(Arc::new(store), "127.0.0.1:8080".parse()?, None).await?;
    Ok(())
}
