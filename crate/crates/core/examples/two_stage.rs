//! Two-stage alignment: pre-alignment, then a chat model verifies leftover Add/Delete
//! pairs. A mock model stands in for a real endpoint here.
//!
//! cargo run --example two_stage

use revgraph::align::{two_stage_align, AlignConfig};
use revgraph::llm::{LlmJudge, MockProvider};
use revgraph::model::{DocVersion, DocumentGraph, DocumentRecord, ParagraphRecord, SectionRecord};
use revgraph::similarity::TrigramEmbedder;

fn doc(version: DocVersion, sentences: &[&str]) -> DocumentGraph {
    let mut p = ParagraphRecord::new(sentences.join(" "));
    p.sentences = Some(sentences.iter().map(|s| s.to_string()).collect());
    let record = DocumentRecord { schema_version: 1, doc_id: "d".into(), version, sections: vec![SectionRecord::new("Results", vec![p])] };
    DocumentGraph::build(&record).expect("valid document")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let old = doc(DocVersion::Old, &["Our approach yields better scores than prior work.", "We thank the reviewers."]);
    let new = doc(DocVersion::New, &["The proposed method outperforms earlier approaches.", "We thank the reviewers."]);
    // the mock answers "yes" to every pair; a real run would use OpenAiCompatible
    let model = MockProvider::constant("LABEL: yes REASON: Both sentences state the same finding.");
    let judge = LlmJudge::with_defaults(&model);
    let cfg = AlignConfig { t0: 10.0, ..AlignConfig::default() };
    let r = two_stage_align(&old, &new, &cfg, &TrigramEmbedder::default(), &judge)?;
    println!("queried {}, accepted {}, model calls {}", r.queried, r.accepted, model.calls());
    for e in &r.edits {
        println!("{:<7} {:?} {}", e.action.as_str(), e.provenance, e.id);
    }
    Ok(())
}
