//! Split raw paragraphs into sentences with the rule-based segmenter.
//!
//! cargo run --example segment

use revgraph::model::{DocVersion, DocumentGraph, DocumentRecord, ParagraphRecord, SectionRecord};
use revgraph::segment::{segment_document, NaiveSegmenter, RuleSegmenter};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let record = DocumentRecord {
        schema_version: 1,
        doc_id: "demo".into(),
        version: DocVersion::Old,
        sections: vec![SectionRecord::new(
            "Introduction",
            vec![ParagraphRecord::new(
                "We follow Smith et al. in using e.g. BERT. Accuracy is 93.5% on the test set! Is it enough? See Fig. 2 for details.",
            )],
        )],
    };
    let graph = DocumentGraph::build(&record)?;
    let rule = RuleSegmenter::default();
    let segmented = segment_document(&graph, &[&rule, &NaiveSegmenter])?;
    for s in segmented.sentences() {
        println!("{:<22} {}", s.id, s.text);
    }
    Ok(())
}
