//! Correct an automatic alignment by hand, label it, and lift it to paragraphs.
//!
//! cargo run --example corrections

use revgraph::edits::{apply_corrections, lift_edits, Correction};
use revgraph::model::{DocVersion, DocumentGraph, DocumentRecord, EditIntent, Granularity, ParagraphRecord, SectionRecord};

fn doc(version: DocVersion, paras: &[&[&str]]) -> DocumentGraph {
    let paras = paras
        .iter()
        .map(|s| {
            let mut p = ParagraphRecord::new(s.join(" "));
            p.sentences = Some(s.iter().map(|x| x.to_string()).collect());
            p
        })
        .collect();
    let record = DocumentRecord { schema_version: 1, doc_id: "d".into(), version, sections: vec![SectionRecord::new("Method", paras)] };
    DocumentGraph::build(&record).expect("valid document")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let old = doc(DocVersion::Old, &[&["We use a tagger trained on news text and evaluate it on tweets."], &["It is fast."]]);
    let new = doc(DocVersion::New, &[&["We use a tagger trained on news text.", "We evaluate it on tweets."], &["It is fast."]]);
    let ops = vec![
        Correction::AddLink { new: "d:new:p0.s0".into(), old: "d:old:p0.s0".into() },
        Correction::AddLink { new: "d:new:p0.s1".into(), old: "d:old:p0.s0".into() },
        Correction::SetIntent { node: "d:new:p0.s0".into(), intent: Some(EditIntent::Clarity) },
    ];
    let edits = apply_corrections(&[], &ops, &old, &new)?;
    for e in &edits {
        println!("sentence  {:<6} {:?} {}", e.action.as_str(), e.intents, e.id);
    }
    for e in lift_edits(&edits, Granularity::Paragraph, &old, &new) {
        println!("paragraph {:<6} {:?} {}", e.action.as_str(), e.intents, e.id);
    }
    Ok(())
}
