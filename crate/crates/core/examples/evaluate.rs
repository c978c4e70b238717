//! Score model answers against gold labels and compare with the random baseline.
//!
//! cargo run --example evaluate

use revgraph::llm::{evaluate, parse_verdict, random_baseline, TaskKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let labels = TaskKind::Intent.labels();
    let gold: Vec<String> = ["Grammar", "Clarity", "Claim", "Fact/Evidence", "Other", "Clarity"].map(String::from).to_vec();
    let answers = [
        "LABEL: Grammar REASON: agreement fixed",
        "REASON: wording is clearer\nLABEL: clarity",
        "LABEL: Fact/Evidence REASON: numbers changed",
        "LABEL:Fact/Evidence REASON:",
        "I am not sure.",
        "LABEL: Clarity REASON: rephrased",
    ];
    let predictions: Vec<Option<String>> =
        answers.iter().map(|a| parse_verdict(a, labels).ok().map(|v| v.label)).collect();
    let r = evaluate(&predictions, &gold, labels)?;
    println!("accuracy {:.3}, macro F1 {:.3}", r.accuracy, r.macro_f1);
    println!("{:>14} {}", "", r.columns.join(" | "));
    for (label, row) in r.labels.iter().zip(&r.counts) {
        println!("{label:>14} {row:?}");
    }
    let random = evaluate(&random_baseline(gold.len() * 1000, labels, 7), &gold.iter().cycle().take(gold.len() * 1000).cloned().collect::<Vec<_>>(), labels)?;
    println!("random baseline accuracy {:.3}", random.accuracy);
    Ok(())
}
