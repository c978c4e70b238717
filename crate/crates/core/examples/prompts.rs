//! Build in-context learning prompts: dynamic demonstration selection, rationale order,
//! token budgets, and a chunked summarization plan.
//!
//! cargo run --example prompts

use revgraph::llm::{
    build_prompt, build_summary_prompt, default_demos, select_demos, DemoIndex, DemoMethod, DemoOrdering, DemoSelector,
    Example, PromptConfig, RationaleOrder, SummaryEdit, SummaryPlan, TaskKind,
};
use revgraph::model::{EditAction, EditIntent};
use revgraph::similarity::TrigramEmbedder;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let embedder = TrigramEmbedder::default();
    let pool = vec![
        Example::pair("p1", "The model are trained on news.", "The model is trained on news.").labeled("Grammar", None),
        Example::pair("p2", "We train for 10 epochs.", "We train for 20 epochs.").labeled("Fact/Evidence", None),
        Example::pair("p3", "It works.", "It clearly outperforms all baselines.").labeled("Claim", None),
    ];
    let index = DemoIndex::new(pool, &embedder)?;
    let item = Example::pair("q", "The results is shown below.", "The results are shown below.");
    let selector = DemoSelector { method: DemoMethod::Cat, n: 1, with_defaults: false, ordering: DemoOrdering::DefThenDyn };
    let sel = select_demos(&selector, &item, Some(&index), &default_demos(TaskKind::Intent), &embedder)?;
    let cfg = PromptConfig { rationale_order: RationaleOrder::RL, max_tokens: Some(2000) };
    let bundle = build_prompt(TaskKind::Intent, &item, &sel.demos, &cfg)?;
    println!("{}\n\n(~{} tokens)\n", bundle.render(), bundle.estimated_tokens());

    let edits: Vec<SummaryEdit> = (0..12)
        .map(|k| SummaryEdit {
            old: Some(format!("Old sentence number {k} with some words.")),
            new: Some(format!("New sentence number {k} with other words.")),
            action: EditAction::Modify,
            intent: Some(if k % 2 == 0 { EditIntent::Clarity } else { EditIntent::Claim }),
            section: format!("Section {}", k / 4),
        })
        .collect();
    match build_summary_prompt(&edits, Some(300))? {
        SummaryPlan::Single(b) => println!("summary fits in one prompt (~{} tokens)", b.estimated_tokens()),
        SummaryPlan::Chunked { chunks, .. } => {
            let sizes: Vec<usize> = chunks.iter().map(|c| c.estimated_tokens()).collect();
            println!("summary split into {} chunks of ~{sizes:?} tokens, plus a merge step", chunks.len());
        }
    }
    Ok(())
}
