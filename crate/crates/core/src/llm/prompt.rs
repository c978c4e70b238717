//! Deterministic prompt construction for intent classification, alignment verification,
//! review-request extraction and edit summarization.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{EditAction, EditIntent};

pub const INTENT_SYSTEM: &str = "You are a helpful, respectful and honest revision analysis assistant. You will read two versions of texts. Your task is to analyze the revision intent behind the difference between the two texts. The intent can be one of the following labels: fix grammar (Grammar), improve clarity (Clarity), change claim or statement (Claim), change factual information (Fact/Evidence). Grammar and Clarity are more about surface language improvements, while Fact/Evidence and Claim are more about meaning changes. If none of the above labels are relevant, please answer with 'Other'.";

pub const INTENT_TASK: &str = "Read the following old and new texts. What is the intent of the revision? Please answer with one of the labels: Grammar, Clarity, Claim, Fact/Evidence and Other. Please always answer with the template and fill the template with your answer without additional texts: LABEL:<your answer> REASON:<your answer>.";

pub const INTENT_ADD_DELETE_TASK: &str = "Read the following old and new texts. One of them is empty because a sentence was added or deleted. What is the intent of the revision? Please answer with one of the labels: Claim, Fact/Evidence and Other. Please always answer with the template and fill the template with your answer without additional texts: LABEL:<your answer> REASON:<your answer>.";

pub const ALIGNMENT_SYSTEM: &str = "You are a helpful, respectful and honest revision analysis assistant. You will read a sentence from an old version and a sentence from a new version of a document. Your task is to decide whether the new sentence is a revised version of the old sentence, that is, whether the two sentences form a revision pair. Answer 'yes' if they do and 'no' if they do not, even when they address a similar topic.";

pub const ALIGNMENT_TASK: &str = "Read the following old and new texts. Is the new text a revised version of the old text? Please answer with one of the labels: yes and no. Please always answer with the template and fill the template with your answer without additional texts: LABEL:<your answer> REASON:<your answer>.";

pub const REQUEST_SYSTEM: &str = "You are a helpful, respectful and honest revision analysis assistant. You will read a sentence from a peer review of a scientific paper. Your task is to decide whether the sentence could prompt the authors to revise the paper: an explicit or implicit suggestion for a change, or a comment on a weakness. Answer 'yes' if it could and 'no' otherwise.";

pub const REQUEST_TASK: &str = "Read the following review sentence. Could it prompt a revision of the paper? Please answer with one of the labels: yes and no. Please always answer with the template and fill the template with your answer without additional texts: LABEL:<your answer> REASON:<your answer>.";

pub const SUMMARY_SYSTEM: &str = "You are a helpful, respectful and honest revision analysis assistant. You will read the complete list of sentence edits made between two versions of a scientific document. Each edit lists the old text, the new text, its edit action, its edit intent and the title of the section it belongs to.";

pub const SUMMARY_TASK: &str = "Please write a coherent textual summary of the document edits.";

pub const SUMMARY_CHUNK_TASK: &str = "These edits are one part of a longer list. Please write a coherent textual summary of the document edits in this part.";

pub const SUMMARY_MERGE_TASK: &str = "The following texts summarize consecutive parts of the edits made to one document. Please merge them into a single coherent textual summary of the document edits.";

/// Placeholder for the missing side of an added or deleted sentence.
pub const EMPTY_TEXT: &str = "(none)";

pub const INTENT_LABELS: [&str; 5] = ["Grammar", "Clarity", "Claim", "Fact/Evidence", "Other"];
pub const ADD_DELETE_LABELS: [&str; 3] = ["Claim", "Fact/Evidence", "Other"];
pub const YES_NO_LABELS: [&str; 2] = ["yes", "no"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    /// Intent of a revision pair (five labels).
    Intent,
    /// Intent of an added or deleted sentence (three labels).
    IntentAddDelete,
    Alignment,
    Request,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] = [TaskKind::Intent, TaskKind::IntentAddDelete, TaskKind::Alignment, TaskKind::Request];

    pub fn labels(self) -> &'static [&'static str] {
        match self {
            TaskKind::Intent => &INTENT_LABELS,
            TaskKind::IntentAddDelete => &ADD_DELETE_LABELS,
            TaskKind::Alignment | TaskKind::Request => &YES_NO_LABELS,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Intent => "intent",
            TaskKind::IntentAddDelete => "intent_add_delete",
            TaskKind::Alignment => "alignment",
            TaskKind::Request => "request",
        }
    }

    fn system(self) -> &'static str {
        match self {
            TaskKind::Intent | TaskKind::IntentAddDelete => INTENT_SYSTEM,
            TaskKind::Alignment => ALIGNMENT_SYSTEM,
            TaskKind::Request => REQUEST_SYSTEM,
        }
    }

    fn task(self) -> &'static str {
        match self {
            TaskKind::Intent => INTENT_TASK,
            TaskKind::IntentAddDelete => INTENT_ADD_DELETE_TASK,
            TaskKind::Alignment => ALIGNMENT_TASK,
            TaskKind::Request => REQUEST_TASK,
        }
    }
}

impl std::str::FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskKind::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown task `{s}` (expected intent, intent_add_delete, alignment or request)"))
    }
}

/// Where the rationale goes relative to the gold label in a demonstration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RationaleOrder {
    /// Label, then reason.
    #[default]
    LR,
    /// Reason, then label.
    RL,
    /// Label only.
    None,
}

/// A task instance or a demonstration. Request items carry the review sentence in `new`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    #[serde(default)]
    pub id: String,
    #[serde(default)]
    pub old: Option<String>,
    #[serde(default)]
    pub new: Option<String>,
    #[serde(default)]
    pub old_section: Option<String>,
    #[serde(default)]
    pub new_section: Option<String>,
    /// Gold label; required for demonstrations.
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub reason: Option<String>,
}

impl Example {
    pub fn pair(id: impl Into<String>, old: impl Into<String>, new: impl Into<String>) -> Self {
        Example { id: id.into(), old: Some(old.into()), new: Some(new.into()), ..Example::default() }
    }

    pub fn labeled(mut self, label: impl Into<String>, reason: Option<&str>) -> Self {
        self.label = Some(label.into());
        self.reason = reason.map(str::to_string);
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptConfig {
    pub rationale_order: RationaleOrder,
    /// Budget for the whole rendered prompt, in estimated tokens.
    pub max_tokens: Option<usize>,
}

/// A fully built prompt. Rendering is byte-deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system: String,
    pub demonstrations: Vec<String>,
    /// Task instruction.
    pub task: String,
    /// The instance to answer, rendered in demonstration format without the answer.
    pub item: String,
    /// Expected answer labels; empty for free-text tasks.
    pub labels: Vec<String>,
}

impl PromptBundle {
    /// System instruction, demonstrations and task instruction, separated by blank lines.
    pub fn render_template(&self) -> String {
        let mut parts: Vec<&str> = vec![&self.system];
        parts.extend(self.demonstrations.iter().map(String::as_str));
        parts.push(&self.task);
        parts.join("\n\n")
    }

    /// The full prompt text: the template followed by the item.
    pub fn render(&self) -> String {
        let mut s = self.render_template();
        if !self.item.is_empty() {
            s.push('\n');
            s.push_str(&self.item);
        }
        s
    }

    /// User-turn content for chat APIs (everything except the system instruction).
    pub fn user_message(&self) -> String {
        let mut parts: Vec<&str> = self.demonstrations.iter().map(String::as_str).collect();
        parts.push(&self.task);
        let mut s = parts.join("\n\n");
        if !self.item.is_empty() {
            s.push('\n');
            s.push_str(&self.item);
        }
        s
    }

    pub fn estimated_tokens(&self) -> usize {
        estimate_tokens(&self.render())
    }
}

/// Rough token count: one token per four characters, rounded up.
pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("demonstration {index} has no gold label")]
    UnlabeledDemo { index: usize },
    #[error("{task} item is missing its {field} text")]
    MissingText { task: &'static str, field: &'static str },
    #[error("prompt needs ~{tokens} tokens, budget is {budget}; {}", drop_hint(*drop_demos))]
    OverBudget { tokens: usize, budget: usize, drop_demos: Option<usize> },
}

fn drop_hint(d: Option<usize>) -> String {
    match d {
        Some(n) => format!("drop {n} demonstration(s) to fit"),
        None => "does not fit even without demonstrations".into(),
    }
}

fn text_or_empty(t: &Option<String>) -> &str {
    t.as_deref().filter(|s| !s.is_empty()).unwrap_or(EMPTY_TEXT)
}

fn render_input(task: TaskKind, ex: &Example) -> String {
    match task {
        TaskKind::Request => format!("The review sentence is: {}", text_or_empty(&ex.new)),
        _ => format!("The old text is: {}\nThe new text is: {}", text_or_empty(&ex.old), text_or_empty(&ex.new)),
    }
}

/// One demonstration in prompt form.
pub fn render_demo(task: TaskKind, ex: &Example, order: RationaleOrder) -> Option<String> {
    let label = format!("LABEL: {}", ex.label.as_deref()?);
    let reason = ex.reason.as_deref().map(|r| format!("REASON: {r}"));
    let mut s = render_input(task, ex);
    let tail = match (order, reason) {
        (RationaleOrder::LR, Some(r)) => format!("{label}\n{r}"),
        (RationaleOrder::RL, Some(r)) => format!("{r}\n{label}"),
        _ => label,
    };
    s.push('\n');
    s.push_str(&tail);
    Some(s)
}

fn check_item(task: TaskKind, item: &Example) -> Result<(), PromptError> {
    let has = |t: &Option<String>| t.as_deref().is_some_and(|s| !s.is_empty());
    let name = task.name();
    match task {
        TaskKind::Intent | TaskKind::Alignment => {
            if !has(&item.old) {
                return Err(PromptError::MissingText { task: name, field: "old" });
            }
            if !has(&item.new) {
                return Err(PromptError::MissingText { task: name, field: "new" });
            }
        }
        TaskKind::IntentAddDelete => {
            if !has(&item.old) && !has(&item.new) {
                return Err(PromptError::MissingText { task: name, field: "old or new" });
            }
        }
        TaskKind::Request => {
            if !has(&item.new) {
                return Err(PromptError::MissingText { task: name, field: "review sentence" });
            }
        }
    }
    Ok(())
}

fn fit_budget(bundle: PromptBundle, budget: Option<usize>) -> Result<PromptBundle, PromptError> {
    let Some(budget) = budget else { return Ok(bundle) };
    let tokens = bundle.estimated_tokens();
    if tokens <= budget {
        return Ok(bundle);
    }
    let mut trial = bundle.clone();
    let mut dropped = 0;
    let drop_demos = loop {
        if trial.demonstrations.pop().is_none() {
            break None;
        }
        dropped += 1;
        if trial.estimated_tokens() <= budget {
            break Some(dropped);
        }
    };
    Err(PromptError::OverBudget { tokens, budget, drop_demos })
}

/// Build a classification prompt for any of the labeled tasks.
pub fn build_prompt(
    task: TaskKind,
    item: &Example,
    demos: &[Example],
    cfg: &PromptConfig,
) -> Result<PromptBundle, PromptError> {
    check_item(task, item)?;
    let demonstrations = demos
        .iter()
        .enumerate()
        .map(|(index, d)| render_demo(task, d, cfg.rationale_order).ok_or(PromptError::UnlabeledDemo { index }))
        .collect::<Result<Vec<_>, _>>()?;
    let bundle = PromptBundle {
        system: task.system().to_string(),
        demonstrations,
        task: task.task().to_string(),
        item: render_input(task, item),
        labels: task.labels().iter().map(|s| s.to_string()).collect(),
    };
    fit_budget(bundle, cfg.max_tokens)
}

/// Intent prompt; picks the three-label variant when one side is missing.
pub fn build_intent_prompt(item: &Example, demos: &[Example], cfg: &PromptConfig) -> Result<PromptBundle, PromptError> {
    let single = item.old.as_deref().is_none_or(str::is_empty) || item.new.as_deref().is_none_or(str::is_empty);
    let task = if single { TaskKind::IntentAddDelete } else { TaskKind::Intent };
    build_prompt(task, item, demos, cfg)
}

pub fn build_alignment_prompt(item: &Example, demos: &[Example], cfg: &PromptConfig) -> Result<PromptBundle, PromptError> {
    build_prompt(TaskKind::Alignment, item, demos, cfg)
}

pub fn build_request_prompt(item: &Example, demos: &[Example], cfg: &PromptConfig) -> Result<PromptBundle, PromptError> {
    build_prompt(TaskKind::Request, item, demos, cfg)
}

/// One edit as listed in a summarization prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryEdit {
    pub old: Option<String>,
    pub new: Option<String>,
    pub action: EditAction,
    pub intent: Option<EditIntent>,
    pub section: String,
}

fn render_summary_edit(k: usize, e: &SummaryEdit) -> String {
    format!(
        "Edit {k}:\nOld text: {}\nNew text: {}\nAction: {}\nIntent: {}\nSection: {}",
        text_or_empty(&e.old),
        text_or_empty(&e.new),
        e.action.as_str(),
        e.intent.map_or("Unlabeled", EditIntent::label),
        e.section
    )
}

fn summary_bundle(edits: &[SummaryEdit], first: usize, task: &str) -> PromptBundle {
    let item = edits.iter().enumerate().map(|(k, e)| render_summary_edit(first + k + 1, e)).collect::<Vec<_>>().join("\n\n");
    PromptBundle {
        system: SUMMARY_SYSTEM.to_string(),
        demonstrations: Vec::new(),
        task: task.to_string(),
        item,
        labels: Vec::new(),
    }
}

/// Zero-shot summarization, either as one prompt or, over budget, one prompt per run of
/// consecutive sections plus a merge step over the partial summaries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SummaryPlan {
    Single(PromptBundle),
    Chunked { chunks: Vec<PromptBundle>, merge_instruction: String },
}

pub fn build_summary_prompt(edits: &[SummaryEdit], max_tokens: Option<usize>) -> Result<SummaryPlan, PromptError> {
    let whole = summary_bundle(edits, 0, SUMMARY_TASK);
    let Some(budget) = max_tokens else { return Ok(SummaryPlan::Single(whole)) };
    let tokens = whole.estimated_tokens();
    if tokens <= budget {
        return Ok(SummaryPlan::Single(whole));
    }
    // group consecutive edits by section, then pack sections greedily
    let mut sections: Vec<(usize, usize)> = Vec::new();
    for (k, e) in edits.iter().enumerate() {
        match sections.last_mut() {
            Some((start, end)) if edits[*start].section == e.section => *end = k + 1,
            _ => sections.push((k, k + 1)),
        }
    }
    let mut chunks: Vec<PromptBundle> = Vec::new();
    let mut cur: Option<(usize, usize)> = None;
    for (s, e) in sections {
        if summary_bundle(&edits[s..e], s, SUMMARY_CHUNK_TASK).estimated_tokens() > budget {
            return Err(PromptError::OverBudget { tokens, budget, drop_demos: None });
        }
        cur = match cur {
            Some((cs, _)) if summary_bundle(&edits[cs..e], cs, SUMMARY_CHUNK_TASK).estimated_tokens() <= budget => {
                Some((cs, e))
            }
            Some((cs, ce)) => {
                chunks.push(summary_bundle(&edits[cs..ce], cs, SUMMARY_CHUNK_TASK));
                Some((s, e))
            }
            None => Some((s, e)),
        };
    }
    if let Some((cs, ce)) = cur {
        chunks.push(summary_bundle(&edits[cs..ce], cs, SUMMARY_CHUNK_TASK));
    }
    Ok(SummaryPlan::Chunked { chunks, merge_instruction: SUMMARY_MERGE_TASK.to_string() })
}

/// Merge prompt over partial summaries produced for a chunked plan.
pub fn build_summary_merge_prompt(partials: &[String]) -> PromptBundle {
    let item = partials.iter().enumerate().map(|(k, p)| format!("Part {}:\n{p}", k + 1)).collect::<Vec<_>>().join("\n\n");
    PromptBundle {
        system: SUMMARY_SYSTEM.to_string(),
        demonstrations: Vec::new(),
        task: SUMMARY_MERGE_TASK.to_string(),
        item,
        labels: Vec::new(),
    }
}
