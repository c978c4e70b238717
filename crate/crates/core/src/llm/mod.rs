//! LLM-assisted revision tasks: prompt construction, demonstration selection, answer
//! parsing, evaluation and chat providers.

mod demos;
mod eval;
mod prompt;
mod provider;

pub use demos::{
    default_demos, load_demos, select_demos, DemoError, DemoIndex, DemoMethod, DemoOrdering, DemoSelector,
    Selection,
};
pub use eval::{
    evaluate, majority_label, normalize_label, parse_verdict, random_baseline, render_verdict, EvalError,
    EvalResult, LabelScores, ParseError, Verdict, UNPARSED,
};
pub use prompt::{
    build_alignment_prompt, build_intent_prompt, build_prompt, build_request_prompt, build_summary_merge_prompt,
    build_summary_prompt, estimate_tokens, render_demo, Example, PromptBundle, PromptConfig, PromptError,
    RationaleOrder, SummaryEdit, SummaryPlan, TaskKind, ADD_DELETE_LABELS, ALIGNMENT_SYSTEM, ALIGNMENT_TASK,
    EMPTY_TEXT, INTENT_ADD_DELETE_TASK, INTENT_LABELS, INTENT_SYSTEM, INTENT_TASK, REQUEST_SYSTEM, REQUEST_TASK,
    SUMMARY_CHUNK_TASK, SUMMARY_MERGE_TASK, SUMMARY_SYSTEM, SUMMARY_TASK, YES_NO_LABELS,
};
pub use provider::{
    BatchRunner, ChatError, ChatProvider, LlmJudge, MockProvider, OpenAiCompatible, RecordingProvider,
    ReplayProvider, Transcript, ENV_API_KEY, ENV_BASE_URL, ENV_MAX_TOKENS, ENV_MODEL,
};
