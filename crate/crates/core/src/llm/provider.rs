//! Chat completion providers: a scripted mock, JSONL record/replay, and an
//! OpenAI-compatible HTTP client; plus a bounded-concurrency batch runner.

use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::demos::default_demos;
use super::eval::parse_verdict;
use super::prompt::{build_alignment_prompt, Example, PromptBundle, PromptConfig, TaskKind};
use crate::align::AlignmentJudge;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChatError {
    #[error("rate limited")]
    RateLimited { retry_after: Option<Duration> },
    #[error("prompt of ~{tokens} tokens exceeds the model limit of {limit}")]
    OverLength { tokens: usize, limit: usize },
    #[error("transport error: {0}")]
    Transport(String),
}

pub trait ChatProvider: Send + Sync {
    fn model(&self) -> &str;

    /// Context limit in estimated tokens, if known. Prompts above it are rejected, never
    /// truncated.
    fn max_context_tokens(&self) -> Option<usize> {
        None
    }

    fn complete(&self, prompt: &PromptBundle) -> Result<String, ChatError>;
}

fn check_length(p: &dyn ChatProvider, prompt: &PromptBundle) -> Result<(), ChatError> {
    if let Some(limit) = p.max_context_tokens() {
        let tokens = prompt.estimated_tokens();
        if tokens > limit {
            return Err(ChatError::OverLength { tokens, limit });
        }
    }
    Ok(())
}

type Responder = dyn Fn(&PromptBundle) -> Result<String, ChatError> + Send + Sync;

/// Answers from a closure; for tests and dry runs.
pub struct MockProvider {
    responder: Box<Responder>,
    limit: Option<usize>,
    calls: AtomicUsize,
}

impl MockProvider {
    pub fn new(f: impl Fn(&PromptBundle) -> Result<String, ChatError> + Send + Sync + 'static) -> Self {
        MockProvider { responder: Box::new(f), limit: None, calls: AtomicUsize::new(0) }
    }

    pub fn constant(answer: impl Into<String>) -> Self {
        let a = answer.into();
        Self::new(move |_| Ok(a.clone()))
    }

    pub fn with_limit(mut self, tokens: usize) -> Self {
        self.limit = Some(tokens);
        self
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl ChatProvider for MockProvider {
    fn model(&self) -> &str {
        "mock"
    }

    fn max_context_tokens(&self) -> Option<usize> {
        self.limit
    }

    fn complete(&self, prompt: &PromptBundle) -> Result<String, ChatError> {
        check_length(self, prompt)?;
        self.calls.fetch_add(1, Ordering::SeqCst);
        (self.responder)(prompt)
    }
}

/// One recorded exchange; the key is the fully rendered prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub model: String,
    pub prompt: String,
    pub response: String,
}

/// Replays responses recorded by [`RecordingProvider`], keyed by rendered prompt.
pub struct ReplayProvider {
    model: String,
    responses: HashMap<String, String>,
}

impl ReplayProvider {
    pub fn load(path: &Path) -> Result<Self, ChatError> {
        let f = File::open(path).map_err(|e| ChatError::Transport(format!("{}: {e}", path.display())))?;
        let mut responses = HashMap::new();
        let mut model = String::from("replay");
        for (k, line) in BufReader::new(f).lines().enumerate() {
            let line = line.map_err(|e| ChatError::Transport(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let t: Transcript = serde_json::from_str(&line)
                .map_err(|e| ChatError::Transport(format!("{}:{}: {e}", path.display(), k + 1)))?;
            model = t.model;
            responses.insert(t.prompt, t.response);
        }
        Ok(ReplayProvider { model, responses })
    }
}

impl ChatProvider for ReplayProvider {
    fn model(&self) -> &str {
        &self.model
    }

    fn complete(&self, prompt: &PromptBundle) -> Result<String, ChatError> {
        self.responses
            .get(&prompt.render())
            .cloned()
            .ok_or_else(|| ChatError::Transport("no recorded response for this prompt".into()))
    }
}

/// Wraps a provider and appends every successful exchange to a JSONL transcript.
pub struct RecordingProvider<P> {
    inner: P,
    out: Mutex<File>,
}

impl<P: ChatProvider> RecordingProvider<P> {
    pub fn new(inner: P, path: &Path) -> std::io::Result<Self> {
        let out = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(RecordingProvider { inner, out: Mutex::new(out) })
    }
}

impl<P: ChatProvider> ChatProvider for RecordingProvider<P> {
    fn model(&self) -> &str {
        self.inner.model()
    }

    fn max_context_tokens(&self) -> Option<usize> {
        self.inner.max_context_tokens()
    }

    fn complete(&self, prompt: &PromptBundle) -> Result<String, ChatError> {
        let response = self.inner.complete(prompt)?;
        let t = Transcript { model: self.model().to_string(), prompt: prompt.render(), response: response.clone() };
        let line = serde_json::to_string(&t).expect("transcript serializes");
        let mut f = self.out.lock().unwrap_or_else(|e| e.into_inner());
        writeln!(f, "{line}").map_err(|e| ChatError::Transport(e.to_string()))?;
        Ok(response)
    }
}

/// Environment variables read by [`OpenAiCompatible::from_env`].
pub const ENV_BASE_URL: &str = "REVGRAPH_LLM_BASE_URL";
pub const ENV_API_KEY: &str = "REVGRAPH_LLM_API_KEY";
pub const ENV_MODEL: &str = "REVGRAPH_LLM_MODEL";
pub const ENV_MAX_TOKENS: &str = "REVGRAPH_LLM_CONTEXT_TOKENS";

/// Any server speaking the OpenAI chat-completions protocol.
pub struct OpenAiCompatible {
    base_url: String,
    api_key: Option<String>,
    model: String,
    limit: Option<usize>,
    client: reqwest::blocking::Client,
}

impl OpenAiCompatible {
    pub fn new(base_url: impl Into<String>, api_key: Option<String>, model: impl Into<String>) -> Self {
        OpenAiCompatible {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key,
            model: model.into(),
            limit: None,
            client: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(300))
                .build()
                .expect("http client"),
        }
    }

    /// Configure from `REVGRAPH_LLM_BASE_URL`, `REVGRAPH_LLM_MODEL`, optional
    /// `REVGRAPH_LLM_API_KEY` and `REVGRAPH_LLM_CONTEXT_TOKENS`.
    pub fn from_env() -> Result<Self, ChatError> {
        let var = |k: &str| std::env::var(k).ok().filter(|v| !v.is_empty());
        let base = var(ENV_BASE_URL).ok_or_else(|| ChatError::Transport(format!("{ENV_BASE_URL} is not set")))?;
        let model = var(ENV_MODEL).ok_or_else(|| ChatError::Transport(format!("{ENV_MODEL} is not set")))?;
        let mut p = Self::new(base, var(ENV_API_KEY), model);
        p.limit = var(ENV_MAX_TOKENS).and_then(|v| v.parse().ok());
        Ok(p)
    }
}

impl ChatProvider for OpenAiCompatible {
    fn model(&self) -> &str {
        &self.model
    }

    fn max_context_tokens(&self) -> Option<usize> {
        self.limit
    }

    fn complete(&self, prompt: &PromptBundle) -> Result<String, ChatError> {
        check_length(self, prompt)?;
        let body = serde_json::json!({
            "model": self.model,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": prompt.system},
                {"role": "user", "content": prompt.user_message()},
            ],
        });
        let mut req = self.client.post(format!("{}/chat/completions", self.base_url)).json(&body);
        if let Some(k) = &self.api_key {
            req = req.bearer_auth(k);
        }
        let resp = req.send().map_err(|e| ChatError::Transport(e.to_string()))?;
        let status = resp.status();
        if status.as_u16() == 429 {
            let retry_after = resp
                .headers()
                .get("retry-after")
                .and_then(|v| v.to_str().ok())
                .and_then(|v| v.parse::<u64>().ok())
                .map(Duration::from_secs);
            return Err(ChatError::RateLimited { retry_after });
        }
        let text = resp.text().map_err(|e| ChatError::Transport(e.to_string()))?;
        if !status.is_success() {
            if text.contains("context_length") || text.contains("maximum context") {
                return Err(ChatError::OverLength { tokens: prompt.estimated_tokens(), limit: self.limit.unwrap_or(0) });
            }
            return Err(ChatError::Transport(format!("HTTP {status}: {text}")));
        }
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| ChatError::Transport(e.to_string()))?;
        v["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| ChatError::Transport("response has no message content".into()))
    }
}

/// Issues prompts concurrently with an in-flight cap, retrying rate-limited calls with
/// jittered exponential backoff. Results are keyed by item id, so their order never
/// depends on completion order.
#[derive(Debug, Clone)]
pub struct BatchRunner {
    pub max_in_flight: usize,
    pub max_retries: u32,
    pub base_delay: Duration,
    pub seed: u64,
}

impl Default for BatchRunner {
    fn default() -> Self {
        BatchRunner { max_in_flight: 4, max_retries: 5, base_delay: Duration::from_millis(500), seed: 0 }
    }
}

impl BatchRunner {
    pub fn run(
        &self,
        provider: &dyn ChatProvider,
        items: &[(String, PromptBundle)],
    ) -> BTreeMap<String, Result<String, ChatError>> {
        let next = AtomicUsize::new(0);
        let results = Mutex::new(BTreeMap::new());
        let workers = self.max_in_flight.max(1).min(items.len().max(1));
        std::thread::scope(|s| {
            for w in 0..workers {
                let (next, results) = (&next, &results);
                s.spawn(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(w as u64));
                    loop {
                        let i = next.fetch_add(1, Ordering::SeqCst);
                        let Some((id, prompt)) = items.get(i) else { break };
                        let r = self.call_with_retry(provider, prompt, &mut rng);
                        results.lock().unwrap_or_else(|e| e.into_inner()).insert(id.clone(), r);
                    }
                });
            }
        });
        results.into_inner().unwrap_or_else(|e| e.into_inner())
    }

    fn call_with_retry(
        &self,
        provider: &dyn ChatProvider,
        prompt: &PromptBundle,
        rng: &mut ChaCha8Rng,
    ) -> Result<String, ChatError> {
        let mut attempt = 0;
        loop {
            match provider.complete(prompt) {
                Err(ChatError::RateLimited { retry_after }) if attempt < self.max_retries => {
                    let backoff = self.base_delay.saturating_mul(1 << attempt.min(16));
                    let jitter = backoff.mul_f64(rng.random_range(0.0..1.0));
                    std::thread::sleep(retry_after.unwrap_or_default().max(backoff / 2 + jitter / 2));
                    attempt += 1;
                }
                other => return other,
            }
        }
    }
}

/// Alignment verification through a chat model, for the two-stage aligner.
pub struct LlmJudge<'a> {
    pub provider: &'a dyn ChatProvider,
    pub demos: Vec<Example>,
    pub config: PromptConfig,
}

impl<'a> LlmJudge<'a> {
    /// Judge using the bundled alignment demonstrations.
    pub fn with_defaults(provider: &'a dyn ChatProvider) -> Self {
        LlmJudge { provider, demos: default_demos(TaskKind::Alignment), config: PromptConfig::default() }
    }
}

impl AlignmentJudge for LlmJudge<'_> {
    fn same_content(&self, old_text: &str, new_text: &str) -> Result<bool, String> {
        let item = Example::pair("", old_text, new_text);
        let prompt = build_alignment_prompt(&item, &self.demos, &self.config).map_err(|e| e.to_string())?;
        let answer = self.provider.complete(&prompt).map_err(|e| e.to_string())?;
        let verdict = parse_verdict(&answer, TaskKind::Alignment.labels()).map_err(|e| e.to_string())?;
        Ok(verdict.label == "yes")
    }
}
