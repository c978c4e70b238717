//! Command-line front end. Exit codes: 0 success, 1 domain error, 2 usage error.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use revgraph::align::{prealign, two_stage_align, AlignConfig};
use revgraph::analytics::{analyze, analyze_corpus, DocumentInput};
use revgraph::corpus::{
    build_alignment_dataset, build_request_dataset, load_corpus, load_document, load_edits, read_jsonl,
    save_document, save_edits, split_intent_dataset, write_jsonl, Dataset, REQUEST_NEGATIVE_RATIO,
};
use revgraph::llm::{
    build_intent_prompt, build_prompt, default_demos, evaluate, majority_label, parse_verdict, random_baseline,
    select_demos, BatchRunner, ChatProvider, DemoIndex, DemoMethod, DemoOrdering, DemoSelector, Example,
    LlmJudge, OpenAiCompatible, PromptBundle, PromptConfig, RationaleOrder, ReplayProvider, TaskKind,
};
use revgraph::segment::{segment_document, segmenters_by_name};
use revgraph::service::{serve, Store};
use revgraph::similarity::{EmbeddingProvider, Measure, TableEmbedder, TrigramEmbedder};

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(name = "revgraph", version, about = "Document revision analysis")]
struct Cli {
    /// Print errors as JSON on stderr.
    #[arg(long, global = true)]
    json: bool,
    /// JSON config: {"align": {"t0", "t1", "measures"}, "bins", "provider"}.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Config {
    align: Option<AlignConfig>,
    bins: Option<usize>,
    provider: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Split a document's paragraphs into sentences.
    Segment {
        input: PathBuf,
        /// Segmenters in priority order (rule, naive).
        #[arg(long, value_delimiter = ',', default_value = "rule")]
        segmenters: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pre-align the sentences of two document versions.
    Align {
        #[arg(long)]
        old: PathBuf,
        #[arg(long)]
        new: PathBuf,
        /// JSON vector table for the semantic measure instead of the built-in embedder.
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[command(flatten)]
        thresholds: Thresholds,
        /// Verify leftover Add/Delete candidates with a chat model.
        #[arg(long)]
        two_stage: bool,
        #[command(flatten)]
        provider: ProviderArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Edit analytics for one pair or a whole corpus.
    Analyze {
        #[arg(long, conflicts_with_all = ["old", "new", "edits"])]
        manifest: Option<PathBuf>,
        #[arg(long, requires_all = ["new", "edits"])]
        old: Option<PathBuf>,
        #[arg(long)]
        new: Option<PathBuf>,
        #[arg(long)]
        edits: Option<PathBuf>,
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Build a train/test dataset from a corpus.
    Dataset {
        #[arg(value_enum)]
        kind: DatasetKind,
        #[arg(long)]
        manifest: PathBuf,
        /// Defaults to the manifest seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Negatives per positive for request datasets.
        #[arg(long, default_value_t = REQUEST_NEGATIVE_RATIO)]
        ratio: f64,
        /// Output directory for train.jsonl, test.jsonl and split.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Render classification prompts for a file of items.
    Prompts {
        #[command(flatten)]
        prompt: PromptArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score model answers or a baseline against gold labels.
    Eval {
        #[command(flatten)]
        prompt: PromptArgs,
        /// JSONL of {id, answer}.
        #[arg(long, conflicts_with = "baseline")]
        answers: Option<PathBuf>,
        #[arg(long, value_enum)]
        baseline: Option<Baseline>,
        #[command(flatten)]
        provider: ProviderArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Serve the review API over a corpus.
    Serve {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Directory with the built review UI.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
        /// Journal directory; defaults to `.revgraph-journal` next to the manifest.
        #[arg(long)]
        journal: Option<PathBuf>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Thresholds {
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    t1: Option<f64>,
    /// Comma-separated subset of lev, fuzzy, sem.
    #[arg(long, value_delimiter = ',')]
    measures: Option<Vec<Measure>>,
}

#[derive(Args)]
struct ProviderArgs {
    /// `env` (OpenAI-compatible endpoint from REVGRAPH_LLM_* variables) or `replay:PATH`.
    #[arg(long)]
    provider: Option<String>,
    #[arg(long, default_value_t = 4)]
    max_in_flight: usize,
}

#[derive(Args)]
struct PromptArgs {
    #[arg(long)]
    task: TaskKind,
    /// JSONL of items.
    #[arg(long)]
    items: PathBuf,
    /// JSONL pool for dynamic demonstrations.
    #[arg(long)]
    pool: Option<PathBuf>,
    #[arg(long, default_value = "def")]
    method: DemoMethod,
    #[arg(long, default_value_t = 0)]
    n: usize,
    /// Combine dynamic demonstrations with the defaults.
    #[arg(long)]
    with_defaults: bool,
    #[arg(long, value_enum, default_value = "def-then-dyn")]
    ordering: Ordering,
    #[arg(long, value_enum, default_value = "lr")]
    rationale: Rationale,
    #[arg(long)]
    max_tokens: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DatasetKind {
    Intent,
    Alignment,
    Request,
}

#[derive(Clone, Copy, ValueEnum)]
enum Baseline {
    Random,
    /// Majority label of the selected demonstrations.
    Majority,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ordering {
    DefThenDyn,
    DynThenDef,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rationale {
    Lr,
    Rl,
    None,
}

fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializes") + "\n"
}

fn align_config(cfg: &Config, t: &Thresholds) -> Result<AlignConfig> {
    let mut a = cfg.align.clone().unwrap_or_default();
    a.t0 = t.t0.unwrap_or(a.t0);
    a.t1 = t.t1.unwrap_or(a.t1);
    if let Some(m) = &t.measures {
        a.measures = m.clone();
    }
    a.validate()?;
    Ok(a)
}

fn provider(spec: Option<&str>) -> Result<Box<dyn ChatProvider>> {
    match spec {
        Some("env") => Ok(Box::new(OpenAiCompatible::from_env()?)),
        Some(s) if s.starts_with("replay:") => Ok(Box::new(ReplayProvider::load(Path::new(&s["replay:".len()..]))?)),
        Some(s) => Err(format!("unknown provider `{s}` (expected env or replay:PATH)").into()),
        None => Err("no provider configured; pass --provider or set it in --config".into()),
    }
}

fn embedder(table: Option<&Path>) -> Result<Box<dyn EmbeddingProvider>> {
    Ok(match table {
        Some(p) => Box::new(TableEmbedder::load(p)?),
        None => Box::new(TrigramEmbedder::default()),
    })
}

fn read_items(path: &Path) -> Result<Vec<Example>> {
    Ok(read_jsonl::<Example>(path)?.into_iter().map(|(_, x)| x).collect())
}

/// Demonstrations and prompt for every item.
fn prompts(args: &PromptArgs) -> Result<Vec<(Example, Vec<Example>, PromptBundle)>> {
    let items = read_items(&args.items)?;
    let embedder = TrigramEmbedder::default();
    let index = match &args.pool {
        Some(p) => Some(DemoIndex::new(read_items(p)?, &embedder)?),
        None => None,
    };
    let selector = DemoSelector {
        method: args.method,
        n: args.n,
        with_defaults: args.with_defaults,
        ordering: match args.ordering {
            Ordering::DefThenDyn => DemoOrdering::DefThenDyn,
            Ordering::DynThenDef => DemoOrdering::DynThenDef,
        },
    };
    let cfg = PromptConfig {
        rationale_order: match args.rationale {
            Rationale::Lr => RationaleOrder::LR,
            Rationale::Rl => RationaleOrder::RL,
            Rationale::None => RationaleOrder::None,
        },
        max_tokens: args.max_tokens,
    };
    let mut out = Vec::with_capacity(items.len());
    for item in items {
        let single = item.old.is_none() || item.new.is_none();
        let task = if args.task == TaskKind::Intent && single { TaskKind::IntentAddDelete } else { args.task };
        let defaults = default_demos(task);
        let sel = select_demos(&selector, &item, index.as_ref(), &defaults, &embedder)?;
        let bundle = match args.task {
            TaskKind::Intent => build_intent_prompt(&item, &sel.demos, &cfg),
            t => build_prompt(t, &item, &sel.demos, &cfg),
        }
        .map_err(|e| format!("item {}: {e}", item.id))?;
        out.push((item, sel.demos, bundle));
    }
    Ok(out)
}

fn write_dataset<T>(dir: &Path, d: &Dataset<T>, f: impl Fn(&T) -> Example) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_jsonl(&dir.join("train.jsonl"), &d.train.iter().map(&f).collect::<Vec<_>>())?;
    write_jsonl(&dir.join("test.jsonl"), &d.test.iter().map(&f).collect::<Vec<_>>())?;
    fs::write(dir.join("split.json"), to_json(&d.split))?;
    for w in &d.split.warnings {
        tracing::warn!("{w}");
    }
    eprintln!("{} train / {} test items", d.train.len(), d.test.len());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let cfg: Config = match &cli.config {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?).map_err(|e| format!("{}: {e}", p.display()))?,
        None => Config::default(),
    };
    match cli.command {
        Command::Segment { input, segmenters, out } => {
            let doc = load_document(&input)?;
            let boxed = segmenters_by_name(&segmenters)?;
            let refs: Vec<_> = boxed.iter().map(|b| b.as_ref()).collect();
            let seg = segment_document(&doc, &refs)?;
            match out {
                Some(p) => save_document(&p, &seg)?,
                None => write_out(None, &to_json(&seg))?,
            }
        }
        Command::Align { old, new, embeddings, thresholds, two_stage, provider: p, out } => {
            let ac = align_config(&cfg, &thresholds)?;
            let (old, new) = (load_document(&old)?, load_document(&new)?);
            let embedder = embedder(embeddings.as_deref())?;
            let embedder = embedder.as_ref();
            let edits = if two_stage {
                let chat = provider(p.provider.as_deref().or(cfg.provider.as_deref()))?;
                let r = two_stage_align(&old, &new, &ac, embedder, &LlmJudge::with_defaults(chat.as_ref()))?;
                for w in &r.warnings {
                    tracing::warn!("{w}");
                }
                eprintln!("two-stage: {} queried, {} accepted", r.queried, r.accepted);
                r.edits
            } else {
                prealign(&old, &new, &ac, embedder)?
            };
            match out {
                Some(p) => save_edits(&p, &edits)?,
                None => {
                    let lines: Vec<String> = edits.iter().map(|e| serde_json::to_string(e).unwrap()).collect();
                    write_out(None, &(lines.join("\n") + "\n"))?
                }
            }
        }
        Command::Analyze { manifest, old, new, edits, bins } => {
            let bins = bins.or(cfg.bins).unwrap_or(10);
            let report = match (manifest, old, new, edits) {
                (Some(m), ..) => {
                    let corpus = load_corpus(&m)?;
                    let docs: Vec<DocumentInput> = corpus
                        .pairs
                        .iter()
                        .map(|p| DocumentInput {
                            old: &p.old,
                            new: &p.new,
                            edits: &p.edits,
                            requests: &p.requests,
                            links: &p.links,
                        })
                        .collect();
                    serde_json::to_value(analyze_corpus(&docs, bins)?)?
                }
                (None, Some(o), Some(n), Some(e)) => {
                    let (o, n) = (load_document(&o)?, load_document(&n)?);
                    let edits = load_edits(&e, &o, &n)?;
                    serde_json::to_value(analyze(&o, &n, &edits, &[], &[], bins)?)?
                }
                _ => return Err(Usage("analyze needs --manifest or --old/--new/--edits".into()).into()),
            };
            write_out(None, &to_json(&report))?;
        }
        Command::Dataset { kind, manifest, seed, ratio, out } => {
            let corpus = load_corpus(&manifest)?;
            let seed = seed.unwrap_or(corpus.seed);
            match kind {
                DatasetKind::Intent => write_dataset(&out, &split_intent_dataset(&corpus, seed), Clone::clone)?,
                DatasetKind::Alignment => {
                    let d = build_alignment_dataset(&corpus, &TrigramEmbedder::default(), seed)?;
                    write_dataset(&out, &d, |s| s.to_example())?
                }
                DatasetKind::Request => {
                    write_dataset(&out, &build_request_dataset(&corpus, ratio, seed)?, |s| s.to_example())?
                }
            }
        }
        Command::Prompts { prompt, out } => {
            #[derive(Serialize)]
            struct Row<'a> {
                id: &'a str,
                prompt: String,
                bundle: &'a PromptBundle,
            }
            let rows = prompts(&prompt)?;
            let lines: Vec<String> = rows
                .iter()
                .map(|(item, _, b)| serde_json::to_string(&Row { id: &item.id, prompt: b.render(), bundle: b }).unwrap())
                .collect();
            write_out(out.as_deref(), &(lines.join("\n") + "\n"))?;
        }
        Command::Eval { prompt, answers, baseline, provider: p, seed } => {
            let rows = prompts(&prompt)?;
            let labels = prompt.task.labels();
            let gold: Vec<String> = rows
                .iter()
                .map(|(item, ..)| item.label.clone().ok_or_else(|| format!("item {} has no gold label", item.id)))
                .collect::<std::result::Result<_, _>>()?;
            let parse = |answer: &str| parse_verdict(answer, labels).ok().map(|v| v.label);
            let predictions: Vec<Option<String>> = match (answers, baseline) {
                (_, Some(Baseline::Random)) => random_baseline(rows.len(), labels, seed),
                (_, Some(Baseline::Majority)) => rows
                    .iter()
                    .map(|(_, demos, _)| majority_label(&demos.iter().filter_map(|d| d.label.clone()).collect::<Vec<_>>()))
                    .collect(),
                (Some(path), None) => {
                    #[derive(Deserialize)]
                    struct Answer {
                        id: String,
                        answer: String,
                    }
                    let by_id: BTreeMap<String, String> =
                        read_jsonl::<Answer>(&path)?.into_iter().map(|(_, a)| (a.id, a.answer)).collect();
                    rows.iter().map(|(item, ..)| by_id.get(&item.id).and_then(|a| parse(a))).collect()
                }
                (None, None) => {
                    let chat = provider(p.provider.as_deref().or(cfg.provider.as_deref()))?;
                    let runner = BatchRunner { max_in_flight: p.max_in_flight, seed, ..BatchRunner::default() };
                    let batch: Vec<(String, PromptBundle)> =
                        rows.iter().map(|(item, _, b)| (item.id.clone(), b.clone())).collect();
                    let results = runner.run(chat.as_ref(), &batch);
                    rows.iter()
                        .map(|(item, ..)| match &results[&item.id] {
                            Ok(a) => parse(a),
                            Err(e) => {
                                tracing::warn!(item = %item.id, "{e}");
                                None
                            }
                        })
                        .collect()
                }
            };
            write_out(None, &to_json(&evaluate(&predictions, &gold, labels)?))?;
        }
        Command::Serve { manifest, addr, static_dir, journal, embeddings } => {
            let ac = cfg.align.clone().unwrap_or_default();
            let journal = journal.unwrap_or_else(|| {
                manifest.parent().unwrap_or(Path::new(".")).join(".revgraph-journal")
            });
            let mut store = Store::open_manifest(&manifest, &journal, &ac, embedder(embeddings.as_deref())?.as_ref())?;
            store.bins = cfg.bins.unwrap_or(store.bins);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(serve(Arc::new(store), addr, static_dir))?;
        }
    }
    Ok(())
}

#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn report(json: bool, kind: &str, message: &str) {
    if json {
        eprintln!("{}", serde_json::json!({ "error": kind, "message": message }));
    } else {
        eprintln!("error: {message}");
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_env("REVGRAPH_LOG"))
        .with_writer(std::io::stderr)
        .init();
    let json = std::env::args().any(|a| a == "--json");
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            if json {
                report(true, "usage", e.to_string().trim());
            } else {
                let _ = e.print();
            }
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Usage>() => {
            report(json, "usage", &e.to_string());
            ExitCode::from(2)
        }
        Err(e) => {
            report(json, "domain", &e.to_string());
            ExitCode::from(1)
        }
    }
}
