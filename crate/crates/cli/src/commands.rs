use std::collections::HashMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use serde::Serialize;

use semtk_core::assets::{default_lexicon, default_prompts};
use semtk_core::benchgen::{
    annotation_stats, generate_implicatures, generate_negations, quality_metrics, read_responses,
    render_table, sample_for_annotation, write_sheet, GenerationJob, RefScope,
};
use semtk_core::curate::{assemble_triplets, CurationRecord, PromptZoo};
use semtk_core::dataset::DatasetBundle;
use semtk_core::embed::Embedder;
use semtk_core::evaltasks::{
    comparison_table, correlation_csv, embed_unique, markdown_table, metrics_csv, rank_map,
    rank_models, run_eval, task_correlation, EvalOptions, EvalReport, NegatedNameMode, TaskSet,
};
use semtk_core::extract::{extract_all, ExtractionRecord, HeuristicParser};
use semtk_core::geometry::pca_project;
use semtk_core::io::{read_jsonl, write_jsonl};
use semtk_core::train::{train_adapter, Adapter, AdaptedEmbedder, AdapterMode, DenominatorMode, TrainConfig};
use semtk_core::{Split, Utterance};

use crate::args::{ChatArgs, ProviderArgs};
use crate::manifest::{sibling, Manifest};

fn parse_split(s: &str) -> Result<Split, String> {
    Split::parse(s).ok_or_else(|| format!("unknown split `{s}`"))
}

fn load_bundle(dir: &Path) -> Result<DatasetBundle> {
    DatasetBundle::load(dir).with_context(|| format!("loading dataset {}", dir.display()))
}

fn read_input<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<Vec<T>> {
    if !path.exists() {
        bail!("missing upstream artifact: {what} file {} does not exist", path.display());
    }
    read_jsonl(path).with_context(|| format!("reading {what} from {}", path.display()))
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NegatedFlag {
    First,
    Average,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    /// Dataset bundle directory.
    #[arg(long)]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub provider: ProviderArgs,
    /// Comma-separated subset of triplet,binary,clustering,multiclass, or `all`.
    #[arg(long, default_value = "all")]
    pub tasks: String,
    #[arg(long, default_value_t = 10)]
    pub shots: usize,
    /// How the negated-intent embedding is formed.
    #[arg(long, value_enum, default_value = "first")]
    pub negated: NegatedFlag,
    /// Apply a trained adapter checkpoint on top of the provider.
    #[arg(long)]
    pub adapter: Option<PathBuf>,
    /// Row name in the report; defaults to the model id.
    #[arg(long)]
    pub name: Option<String>,
    /// Report JSON; the markdown table goes to `<out>.md`.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn eval(a: EvalArgs, seed: u64) -> Result<Vec<PathBuf>> {
    let bundle = load_bundle(&a.dataset)?;
    let tasks = TaskSet::parse(&a.tasks)?;
    let opts = EvalOptions {
        tasks,
        seed,
        shots: a.shots,
        negated_mode: match a.negated {
            NegatedFlag::First => NegatedNameMode::First,
            NegatedFlag::Average => NegatedNameMode::Average,
        },
    };
    let provider = a.provider.build(seed)?;
    let name = a.name.clone().unwrap_or_else(|| a.provider.model.clone());
    let report = match &a.adapter {
        Some(path) => {
            let adapter = Adapter::load(path).with_context(|| format!("loading adapter {}", path.display()))?;
            run_eval(&bundle, &AdaptedEmbedder::new(&provider, adapter)?, &name, &opts)?
        }
        None => run_eval(&bundle, &provider, &name, &opts)?,
    };
    report.save(&a.out)?;
    let md = sibling(&a.out, ".md");
    std::fs::write(&md, markdown_table(std::slice::from_ref(&report)))?;
    let mut m = Manifest::new("eval", seed, &a)?;
    m.count("metrics", report.metrics.len());
    for (split, utts) in &bundle.splits {
        m.count(&format!("utterances.{}", split.as_str()), utts.len());
    }
    let mp = m.write_for(&a.out)?;
    Ok(vec![a.out, md, mp])
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KindFlag {
    Negation,
    Implicature,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_enum)]
    pub kind: KindFlag,
    #[command(flatten)]
    pub chat: ChatArgs,
    #[arg(long, default_value_t = 10)]
    pub scenarios: usize,
    #[arg(long, default_value_t = 3)]
    pub per_scenario: usize,
    /// Utterance JSONL; provenance goes to `<out>.provenance.jsonl`.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn generate(a: GenerateArgs, seed: u64) -> Result<Vec<PathBuf>> {
    let bundle = load_bundle(&a.dataset)?;
    let chat = a.chat.build()?;
    let prompts = default_prompts();
    let out = match a.kind {
        KindFlag::Negation => {
            let sources = bundle.split(Split::Original).to_vec();
            if sources.is_empty() {
                bail!("missing upstream artifact: dataset has no original split");
            }
            generate_negations(&GenerationJob::negation(bundle.intents.clone(), sources), chat.as_ref(), prompts, seed)?
        }
        KindFlag::Implicature => {
            let mut job = GenerationJob::implicature(bundle.intents.clone());
            job.scenarios_per_intent = a.scenarios;
            job.utterances_per_scenario = a.per_scenario;
            generate_implicatures(&job, chat.as_ref(), prompts)?
        }
    };
    for w in &out.warnings {
        log::warn!("{w}");
    }
    write_jsonl(&a.out, &out.utterances)?;
    let prov = sibling(&a.out, ".provenance.jsonl");
    write_jsonl(&prov, &out.provenance)?;
    let mut m = Manifest::new("generate", seed, &a)?;
    m.count("generated", out.utterances.len())
        .count("skipped", out.skipped)
        .count("warnings", out.warnings.len());
    let mp = m.write_for(&a.out)?;
    Ok(vec![a.out, prov, mp])
}

#[derive(Debug, Args, Serialize)]
pub struct ExtractArgs {
    /// Utterance JSONL.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub chat: ChatArgs,
    /// Extraction record JSONL.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn extract(a: ExtractArgs, seed: u64) -> Result<Vec<PathBuf>> {
    let utts: Vec<Utterance> = read_input(&a.input, "utterance")?;
    let chat = a.chat.build()?;
    let lex = default_lexicon();
    let out = extract_all(&utts, chat.as_ref(), &HeuristicParser::new(lex), default_prompts(), lex)?;
    write_jsonl(&a.out, &out.records)?;
    let mut m = Manifest::new("extract", seed, &a)?;
    m.count("inputs", utts.len())
        .count("records", out.records.len())
        .count("summarized", out.summarized)
        .count("dropped.empty_goal", out.drops.empty_goal)
        .count("dropped.no_action", out.drops.no_action)
        .count("dropped.empty_object", out.drops.empty_object)
        .count("dropped.refused_object", out.drops.refused_object);
    let mp = m.write_for(&a.out)?;
    Ok(vec![a.out, mp])
}

#[derive(Debug, Args, Serialize)]
pub struct CurateArgs {
    /// Extraction record JSONL.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub chat: ChatArgs,
    #[command(flatten)]
    pub provider: ProviderArgs,
    /// Ablation: templates to switch off, e.g. `P4,N1,N3`, `P*`, `N*`, `LLM`.
    #[arg(long)]
    pub disable: Option<String>,
    /// Curated triplet JSONL.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn curate(a: CurateArgs, seed: u64) -> Result<Vec<PathBuf>> {
    let records: Vec<ExtractionRecord> = read_input(&a.input, "extraction record")?;
    let prompts = default_prompts();
    let mut zoo = PromptZoo::from_assets(prompts);
    if let Some(d) = &a.disable {
        zoo.disable(d)?;
    }
    let chat = a.chat.build()?;
    let provider = a.provider.build(seed)?;
    let out = assemble_triplets(&records, &zoo, chat.as_ref(), &provider, prompts, default_lexicon(), seed)?;
    write_jsonl(&a.out, &out.records)?;
    let mut m = Manifest::new("curate", seed, &a)?;
    m.flags = zoo.flags();
    let s = &out.stats;
    m.count("anchors", s.anchors)
        .count("triplets", s.triplets)
        .count("dropped.no_positive", s.dropped_no_positive)
        .count("dropped.no_negative", s.dropped_no_negative)
        .count("rejected", s.rejected)
        .count("skipped_generations", s.skipped_generations);
    let mp = m.write_for(&a.out)?;
    Ok(vec![a.out, mp])
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DenominatorFlag {
    PaperLiteral,
    IncludePositive,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeFlag {
    Linear,
    Residual,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    /// Curated triplet JSONL.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub provider: ProviderArgs,
    #[arg(long, default_value_t = 0.05)]
    pub gamma: f64,
    #[arg(long, default_value_t = 8)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1e-2)]
    pub lr: f64,
    #[arg(long, default_value_t = 1)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.0)]
    pub momentum: f64,
    #[arg(long, value_enum, default_value = "paper-literal")]
    pub denominator: DenominatorFlag,
    #[arg(long, value_enum, default_value = "linear")]
    pub mode: ModeFlag,
    /// Finite-difference gradient check every 10th step.
    #[arg(long)]
    pub grad_check: bool,
    /// Adapter checkpoint JSON; the loss curve goes to `<out>.loss.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn train(a: TrainArgs, seed: u64) -> Result<Vec<PathBuf>> {
    let data: Vec<CurationRecord> = read_input(&a.input, "curated triplet")?;
    let cfg = TrainConfig {
        gamma: a.gamma,
        batch_size: a.batch_size,
        learning_rate: a.lr,
        epochs: a.epochs,
        denominator_mode: match a.denominator {
            DenominatorFlag::PaperLiteral => DenominatorMode::PaperLiteral,
            DenominatorFlag::IncludePositive => DenominatorMode::IncludePositive,
        },
        seed,
        momentum: a.momentum,
        mode: match a.mode {
            ModeFlag::Linear => AdapterMode::Linear,
            ModeFlag::Residual => AdapterMode::Residual,
        },
        grad_check: a.grad_check,
    };
    let provider = a.provider.build(seed)?;
    let outcome = train_adapter(&data, &cfg, &provider)?;
    if let Some(id) = &outcome.diverged {
        log::warn!("training diverged at example {id}; keeping the last finite adapter");
    }
    outcome.adapter.save(&a.out)?;
    let curve = sibling(&a.out, ".loss.csv");
    outcome.write_loss_csv(&curve)?;
    let mut m = Manifest::new("train", seed, &a)?;
    m.count("triplets", data.len())
        .count("steps", outcome.losses.len())
        .count("diverged", outcome.diverged.is_some() as usize);
    let mp = m.write_for(&a.out)?;
    Ok(vec![a.out, curve, mp])
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    /// Eval report JSON files.
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
    /// Model id that improvement marks are relative to; defaults to the first report.
    #[arg(long)]
    pub baseline: Option<String>,
    /// Dataset whose split is projected to 2-D for plotting.
    #[arg(long)]
    pub pca_dataset: Option<PathBuf>,
    #[arg(long, default_value = "original", value_parser = parse_split)]
    #[serde(skip)]
    pub pca_split: Split,
    #[command(flatten)]
    pub provider: ProviderArgs,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn report(a: ReportArgs, seed: u64) -> Result<Vec<PathBuf>> {
    let reports = a
        .reports
        .iter()
        .map(|p| EvalReport::load(p).with_context(|| format!("loading report {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    std::fs::create_dir_all(&a.out)?;
    let mut written = Vec::new();
    let baseline = a.baseline.clone().unwrap_or_else(|| reports[0].model_id.clone());

    let ranks = if reports.len() > 1 {
        let r = rank_models(&reports)?;
        let path = a.out.join("ranks.csv");
        let mut s = String::from("model,mean_rank\n");
        for m in &r {
            s.push_str(&format!("{},{}\n", m.model_id, m.mean_rank));
        }
        std::fs::write(&path, s)?;
        written.push(path);
        Some(rank_map(&r))
    } else {
        None
    };
    let table = a.out.join("comparison.md");
    std::fs::write(&table, comparison_table(&reports, &baseline, ranks.as_ref())?)?;
    written.push(table);
    let csv = a.out.join("metrics.csv");
    std::fs::write(&csv, metrics_csv(&reports))?;
    written.push(csv);

    if reports.len() >= 3 {
        let corr = a.out.join("correlation.csv");
        std::fs::write(&corr, correlation_csv(&task_correlation(&reports)?))?;
        written.push(corr);
    } else {
        log::info!("correlation skipped: needs at least 3 reports");
    }

    if let Some(dir) = &a.pca_dataset {
        let bundle = load_bundle(dir)?;
        let utts = bundle.split(a.pca_split);
        let provider = a.provider.build(seed)?;
        let texts: Vec<&str> = utts.iter().map(|u| u.text.as_str()).collect();
        let table = embed_unique(&provider as &dyn Embedder, &texts)?;
        let vecs: Vec<_> = texts.iter().map(|t| table[t].clone()).collect();
        let proj = pca_project(&vecs, 2)?;
        let path = a.out.join("pca.csv");
        let mut w = String::from("id,intent,x,y\n");
        for (u, c) in utts.iter().zip(&proj.coords) {
            w.push_str(&format!("{},{},{},{}\n", u.id, u.intent, c[0], c[1]));
        }
        std::fs::write(&path, w)?;
        written.push(path);
    }

    let mut m = Manifest::new("report", seed, &a)?;
    m.count("reports", reports.len());
    written.push(m.write_for(&a.out.join("report"))?);
    Ok(written)
}

#[derive(Debug, Subcommand)]
pub enum AnnotateCommand {
    /// Sample an annotation sheet from the original, negation and implicature splits.
    Sample(SampleArgs),
    /// Aggregate annotator responses into the agreement table.
    Stats(StatsArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 60)]
    pub per_pool: usize,
    /// Sheet CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct StatsArgs {
    /// Dataset the sheet was sampled from; maps item ids to splits.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Response CSV with columns item_id,annotator_id,q1,q2.
    #[arg(long)]
    pub responses: PathBuf,
    /// Markdown table; statistics go to `<out>.json`.
    #[arg(long)]
    pub out: PathBuf,
}

const ANNOTATED: [Split; 3] = [Split::Original, Split::Negation, Split::Implicature];

pub fn annotate(c: AnnotateCommand, seed: u64) -> Result<Vec<PathBuf>> {
    match c {
        AnnotateCommand::Sample(a) => {
            let bundle = load_bundle(&a.dataset)?;
            let pools: Vec<&[Utterance]> = ANNOTATED.iter().map(|s| bundle.split(*s)).collect();
            let rows = sample_for_annotation(&pools, &bundle.intents, a.per_pool, seed)?;
            write_sheet(&a.out, &rows)?;
            let mut m = Manifest::new("annotate-sample", seed, &a)?;
            m.count("items", rows.len());
            let mp = m.write_for(&a.out)?;
            Ok(vec![a.out, mp])
        }
        AnnotateCommand::Stats(a) => {
            let bundle = load_bundle(&a.dataset)?;
            let item_split: HashMap<String, Split> = ANNOTATED
                .iter()
                .flat_map(|s| bundle.split(*s).iter().map(|u| (u.id.clone(), u.split)))
                .collect();
            let responses = read_responses(&a.responses)?;
            let stats = annotation_stats(&responses, &item_split)?;
            std::fs::write(&a.out, render_table(&stats))?;
            let json = sibling(&a.out, ".json");
            std::fs::write(&json, serde_json::to_string_pretty(&stats)? + "\n")?;
            let mut m = Manifest::new("annotate-stats", seed, &a)?;
            m.count("responses", responses.len());
            let mp = m.write_for(&a.out)?;
            Ok(vec![a.out, json, mp])
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScopeFlag {
    PerIntent,
    Global,
}

#[derive(Debug, Args, Serialize)]
pub struct QualityArgs {
    /// Generated utterance JSONL.
    #[arg(long)]
    pub generated: PathBuf,
    /// Dataset whose original split is the reference set.
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_enum, default_value = "per-intent")]
    pub scope: ScopeFlag,
    /// Scores JSON.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn quality(a: QualityArgs, seed: u64) -> Result<Vec<PathBuf>> {
    let generated: Vec<Utterance> = read_input(&a.generated, "generated utterance")?;
    let bundle = load_bundle(&a.dataset)?;
    let scope = match a.scope {
        ScopeFlag::PerIntent => RefScope::PerIntent,
        ScopeFlag::Global => RefScope::Global,
    };
    let report = quality_metrics(&generated, bundle.split(Split::Original), scope)?;
    std::fs::write(&a.out, serde_json::to_string_pretty(&report)? + "\n")?;
    for (split, s) in &report.per_split {
        println!(
            "{}: BLEU {:.4} ROUGE-L {:.4} METEOR {:.4} (n={})",
            split.as_str(),
            s.bleu,
            s.rouge_l,
            s.meteor,
            s.n
        );
    }
    let mut m = Manifest::new("quality", seed, &a)?;
    m.count("generated", generated.len()).count("excluded", report.excluded);
    let mp = m.write_for(&a.out)?;
    Ok(vec![a.out, mp])
}
