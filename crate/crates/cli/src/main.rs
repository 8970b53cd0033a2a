mod args;
mod commands;
mod manifest;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "semtk", version, about = "Semantic probing of intent embeddings")]
struct Cli {
    /// Seed for every random choice the command makes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run evaluation tasks on a dataset bundle.
    Eval(commands::EvalArgs),
    /// Generate negation or implicature test utterances.
    Generate(commands::GenerateArgs),
    /// Extract (action, object) intents from utterances.
    Extract(commands::ExtractArgs),
    /// Curate contrastive training triplets.
    Curate(commands::CurateArgs),
    /// Train an embedding adapter on curated triplets.
    Train(commands::TrainArgs),
    /// Compare eval reports.
    Report(commands::ReportArgs),
    /// Human-annotation sheets and statistics.
    #[command(subcommand)]
    Annotate(commands::AnnotateCommand),
    /// BLEU / ROUGE-L / METEOR of generated utterances.
    Quality(commands::QualityArgs),
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let written: Vec<PathBuf> = match cli.command {
        Command::Eval(a) => commands::eval(a, cli.seed)?,
        Command::Generate(a) => commands::generate(a, cli.seed)?,
        Command::Extract(a) => commands::extract(a, cli.seed)?,
        Command::Curate(a) => commands::curate(a, cli.seed)?,
        Command::Train(a) => commands::train(a, cli.seed)?,
        Command::Report(a) => commands::report(a, cli.seed)?,
        Command::Annotate(c) => commands::annotate(c, cli.seed)?,
        Command::Quality(a) => commands::quality(a, cli.seed)?,
    };
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}
