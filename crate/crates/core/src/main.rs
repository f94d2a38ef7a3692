use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use landscape_core::pipeline::{exit_code, Overrides, Pipeline, Stage, StageStatus};

/// Temporal embeddings, discourse atoms and venture recombination measures.
#[derive(Parser)]
#[command(name = "landscape", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Pipeline config (TOML).
    #[arg(long, global = true, default_value = "landscape.toml")]
    config: PathBuf,
    /// Overrides the seed of every stochastic stage.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory, overriding `paths.out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Tokenize the corpus and build per-slice PPMI matrices.
    Ingest,
    /// Fit the jointly smoothed embeddings.
    Train,
    /// Learn discourse atoms per slice and assign words.
    Atoms,
    /// Build the company event-history panel.
    Measure,
    /// Sanity checks, drift traces, axes and analogies.
    Validate,
    /// Descriptive statistics and outcome-rate tables.
    Report,
    /// Every stage in order.
    RunAll,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("LANDSCAPE_LOG", "warn"))
        .init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot set thread count: {e}");
            return ExitCode::from(4);
        }
    }
    let overrides = Overrides {
        seed: cli.seed,
        out: cli.out,
    };
    let result = Pipeline::open(&cli.config, overrides).and_then(|p| {
        let stage = match cli.command {
            Command::Ingest => Stage::Ingest,
            Command::Train => Stage::Train,
            Command::Atoms => Stage::Atoms,
            Command::Measure => Stage::Measure,
            Command::Validate => Stage::Validate,
            Command::Report => Stage::Report,
            Command::RunAll => return p.run_all(),
        };
        p.run(stage).map(|s| vec![(stage, s)])
    });
    match result {
        Ok(done) => {
            for (stage, status) in done {
                match status {
                    StageStatus::Ran => println!("{stage}: done"),
                    StageStatus::UpToDate => println!("{stage}: up to date"),
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
