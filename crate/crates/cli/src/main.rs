use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use selex_cli::{load_config, run_scenario, CliError, CliResult, RunRequest, Stage};

#[derive(Parser)]
#[command(name = "selex", version, about = "Cavity-shaped laser pulses for selective excitation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory holding outputs of an earlier stage to reuse; may be repeated.
    #[arg(long)]
    stage_input: Vec<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the cavity field for the configured drive.
    Synthesize(RunArgs),
    /// Compute the saturated absorption cross section.
    Spectrum(RunArgs),
    /// Run gradient ascent on the discrimination objective.
    Optimize(RunArgs),
    /// Integrate the excitation/condensation kinetics and the enrichment factor.
    Kinetics(RunArgs),
    /// Run every stage in order.
    Full(RunArgs),
    /// Check a configuration without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    let (stage, args) = match cli.command {
        Command::Validate { config } => {
            let loaded = load_config(&config)?;
            for w in loaded.config.warnings() {
                eprintln!("warning: {w}");
            }
            println!("{}: ok (sha256 {})", config.display(), loaded.hash);
            return Ok(());
        }
        Command::Synthesize(a) => (Stage::Synthesize, a),
        Command::Spectrum(a) => (Stage::Spectrum, a),
        Command::Optimize(a) => (Stage::Optimize, a),
        Command::Kinetics(a) => (Stage::Kinetics, a),
        Command::Full(a) => (Stage::Full, a),
    };
    let mut loaded = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        loaded.config = loaded.config.with_seed(seed);
    }
    for w in loaded.config.warnings() {
        eprintln!("warning: {w}");
    }
    let out = args
        .out
        .or_else(|| loaded.config.output_dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("selex-out"));
    for dir in &args.stage_input {
        if !dir.is_dir() {
            return Err(CliError::Usage(format!("stage input {} is not a directory", dir.display())));
        }
    }
    let manifest = run_scenario(&RunRequest {
        loaded: &loaded,
        config_path: Some(&args.config),
        stage,
        out_dir: &out,
        stage_input: &args.stage_input,
    })?;
    println!("{} finished; {} outputs in {}", stage.name(), manifest.outputs.len(), out.display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
