use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use logdrift::config::{RunConfig, DEFAULT_CONFIG};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "logdrift", version, about = "Stationary solver for a log-Laplacian equation with drift and a nonlocal nonlinearity")]
struct Cli {
    /// Run configuration (TOML); the built-in default when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output_dir` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed, overriding `seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for data-parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the admissibility constants without running the nonlinear iteration.
    Inspect,
    /// Solve the linear problem and the fixed-point iteration, writing CSV and JSON outputs.
    Solve,
    /// Run one of the scripted experiments.
    Experiment {
        #[arg(value_enum)]
        which: Which,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Which {
    Contraction,
    Continuity,
    Sweep,
}

fn load(cli: &Cli) -> logdrift::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::from_toml_str(DEFAULT_CONFIG)?,
    };
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("failed to configure thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let result = load(&cli).and_then(|cfg| match cli.command {
        Command::Inspect => commands::inspect(&cfg),
        Command::Solve => commands::solve(&cfg),
        Command::Experiment { which } => match which {
            Which::Contraction => commands::contraction(&cfg),
            Which::Continuity => commands::continuity(&cfg),
            Which::Sweep => commands::sweep(&cfg),
        },
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let body = serde_json::json!({
                "error": e.kind(),
                "message": e.to_string(),
                "exit_code": e.exit_code(),
            });
            eprintln!("{body}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
