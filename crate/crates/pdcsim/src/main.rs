use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pdcsim::scenario::OUT_DIR_ENV;
use pdcsim::{resolve_out_dir, run, ScenarioConfig};

#[derive(Parser)]
#[command(name = "pdcsim", version, about = "Seeded-PDC entanglement, correlation and ghost-imaging scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its artifacts and manifest.
    Run {
        config: PathBuf,
        /// Output directory; overrides the environment and the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Check a scenario without running it.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (path, run_opts) = match cli.command {
        Command::Run { config, out, workers } => (config, Some((out, workers))),
        Command::Validate { config } => (config, None),
    };
    let config = match ScenarioConfig::load(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    let Some((out, workers)) = run_opts else {
        println!("{}: valid {} scenario", path.display(), config.experiment.kind());
        return ExitCode::SUCCESS;
    };
    if workers == Some(0) {
        eprintln!("--workers must be at least 1");
        return ExitCode::from(2);
    }
    let dir = resolve_out_dir(out.as_deref(), std::env::var_os(OUT_DIR_ENV), config.output_dir.as_deref());
    match run(&config, &dir, workers) {
        Ok(manifest) => {
            for c in &manifest.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            println!("wrote {} files to {}", manifest.files.len() + 1, dir.display());
            if manifest.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
