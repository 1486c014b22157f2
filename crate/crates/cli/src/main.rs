use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use subpressure_cli::{exit, execute, Command, ExperimentConfig, Format};

/// Pressure and variational-principle experiments for random subshifts.
#[derive(Debug, Parser)]
#[command(name = "subpressure", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to `output.dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `optimizer.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Defaults to `output.format` from the config.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Overrides `verify.tolerance`.
    #[arg(long)]
    tolerance: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = run(cli);
    ExitCode::from(code as u8)
}

fn run(cli: Cli) -> i32 {
    let (cfg, bytes) = match ExperimentConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return exit::SCHEMA;
        }
    };
    let out = cli.out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let format = cli.format.unwrap_or(cfg.output.format);
    let seed = cli.seed.unwrap_or(cfg.optimizer.seed);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("--threads must be at least 1");
            return exit::SCHEMA;
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot start worker pool: {e}");
            return exit::FAILURE;
        }
    };
    match pool.install(|| execute(cli.command, &cfg, &bytes, &out, format, seed, cli.tolerance)) {
        Ok((paths, res)) => {
            println!("{}: {}", cli.command.name(), res.summary);
            for p in paths {
                println!("wrote {}", p.display());
            }
            if res.violation {
                exit::VIOLATION
            } else {
                exit::OK
            }
        }
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}
