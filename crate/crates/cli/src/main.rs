mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use config::{ConfigError, Mode};
use eddykit_core::Error;

/// Eddy-current solver: DG in the conductor coupled to boundary elements outside.
#[derive(Debug, Parser)]
#[command(name = "eddykit", version)]
struct Cli {
    /// What to run.
    mode: Mode,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (overrides the config).
    #[arg(long)]
    threads: Option<usize>,
    /// Single-threaded, timing-free outputs that are identical across runs.
    #[arg(long)]
    deterministic: bool,
    /// Validate the configuration and mesh paths, then exit.
    #[arg(long)]
    check: bool,
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match e.downcast_ref::<Error>() {
        Some(
            Error::DimensionMismatch(_)
            | Error::Singular(_)
            | Error::Residual { .. }
            | Error::NegativeForm(_),
        ) => 3,
        Some(_) => 2,
        None => 1,
    }
}

fn execute(cli: &Cli) -> anyhow::Result<()> {
    let mut cfg = config::read(&cli.config, cli.mode)?;
    if cli.check {
        println!("{}: ok", cli.config.display());
        return Ok(());
    }
    cfg.deterministic |= cli.deterministic;
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(ConfigError("--threads: must be at least 1".into()).into());
        }
        cfg.threads = Some(t);
    }
    let threads = if cfg.deterministic {
        Some(1)
    } else {
        cfg.threads
    };
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("starting thread pool")?;
    }
    if cfg.deterministic {
        faer::set_global_parallelism(faer::Par::Seq);
    }

    let out = cfg.output_dir(cli.out.as_deref());
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let ctx = run::RunContext {
        cfg: &cfg,
        out,
        provenance: run::Provenance::new(cli.mode, &cli.config, &cfg)?,
    };
    match cli.mode {
        Mode::Solve => run::solve(&ctx),
        Mode::Convergence => run::convergence(&ctx),
        Mode::BemVerify => run::bem_verify(&ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
