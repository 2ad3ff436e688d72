use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shiftlab::{io, run, CliError, Command, RunConfig};

#[derive(Parser)]
#[command(name = "shiftlab", version, about = "Experiments with shift-like holomorphic maps on C^N")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every randomized sample.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (falls back to SHIFTLAB_THREADS, then the number of cores).
    #[arg(long, global = true, env = "SHIFTLAB_THREADS")]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Orbit of a point as CSV.
    Orbit,
    /// Separated/covering entropy estimates on a grid of the quotient box.
    Entropy,
    /// Horseshoe certificate and rescaled-family probe.
    Certify,
    /// Transition table J(i,l) from biholomorphic-preimage tests.
    Jtable,
    /// Exact admissible-word counts.
    Words,
    /// Identities, fixed-point spectrum and attraction checks for the wandering example.
    Wandering,
    /// Basin-of-attraction raster on a real 2-plane.
    Render,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Orbit => Command::Orbit,
            Sub::Entropy => Command::Entropy,
            Sub::Certify => Command::Certify,
            Sub::Jtable => Command::JTable,
            Sub::Words => Command::Words,
            Sub::Wandering => Command::Wandering,
            Sub::Render => Command::Render,
        }
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(t) = cli.threads {
        cfg.threads = Some(t);
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = Command::from(cli.command);
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("shiftlab {}: {e}", cmd.name());
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("shiftlab-out"));
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        pool = pool.num_threads(t);
    }
    let result = match pool.build() {
        Ok(pool) => pool.install(|| run(cmd, &cfg, &out)),
        Err(e) => Err(CliError::Io(std::io::Error::other(e))),
    };
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("shiftlab {}: {e}", cmd.name());
            if std::fs::create_dir_all(&out).is_ok() {
                let _ = io::write_json(&out.join("failure.json"), &e.to_json(cmd.name()));
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
