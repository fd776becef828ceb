use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use gsmvlc_cli::config::{Mode, OsnrGrid, Overrides};
use gsmvlc_cli::{run, ExperimentSpec};

/// Coded GSM visible-light link experiments.
#[derive(Debug, Parser)]
#[command(name = "gsmvlc", version)]
struct Args {
    /// ber-sweep, ami-sweep, exit-transfer, threshold, table-dump or complexity.
    #[arg(long)]
    mode: Option<Mode>,
    /// TOML experiment file, or a CSV produced by an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; all cores when absent. Output does not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// OSNR grid `lo:hi:step` in dB (the bracket in threshold mode).
    #[arg(long, allow_hyphen_values = true)]
    osnr: Option<OsnrGrid>,
    /// Frame budget per OSNR point.
    #[arg(long)]
    frames: Option<u64>,
    /// Maximum decoder iterations per outer pass.
    #[arg(long)]
    g1: Option<usize>,
    /// Maximum outer demapper/decoder passes after the first.
    #[arg(long)]
    g2: Option<usize>,
    /// Validate the configuration and exit.
    #[arg(long)]
    check: bool,
}

fn load(args: &Args) -> Result<ExperimentSpec> {
    let mut spec = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentSpec::from_file_text(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?
        }
        None => {
            let mode = args.mode.context("either --config or --mode is required")?;
            ExperimentSpec::from_toml(&format!("[experiment]\nmode = \"{mode}\"\n")).map_err(anyhow::Error::msg)?
        }
    };
    spec.apply(&Overrides {
        mode: args.mode,
        seed: args.seed,
        osnr: args.osnr,
        frames: args.frames,
        g1: args.g1,
        g2: args.g2,
    });
    Ok(spec)
}

fn main_inner(args: Args) -> Result<()> {
    if let Some(w) = args.workers {
        rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build_global()?;
    }
    let spec = load(&args)?;
    if args.check {
        let errs = spec.validate();
        if errs.is_empty() {
            println!("ok");
            return Ok(());
        }
        anyhow::bail!("invalid configuration:\n  {}", errs.join("\n  "));
    }
    let out = run(&spec)?;
    match &args.out {
        Some(path) => std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{out}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
