//! `qistate`: batch driver for the verification and convergence suites.
//!
//! Prints a JSON report on stdout. Exit status is 0 when every check passes,
//! 1 on a verification failure and 2 on a configuration or budget error.

mod commands;
mod model;

use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use qistate_core::error::Error;
use qistate_core::perm_model::McSettings;

#[derive(Debug, Parser)]
#[command(
    name = "qistate",
    version,
    about = "Strongly quasi-invariant states: verification and convergence experiments"
)]
struct Cli {
    /// Seed for every random choice (samples, test vectors).
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Output file: the CSV for `martingale` and `convergence`, the JSON
    /// report otherwise. Written atomically.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// The 2×2 rotation model against its closed forms.
    Example2 {
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
    },
    /// Run the cocycle, representation, projection, Umegaki and martingale suites.
    Verify {
        #[arg(long)]
        model: PathBuf,
    },
    /// Martingale `E_N(x)` along the symmetric chain up to `nmax`.
    Martingale {
        #[arg(long)]
        model: PathBuf,
        /// Elementary tensor as a list of `{"site": n, "matrix": m}`.
        #[arg(long)]
        observable: PathBuf,
        #[arg(long)]
        nmax: usize,
    },
    /// Weak convergence of `K_N` toward the closed-form limit.
    Convergence {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Inclusive range `lo:hi` of `N`.
        #[arg(long, value_parser = parse_range)]
        nrange: RangeInclusive<usize>,
        /// Monte Carlo samples for `N` beyond the enumeration budget.
        #[arg(long)]
        mc_samples: Option<usize>,
    },
}

fn parse_range(s: &str) -> std::result::Result<RangeInclusive<usize>, String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    let lo: usize = lo.trim().parse().map_err(|e| format!("bad lower bound {lo:?}: {e}"))?;
    let hi: usize = hi.trim().parse().map_err(|e| format!("bad upper bound {hi:?}: {e}"))?;
    if lo == 0 || lo > hi {
        return Err(format!("need 1 ≤ lo ≤ hi, got {lo}:{hi}"));
    }
    Ok(lo..=hi)
}

/// Write `contents` to `path` via a temporary file in the same directory.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn emit<T: Serialize>(report: &T, out: Option<&Path>, csv: Option<&str>) -> Result<()> {
    let json = serde_json::to_string_pretty(report)?;
    match (out, csv) {
        (Some(path), Some(csv)) => write_atomic(path, csv.as_bytes())?,
        (Some(path), None) => write_atomic(path, format!("{json}\n").as_bytes())?,
        (None, _) => {}
    }
    println!("{json}");
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Example2 { beta } => {
            let r = commands::example2(beta, cli.seed)?;
            emit(&r, out, None)?;
            Ok(r.pass)
        }
        Command::Verify { model } => {
            let m = model::load_model(&model)?;
            let r = commands::verify(&m, cli.seed)?;
            emit(&r, out, None)?;
            Ok(r.pass)
        }
        Command::Martingale { model, observable, nmax } => {
            let m = model::load_model(&model)?;
            let x = model::load_observable(&observable)?;
            let r = commands::martingale(&m, &x, nmax)?;
            emit(&r, out, Some(&r.csv))?;
            Ok(r.pass)
        }
        Command::Convergence { model, a, b, nrange, mc_samples } => {
            let m = model::load_model(&model)?;
            let a = model::load_observable(&a)?;
            let b = model::load_observable(&b)?;
            let mc = mc_samples.map(|samples| McSettings { samples, seed: cli.seed });
            let r = commands::convergence(&m, &a, &b, nrange, mc)?;
            emit(&r, out, Some(&r.csv))?;
            Ok(r.pass)
        }
    }
}

/// 1 for errors that report a failed mathematical check, 2 for everything
/// else (bad input, budgets, I/O).
fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(
            Error::NotQuasiInvariant { .. }
            | Error::HypothesisHViolated(_)
            | Error::ConsistencyFailure(_)
            | Error::NonCommutingCocycle(_),
        ) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
