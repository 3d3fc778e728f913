//! `cklab`: verification reports for Cuntz-Krieger algebras.
//!
//! Exit codes: 0 when every contract holds, 2 when the tool ran but a
//! mathematical contract failed, 1 on usage or input errors.

mod commands;
mod json;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use commands::RunContext;

#[derive(Debug, Parser)]
#[command(
    name = "cklab",
    version,
    about = "Verification reports for Cuntz-Krieger algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Suppress the human-readable summary on stderr.
    #[arg(long, global = true)]
    quiet: bool,

    /// Record wall time in the manifest (makes reports non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a matrix file.
    Validate { input: PathBuf },
    /// Decide condition (I) and cross-check it with the cylinder oracle.
    ConditionI {
        input: PathBuf,
        /// Oracle depth; defaults to the certified depth 2n+1.
        #[arg(long)]
        oracle_depth: Option<usize>,
    },
    /// Bratteli multiplicities of the AF-core levels.
    Bratteli {
        input: PathBuf,
        #[arg(long)]
        levels: usize,
    },
    /// Product states and their pullback along the endomorphism.
    States {
        input: PathBuf,
        /// Comma-separated 1-based symbols.
        #[arg(long, value_delimiter = ',', required = true)]
        prefix: Vec<usize>,
        #[arg(long)]
        level: usize,
    },
    /// Relation residuals on the truncated path space.
    Relations {
        input: PathBuf,
        #[arg(long)]
        trunc: usize,
    },
    /// Crossed-product checks: isometry, covariance, recovery, grading.
    Crossed {
        input: PathBuf,
        #[arg(long)]
        trunc: usize,
    },
    /// Hilbert bimodule checks for a block bimodule file.
    Bimodule {
        input: PathBuf,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Norm agreement between truncated models (condition (I) required).
    Uniqueness {
        input: PathBuf,
        #[arg(long)]
        trunc: usize,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Norm-gap counterexample (condition (I) must fail).
    GapWitness { input: PathBuf },
}

fn main() -> ExitCode {
    let started = Instant::now();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let ctx = RunContext {
        out: cli.out,
        report_dir: std::env::var_os("CKLAB_REPORT_DIR").map(PathBuf::from),
        quiet: cli.quiet,
        timing: cli.timing,
        started,
    };
    let outcome = match &cli.command {
        Command::Validate { input } => commands::validate(&ctx, input),
        Command::ConditionI {
            input,
            oracle_depth,
        } => commands::condition_i(&ctx, input, *oracle_depth),
        Command::Bratteli { input, levels } => commands::bratteli(&ctx, input, *levels),
        Command::States {
            input,
            prefix,
            level,
        } => commands::states(&ctx, input, prefix, *level),
        Command::Relations { input, trunc } => commands::relations(&ctx, input, *trunc),
        Command::Crossed { input, trunc } => commands::crossed(&ctx, input, *trunc),
        Command::Bimodule {
            input,
            trials,
            seed,
        } => commands::bimodule(&ctx, input, *trials, *seed),
        Command::Uniqueness {
            input,
            trunc,
            samples,
            seed,
        } => commands::uniqueness(&ctx, input, *trunc, *samples, *seed),
        Command::GapWitness { input } => commands::gap_witness(&ctx, input),
    };
    if let Err(e) = &outcome {
        eprintln!("error: {e:#}");
    }
    ExitCode::from(exit_code(&outcome))
}

fn exit_code(outcome: &anyhow::Result<bool>) -> u8 {
    match outcome {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(_) => 1,
    }
}
