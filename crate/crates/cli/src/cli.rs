use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fcf_core::{DEFAULT_CUTOFF, DEFAULT_STEP};

use crate::error::{CliError, Result};
use crate::input::parse_transition;
use crate::pipeline::{
    compare, run_exact, run_marginals, run_reconstruct, EnumerationOptions, ReconstructOptions,
    DEFAULT_PER_MODE_CAP, DEFAULT_TOTAL_CAP,
};
use crate::report::{read_lines, write_marginals, write_report, Format};

/// Franck-Condon stick spectra from Gaussian-state photon statistics.
#[derive(Debug, Parser)]
#[command(name = "fcf", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan pair marginals and reconstruct the spectrum by matching pursuit.
    Reconstruct {
        #[command(flatten)]
        io: IoArgs,
        /// Per-mode photon cutoff K (counts 0..K).
        #[arg(long, default_value_t = DEFAULT_CUTOFF)]
        cutoff: usize,
        /// Weight added per pursuit iteration.
        #[arg(long, default_value_t = DEFAULT_STEP)]
        step: f64,
        /// Iteration limit (default ceil(1/step)).
        #[arg(long)]
        max_iter: Option<usize>,
        /// Report (CSV or JSON) to measure the l1 distance against.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Enumerate every pattern within the photon budget exactly.
    Exact {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long, default_value_t = DEFAULT_TOTAL_CAP)]
        budget_total: usize,
        #[arg(long, default_value_t = DEFAULT_PER_MODE_CAP)]
        budget_per_mode: usize,
    },
    /// Write the nearest-neighbour pair marginal tables.
    Marginals {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long, default_value_t = DEFAULT_CUTOFF)]
        cutoff: usize,
    },
    /// l1 distance between two reports.
    Compare {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct IoArgs {
    /// Transition file (TOML).
    #[arg(long)]
    pub input: PathBuf,
    /// Output format; defaults from the output extension, else CSV.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn pick_format(format: Option<Format>, output: Option<&Path>) -> Format {
    format.unwrap_or_else(|| output.map(Format::from_path).unwrap_or(Format::Csv))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p).map_err(
            |source| CliError::Io {
                path: p.to_path_buf(),
                source,
            },
        )?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn io_error(path: Option<&Path>) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.unwrap_or(Path::new("<stdout>")).to_path_buf(),
        source,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Reconstruct {
            io,
            cutoff,
            step,
            max_iter,
            reference,
        } => {
            let t = parse_transition(&io.input)?;
            let reference = reference.as_deref().map(read_lines).transpose()?;
            let report = run_reconstruct(
                &t,
                ReconstructOptions {
                    cutoff,
                    step,
                    max_iter,
                },
                reference.as_ref().map(|r| r as _),
            )?;
            let out = io.output.as_deref();
            write_report(&report, pick_format(io.format, out), out)
        }
        Command::Exact {
            io,
            budget_total,
            budget_per_mode,
        } => {
            let t = parse_transition(&io.input)?;
            let report = run_exact(
                &t,
                EnumerationOptions {
                    per_mode_cap: budget_per_mode,
                    total_cap: budget_total,
                },
            )?;
            let out = io.output.as_deref();
            write_report(&report, pick_format(io.format, out), out)
        }
        Command::Marginals { io, cutoff } => {
            let t = parse_transition(&io.input)?;
            let pm = run_marginals(&t, cutoff)?;
            let out = io.output.as_deref();
            write_marginals(&pm, pick_format(io.format, out), sink(out)?).map_err(io_error(out))
        }
        Command::Compare {
            first,
            second,
            format,
            output,
        } => {
            let a = read_lines(&first)?;
            let b = read_lines(&second)?;
            let l1 = compare(&a, &b);
            let out = output.as_deref();
            let mut w = sink(out)?;
            match pick_format(format, out) {
                Format::Csv => writeln!(w, "l1\n{l1:?}"),
                Format::Json => writeln!(w, "{}", serde_json::json!({ "l1": l1 })),
            }
            .and_then(|_| w.flush())
            .map_err(io_error(out))
        }
    }
}
