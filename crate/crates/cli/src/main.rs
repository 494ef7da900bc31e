use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use mw_cli::{emit, payload, CliError, Format, Job, Report};

/// Batch verifier for the p-adic algebra library: runs seeded suites and
/// concrete check jobs, emitting deterministic reports.
#[derive(Parser)]
#[command(name = "mwverify", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct IoArgs {
    /// Path to the JSON job file.
    #[arg(long)]
    job: PathBuf,
    /// Report format.
    #[arg(long, default_value = "text")]
    format: Format,
    /// Write the report body to this file (stdout otherwise). Falls back to
    /// the MWVERIFY_REPORT_DIR environment variable when unset.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suite named in the job file (witt-laws, homotopy,
    /// comparison, functoriality, cohomology, overconvergence, all).
    Run {
        #[command(flatten)]
        io: IoArgs,
        /// Override the job's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Verify a strong homotopy certificate for an explicit pair of maps.
    HomotopyCheck {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Apply the comparison map to explicit inputs.
    TfMap {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Check the degree-growth bounds of the comparison map on explicit
    /// inputs.
    OverconvProfile {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Compute elementary divisors and exactness witnesses for an explicit
    /// windowed complex.
    Cohomology {
        #[command(flatten)]
        io: IoArgs,
    },
}

fn read_job_file(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading job file {}", path.display()))
}

fn parse_payload<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, CliError> {
    serde_json::from_str(s).map_err(|e| CliError::JobParse(e.to_string()))
}

fn write_report(io: &IoArgs, report: &Report, suite: &str) -> Result<()> {
    let bytes = emit(&report.body, io.format);
    let out_path = io.out.clone().or_else(|| {
        std::env::var_os("MWVERIFY_REPORT_DIR").map(|dir| {
            let ext = match io.format {
                Format::Json => "json",
                Format::Text => "txt",
            };
            PathBuf::from(dir).join(format!("{}-{}.{}", suite, report.body.seed, ext))
        })
    });
    match out_path {
        Some(path) => {
            std::fs::write(&path, &bytes).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("report written to {}", path.display());
        }
        None => {
            std::io::stdout().write_all(&bytes)?;
        }
    }
    eprintln!("wall-clock: {} ms", report.wall_ms);
    Ok(())
}

fn run() -> Result<i32> {
    let cli = Cli::parse();
    let (io, report) = match &cli.command {
        Command::Run { io, seed } => {
            let text = read_job_file(&io.job)?;
            let mut job = Job::from_json(&text)?;
            if let Some(s) = seed {
                job.seed = *s;
            }
            (io, mw_cli::run(&job)?)
        }
        Command::HomotopyCheck { io } => {
            let job: payload::HomotopyJob = parse_payload(&read_job_file(&io.job)?)?;
            (io, payload::homotopy_check(&job)?)
        }
        Command::TfMap { io } => {
            let job: payload::ComparisonJob = parse_payload(&read_job_file(&io.job)?)?;
            (io, payload::tf_map(&job)?)
        }
        Command::OverconvProfile { io } => {
            let job: payload::ComparisonJob = parse_payload(&read_job_file(&io.job)?)?;
            (io, payload::overconv_profile(&job)?)
        }
        Command::Cohomology { io } => {
            let job: payload::CohomologyJob = parse_payload(&read_job_file(&io.job)?)?;
            (io, payload::cohomology(&job)?)
        }
    };
    let suite = report.body.suite.clone();
    write_report(io, &report, &suite)?;
    Ok(if report.all_passed() { 0 } else { 1 })
}

fn main() {
    match run() {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}
