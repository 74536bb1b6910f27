//! Thin command-line front end over the library: parses a job file, runs one
//! command, prints the JSON result on stdout. Exit codes: 0 success, 2 bad
//! input, 3 no quantization exists, 4 internal invariant violation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cartanq::job::{error_json, exit_code, run_command, CheckSuite, Command, JobFile};

#[derive(Parser)]
#[command(
    name = "cartanq",
    version,
    about = "Exact projectively equivariant quantization"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Job file (TOML).
    #[arg(long)]
    job: PathBuf,
    /// Write the JSON output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the differential operator for the job's symbol.
    Quantize {
        #[command(flatten)]
        common: Common,
    },
    /// Construct the normal Cartan data and report its normality checks.
    NormalConnection {
        #[command(flatten)]
        common: Common,
    },
    /// Enumerate critical (k, l) pairs for the job's shift.
    Criticality {
        #[command(flatten)]
        common: Common,
        /// Scan orders up to this bound.
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// Run randomized verification suites.
    Check {
        /// Which suite to run.
        #[arg(value_enum)]
        suite: Suite,
        #[command(flatten)]
        common: Common,
        /// Seed for the randomized instance stream.
        #[arg(long)]
        seed: Option<u64>,
        /// Order bound for the suites.
        #[arg(long)]
        kmax: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Lemmas,
    Invariance,
    FlatEquivariance,
    All,
}

impl From<Suite> for CheckSuite {
    fn from(s: Suite) -> CheckSuite {
        match s {
            Suite::Lemmas => CheckSuite::Lemmas,
            Suite::Invariance => CheckSuite::Invariance,
            Suite::FlatEquivariance => CheckSuite::FlatEquivariance,
            Suite::All => CheckSuite::All,
        }
    }
}

fn emit(out: &Option<PathBuf>, value: &serde_json::Value) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run() -> Result<(), ExitCode> {
    let cli = Cli::parse();
    let (common, command) = match &cli.cmd {
        Cmd::Quantize { common } => (common, Command::Quantize),
        Cmd::NormalConnection { common } => (common, Command::NormalConnection),
        Cmd::Criticality { common, kmax } => {
            let job_kmax = JobFile::from_path(&common.job).ok().and_then(|j| j.kmax);
            (
                common,
                Command::Criticality {
                    kmax: kmax.or(job_kmax).unwrap_or(3),
                },
            )
        }
        Cmd::Check {
            suite,
            common,
            seed,
            kmax,
        } => {
            let job = JobFile::from_path(&common.job).ok();
            (
                common,
                Command::Check {
                    suite: (*suite).into(),
                    seed: seed.or(job.as_ref().and_then(|j| j.seed)).unwrap_or(0),
                    kmax: kmax
                        .or(job.as_ref().and_then(|j| j.kmax))
                        .or(job.as_ref().and_then(|j| j.k))
                        .unwrap_or(2),
                },
            )
        }
    };
    let result = JobFile::from_path(&common.job).and_then(|job| run_command(&command, &job));
    match result {
        Ok(value) => {
            emit(&common.out, &value).map_err(|_| ExitCode::from(2))?;
            Ok(())
        }
        Err(e) => {
            let _ = emit(&common.out, &error_json(&e));
            Err(ExitCode::from(exit_code(&e) as u8))
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}
