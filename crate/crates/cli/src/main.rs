//! Batch front end: run a JSON job spec and write certificates, reports
//! and grid artifacts. Exit codes: 0 all certificates pass, 1 usage error,
//! 2 certificate failure, 3 numeric cap exhausted.

mod jobs;

use clap::Parser;
use jobs::{JobError, JobSpec};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "smoothfact",
    about = "Scale calculus, factorization and crossed-product jobs with numeric certificates"
)]
struct Args {
    /// Path to the JSON job spec
    #[arg(long)]
    job: PathBuf,

    /// Output directory (overrides the job's output_dir)
    #[arg(long)]
    out: Option<PathBuf>,

    /// 0 = quiet, 1 = certificates, 2 = artifacts too
    #[arg(long, default_value_t = 1)]
    verbosity: u8,
}

fn main() {
    let args = Args::parse();
    let code = match run(&args) {
        Ok(pass) => {
            if pass {
                0
            } else {
                2
            }
        }
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.exit_code()
        }
    };
    std::process::exit(code);
}

fn run(args: &Args) -> Result<bool, JobError> {
    let spec = JobSpec::from_file(&args.job)?;
    let job_dir = args
        .job
        .parent()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    let out_dir = args
        .out
        .clone()
        .or_else(|| spec.output_dir.clone())
        .ok_or_else(|| {
            JobError::Usage("output_dir: set it in the job spec or pass --out".into())
        })?;
    let envelope = jobs::run(&spec, &job_dir, &out_dir, args.verbosity)?;
    Ok(envelope.pass)
}
