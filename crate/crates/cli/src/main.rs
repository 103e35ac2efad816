//! `wsum`: verify weighted-sum identities from JSON job files.

mod job;
mod report;
mod run;
mod selftest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;
use wsum::formulae::Fault;

use job::{check_sweep, Job};
use report::{Report, SWEEP_HEADER};

const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Exit code 1: the identity did not verify.
const EXIT_MISMATCH: u8 = 1;

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("guard `{guard}` rejected the job: {detail}")]
    Guard { guard: &'static str, detail: String },
    #[error("{0}")]
    Evaluation(String),
}

impl From<wsum::Error> for Failure {
    fn from(e: wsum::Error) -> Self {
        match e {
            wsum::Error::Guard { guard, detail } => Failure::Guard {
                guard: guard.name(),
                detail,
            },
            other => Failure::Evaluation(other.to_string()),
        }
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Guard { .. } => 3,
            _ => 2,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        let body = match self {
            Failure::Schema { path, message } => {
                json!({"kind": "schema", "path": path, "message": message})
            }
            Failure::Io { path, message } => {
                json!({"kind": "io", "path": path, "message": message})
            }
            Failure::Guard { guard, detail } => {
                json!({"kind": "guard", "guard": guard, "message": detail})
            }
            Failure::Evaluation(message) => json!({"kind": "evaluation", "message": message}),
        };
        json!({ "error": body })
    }
}

#[derive(Parser)]
#[command(
    name = "wsum",
    version,
    about = "Verify weighted-sum identities against direct summation"
)]
struct Cli {
    /// Relative acceptance tolerance: a job passes when residual ≤ tol·(1 + |lhs|).
    #[arg(long, global = true)]
    tolerance: Option<f64>,

    /// Worker threads for series evaluation (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Add wall-clock time to verify reports.
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one job and print a JSON report.
    Verify { job: PathBuf },
    /// Evaluate one job at several series cuts and print CSV.
    Sweep {
        job: PathBuf,
        /// Comma-separated ascending cuts; defaults to the job's `sweep` list.
        #[arg(long = "N")]
        cutoffs: Option<String>,
    },
    /// Run the built-in invariant suite.
    Selftest {
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
    {
        log::warn!("thread pool: {e}");
    }
    let code = match &cli.command {
        Command::Verify { job } => verify(&cli, job),
        Command::Sweep { job, cutoffs } => sweep(job, cutoffs.as_deref()),
        Command::Selftest { inject_fault } => selftest(inject_fault.as_deref()),
    };
    ExitCode::from(code)
}

fn fail(e: &Failure) -> u8 {
    log::error!("{e}");
    println!(
        "{}",
        serde_json::to_string_pretty(&e.to_json()).expect("error serializes")
    );
    e.exit_code()
}

fn relative_tolerance(cli: &Cli, job: &Job) -> Result<f64, Failure> {
    let tol = match (cli.tolerance, &job.tolerance) {
        (Some(t), _) => t,
        (None, Some(t)) => t.value(),
        (None, None) => DEFAULT_TOLERANCE,
    };
    if tol > 0.0 && tol.is_finite() {
        Ok(tol)
    } else {
        Err(Failure::Schema {
            path: "tolerance".into(),
            message: format!("tolerance must be positive, got {tol}"),
        })
    }
}

fn verify(cli: &Cli, path: &Path) -> u8 {
    let start = Instant::now();
    let outcome = Job::load(path).and_then(|job| {
        let tol = relative_tolerance(cli, &job)?;
        log::info!(
            "verifying {} job from {}",
            job.identity.name(),
            path.display()
        );
        let result = run::evaluate(&job, None, Fault::None)?;
        Ok((job, result, tol))
    });
    match outcome {
        Ok((job, result, tol)) => {
            let threshold = tol * (1.0 + result.lhs.norm());
            let wall_ms = cli.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
            let report = Report::new(&job, &result, threshold, wall_ms);
            println!("{}", report.to_json());
            if report.pass {
                0
            } else {
                EXIT_MISMATCH
            }
        }
        Err(e) => fail(&e),
    }
}

fn parse_cutoffs(text: &str) -> Result<Vec<u64>, Failure> {
    let schema = |message: String| Failure::Schema {
        path: "--N".into(),
        message,
    };
    let list = if text.trim().is_empty() {
        Vec::new()
    } else {
        text.split(',')
            .map(|s| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|e| schema(format!("`{s}`: {e}")))
            })
            .collect::<Result<_, _>>()?
    };
    check_sweep(&list).map_err(schema)?;
    Ok(list)
}

fn sweep(path: &Path, cutoffs: Option<&str>) -> u8 {
    let setup = Job::load(path).and_then(|job| {
        if !job.identity.has_cutoff() {
            return Err(Failure::Schema {
                path: "identity".into(),
                message: format!(
                    "identity `{}` has no series cut to sweep",
                    job.identity.name()
                ),
            });
        }
        let list = match (cutoffs, &job.sweep) {
            (Some(text), _) => parse_cutoffs(text)?,
            (None, Some(list)) => list.clone(),
            (None, None) => {
                return Err(Failure::Schema {
                    path: "sweep".into(),
                    message: "no N list: pass --N or set `sweep` in the job".into(),
                })
            }
        };
        Ok((job, list))
    });
    let (job, list) = match setup {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    let mut rows = vec![SWEEP_HEADER.to_string()];
    for cutoff in list {
        let start = Instant::now();
        match run::evaluate(&job, Some(cutoff), Fault::None) {
            Ok(result) => {
                let ms = start.elapsed().as_secs_f64() * 1e3;
                log::info!("N = {cutoff}: residual {:e}", result.residual());
                rows.push(report::sweep_row(cutoff, &result, ms));
            }
            Err(e) => return fail(&e),
        }
    }
    println!("{}", rows.join("\n"));
    0
}

fn selftest(fault: Option<&str>) -> u8 {
    let fault = match fault {
        None => Fault::None,
        Some(name) => match Fault::from_name(name) {
            Some(f) => f,
            None => {
                return fail(&Failure::Schema {
                    path: "--inject-fault".into(),
                    message: format!("unknown fault `{name}`"),
                })
            }
        },
    };
    let groups = selftest::run(fault);
    let mut all = true;
    for group in &groups {
        let passed = group.checks.iter().filter(|c| c.pass).count();
        let verdict = if group.pass() { "PASS" } else { "FAIL" };
        println!("{verdict} {} ({passed}/{})", group.name, group.checks.len());
        for c in group.checks.iter().filter(|c| !c.pass) {
            println!("  failed: {}: {}", c.label, c.detail);
        }
        all &= group.pass();
    }
    if all {
        0
    } else {
        EXIT_MISMATCH
    }
}
