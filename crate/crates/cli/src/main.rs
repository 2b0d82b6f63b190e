use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ringlab_core::config::{parse_config, ExperimentKind};
use ringlab_core::lab::{self, EXIT_USAGE};
use ringlab_core::report::schema_text;
use ringlab_core::Error;

/// Heat and Laplace experiments on planar convex rings.
#[derive(Parser, Debug)]
#[command(name = "ringlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; defaults to `out/<experiment>`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; falls back to the config, then LAB_WORKERS.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for probe sampling (first seed for verify-identities).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the heat problem and write the initial and final fields.
    Solve,
    /// Heat flow from zero data, with the full space-time analysis.
    Borell,
    /// Laplace solves along a deformation from a ball ring to the config ring.
    HarmonicHomotopy,
    /// Family of heat flows whose data interpolate Borell and Poisson data.
    DataHomotopy,
    /// Heat flow from subharmonic Poisson data, with the full analysis.
    Theorem12,
    /// Check the curvature-derivative identities on random jets.
    VerifyIdentities {
        #[arg(long, default_value_t = 100)]
        seeds: u64,
    },
    /// Print the report schema.
    Schema,
}

impl Command {
    fn kind(&self) -> Option<ExperimentKind> {
        Some(match self {
            Command::Solve => ExperimentKind::Solve,
            Command::Borell => ExperimentKind::Borell,
            Command::HarmonicHomotopy => ExperimentKind::HarmonicHomotopy,
            Command::DataHomotopy => ExperimentKind::DataHomotopy,
            Command::Theorem12 => ExperimentKind::Theorem12,
            Command::VerifyIdentities { .. } | Command::Schema => return None,
        })
    }
}

fn fail(err: &Error) -> i32 {
    eprintln!("ringlab: {err}");
    lab::exit_code(err)
}

fn run_experiment(cli: &Cli, kind: ExperimentKind) -> i32 {
    let Some(path) = &cli.config else {
        eprintln!("ringlab: {} needs --config <path>", kind.name());
        return EXIT_USAGE;
    };
    let mut cfg = match parse_config(path) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if let Some(seed) = cli.seed {
        cfg.run.analysis.seed = seed;
    }
    let workers = match lab::resolve_workers(cli.workers, cfg.workers) {
        Ok(w) => w,
        Err(e) => return fail(&e),
    };
    cfg.workers = workers;
    let out = cli.out.clone().unwrap_or_else(|| Path::new("out").join(kind.name()));
    match lab::with_workers(workers, || lab::dispatch(&cfg, kind, &out)) {
        Err(e) | Ok(Err(e)) => fail(&e),
        Ok(Ok(outcome)) => {
            let verdict = if outcome.pass { "PASS" } else { "FAIL" };
            println!("{} {verdict}: report {}", kind.name(), outcome.report_path.display());
            for f in &outcome.failures {
                println!("  {f}");
            }
            outcome.exit_code
        }
    }
}

fn run_identities(cli: &Cli, seeds: u64) -> i32 {
    let workers = match lab::resolve_workers(cli.workers, None) {
        Ok(w) => w,
        Err(e) => return fail(&e),
    };
    let first = cli.seed.unwrap_or(0);
    match lab::with_workers(workers, || lab::run_identities(first, seeds, cli.out.as_deref())) {
        Err(e) | Ok(Err(e)) => fail(&e),
        Ok(Ok((report, code))) => {
            println!(
                "{:<44} {:>12} {:>12} {:>7} {:>9}",
                "identity", "max resid", "resid/tol", "degree", "asserted"
            );
            for s in &report.identities {
                println!(
                    "{:<44} {:>12.3e} {:>12.3e} {:>7} {:>9}",
                    s.identity, s.max_residual, s.max_scaled_residual, s.degree, s.asserted
                );
            }
            let verdict = if report.pass { "PASS" } else { "FAIL" };
            println!(
                "verify-identities {verdict}: {} seeds from {}",
                report.seeds, report.first_seed
            );
            code
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match (&cli.command, cli.command.kind()) {
        (_, Some(kind)) => run_experiment(&cli, kind),
        (Command::VerifyIdentities { seeds }, None) => run_identities(&cli, *seeds),
        _ => {
            print!("{}", schema_text());
            0
        }
    };
    ExitCode::from(code as u8)
}
