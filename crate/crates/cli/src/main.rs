//! `fracp`: runs one experiment per invocation and writes `report.json`
//! plus one CSV per table.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input (nothing written),
//! 3 NaN or infinity in a result (nothing written).

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use commands::{execute, prepare, Experiment, Failure};
use config::Config;

#[derive(Parser)]
#[command(
    name = "fracp",
    version,
    about = "Fractional Sobolev and nonlocal p-Laplacian experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report.json and the CSV tables.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Size of the worker pool.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the global seed of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the grid resolution of the config.
    #[arg(long)]
    resolution: Option<usize>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Experiment to validate for; defaults to the `command` key of the config.
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    resolution: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Gagliardo seminorm of `u` over the domain.
    Seminorm(RunArgs),
    /// Fractional p-Laplacian pairing of `u` against `phi`.
    Pairing(RunArgs),
    /// Commutator sweep over eps with a log-log slope fit.
    CommutatorSweep(RunArgs),
    /// Logarithmic potential functional of `phi` and its seminorm ratio.
    Logpot(RunArgs),
    /// Littlewood-Paley pieces and the Triebel/Gagliardo ratio of `u`.
    LpEquiv(RunArgs),
    /// Nonlocal Dirichlet problem by energy descent.
    Solve(RunArgs),
    /// Solve, then probe higher differentiability inside the domain.
    Probe(RunArgs),
    /// Poincare-type comparison on a box and its dilate.
    Poincare(RunArgs),
    /// Interior seminorm estimate on a box.
    Caccioppoli(RunArgs),
    /// Checks a configuration without running it.
    Validate(ValidateArgs),
}

fn load(path: &Path, seed: Option<u64>, resolution: Option<usize>) -> Result<Config, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("config {}: {e}", path.display())))?;
    Config::parse(&text)
        .map(|c| c.resolve(seed, resolution))
        .map_err(|e| Failure::Validation(vec![e]))
}

fn run(exp: Experiment, args: &RunArgs) -> Result<(), Failure> {
    if let Some(k) = args.threads {
        if k == 0 {
            return Err(Failure::Validation(vec!["--threads must be >= 1".into()]));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Failure::Io(e.to_string()))?;
    }
    let cfg = load(&args.config, args.seed, args.resolution)?;
    let job = prepare(exp, cfg).map_err(Failure::Validation)?;
    let mut rep = execute(&job)?;
    rep.provenance.timestamp_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    rep.write_dir(&args.out)
        .map_err(|e| Failure::Io(e.to_string()))?;
    for (k, f) in &rep.fitted {
        match f.value {
            Some(v) => println!("{k} = {v}"),
            None => println!("{k} = undefined"),
        }
    }
    Ok(())
}

fn validate(args: &ValidateArgs) -> Result<(), Failure> {
    let cfg = load(&args.config, args.seed, args.resolution)?;
    let exp = match (args.experiment, cfg.command.as_deref()) {
        (Some(e), _) => e,
        (None, Some(name)) => Experiment::from_name(name)
            .ok_or_else(|| Failure::Validation(vec![format!("unknown command `{name}`")]))?,
        (None, None) => {
            return Err(Failure::Validation(vec![
                "no experiment: pass --experiment or set `command` in the config".into(),
            ]))
        }
    };
    prepare(exp, cfg).map_err(Failure::Validation)?;
    println!("ok");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Seminorm(a) => run(Experiment::Seminorm, a),
        Command::Pairing(a) => run(Experiment::Pairing, a),
        Command::CommutatorSweep(a) => run(Experiment::CommutatorSweep, a),
        Command::Logpot(a) => run(Experiment::Logpot, a),
        Command::LpEquiv(a) => run(Experiment::LpEquiv, a),
        Command::Solve(a) => run(Experiment::Solve, a),
        Command::Probe(a) => run(Experiment::Probe, a),
        Command::Poincare(a) => run(Experiment::Poincare, a),
        Command::Caccioppoli(a) => run(Experiment::Caccioppoli, a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msgs)) => {
            for m in msgs {
                eprintln!("invalid: {m}");
            }
            ExitCode::from(2)
        }
        Err(Failure::Numerical(at)) => {
            eprintln!("numerical failure: {at}");
            ExitCode::from(3)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
