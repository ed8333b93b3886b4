//! Command-line front end. Exit codes: 0 success, 1 other failure,
//! 2 configuration error, 3 solver failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use chp_dispatch::config::Config;
use chp_dispatch::harness::{
    cmd_compare, cmd_evaluate, cmd_gen_profiles, cmd_train, PolicyKind, RunContext,
};
use chp_dispatch::Error;

#[derive(Parser)]
#[command(
    name = "chpd",
    version,
    about = "Heat-and-power microgrid dispatch: train, evaluate and compare policies"
)]
struct Cli {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of scenarios (training pool for `train`, evaluation days otherwise).
    #[arg(long, global = true)]
    scenarios: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Adp,
    Myopic,
    Mpc,
    Milp,
    MilpStatic,
    MilpDayAhead,
}

impl From<PolicyArg> for PolicyKind {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Adp => PolicyKind::Adp,
            PolicyArg::Myopic => PolicyKind::Myopic,
            PolicyArg::Mpc => PolicyKind::Mpc,
            PolicyArg::Milp => PolicyKind::Milp,
            PolicyArg::MilpStatic => PolicyKind::MilpStatic,
            PolicyArg::MilpDayAhead => PolicyKind::MilpDayAhead,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train value functions; writes vfa.json and convergence.csv.
    Train,
    /// Evaluate one policy on the evaluation scenarios.
    Evaluate {
        #[arg(long, value_enum)]
        policy: PolicyArg,
        /// Trained value functions (default: OUT/vfa.json).
        #[arg(long)]
        vfa: Option<PathBuf>,
    },
    /// Compare all policies on common scenarios; trains first unless --vfa is given.
    Compare {
        #[arg(long)]
        vfa: Option<PathBuf>,
    },
    /// Write the forecast profile and realized scenarios.
    GenProfiles,
}

fn run(cli: Cli) -> chp_dispatch::Result<()> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let (Command::Train, Some(n)) = (&cli.command, cli.scenarios) {
        config.training.scenarios = n;
    }
    config.validate()?;
    let scenarios = cli.scenarios.unwrap_or(config.evaluation.scenarios);
    let ctx = RunContext::new(config, cli.config.clone(), cli.out.clone());

    match cli.command {
        Command::Train => {
            let out = cmd_train(&ctx)?;
            match out.trace.converged_at {
                Some(n) => println!("converged after {n} iterations"),
                None => println!("not converged after {} iterations", out.trace.records.len()),
            }
        }
        Command::Evaluate { policy, vfa } => {
            let s = cmd_evaluate(&ctx, policy.into(), scenarios, vfa.as_deref())?;
            println!(
                "{}: mean cost {:.2} $ (std {:.2}) over {} scenarios",
                s.policy, s.mean_cost, s.std_cost, s.scenarios
            );
        }
        Command::Compare { vfa } => {
            let c = cmd_compare(&ctx, scenarios, vfa.as_deref())?;
            if let Some(n) = c.trace.as_ref().and_then(|t| t.converged_at) {
                println!("training converged after {n} iterations");
            }
            print!("{}", c.table());
        }
        Command::GenProfiles => {
            let set = cmd_gen_profiles(&ctx, scenarios)?;
            println!(
                "wrote profiles and {} scenarios to {}",
                set.count,
                ctx.out.display()
            );
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidParam { .. } => 2,
        e if e.is_solver_failure() => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
