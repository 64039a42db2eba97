use std::path::PathBuf;
use std::process::ExitCode;

use banditlab::harness::suites::{run_suite, SUITES};
use banditlab::harness::{run_experiment, ExperimentConfig};
use banditlab::incentives::{
    bic_epsilon_bound, bic_verify, BicMode, BicParams, BicReport, ConstantArm, RepeatedHiddenExploration, RoundRobin,
    TwoArmPrior,
};
use banditlab::Error;
use clap::{Parser, Subcommand, ValueEnum};

const CONFIG_ERROR: u8 = 2;
const PROPERTY_VIOLATION: u8 = 3;

#[derive(Parser)]
#[command(name = "banditlab", version, about = "Seeded bandit experiments and property checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write per-seed CSVs plus summary.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `run.out`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named property suite, or `all`.
    Suite {
        #[arg(long)]
        name: String,
    },
    /// Exhaustively check that repeated hidden exploration is BIC.
    VerifyBic {
        /// File of `point <mu1> <mu2> <prob>` lines.
        #[arg(long)]
        prior: PathBuf,
        #[arg(long)]
        n0: u32,
        #[arg(long)]
        eps: f64,
        #[arg(long = "T")]
        horizon: usize,
        /// Algorithm run on exploration rounds.
        #[arg(long, value_enum, default_value_t = Inner::Arm2)]
        inner: Inner,
        /// Maximum number of enumerated states.
        #[arg(long, default_value_t = 1 << 22)]
        cap: usize,
        /// Require strictly positive margins.
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Inner {
    /// Always the second arm.
    Arm2,
    /// Alternate, starting with the second arm.
    Alternate,
}

enum Outcome {
    Ok,
    Violation,
}

fn print_bic(report: &BicReport) {
    println!("round,arm,prob,margin");
    for c in &report.constraints {
        println!("{},{},{},{}", c.round, c.arm + 1, c.prob, c.margin);
    }
    println!("worst margin: {}", report.worst_margin);
    println!("states enumerated: {}", report.nodes);
    println!("{}", if report.pass { "BIC: pass" } else { "BIC: FAIL" });
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let s = run_experiment(&cfg, out.as_deref())?;
            let regret = s.mean_regret.map_or("n/a".to_string(), |m| format!("{m} (se {})", s.stderr_regret.unwrap_or(0.0)));
            println!("seeds: {}", s.per_seed.len());
            println!("mean total reward: {} (se {})", s.mean_reward, s.stderr_reward);
            println!("mean final regret: {regret}");
            Ok(Outcome::Ok)
        }
        Command::Suite { name } => {
            let names: Vec<&str> = if name == "all" { SUITES.to_vec() } else { vec![name.as_str()] };
            let mut ok = true;
            for n in names {
                let report = run_suite(n)?;
                print!("{report}");
                ok &= report.pass();
            }
            Ok(if ok { Outcome::Ok } else { Outcome::Violation })
        }
        Command::VerifyBic {
            prior,
            n0,
            eps,
            horizon,
            inner,
            cap,
            strict,
        } => {
            let prior = TwoArmPrior::load(&prior)?;
            if prior.swapped() {
                println!("note: arms relabeled so that arm 1 has the higher prior mean");
            }
            let bound = bic_epsilon_bound(&prior, n0);
            println!("eps bound at N0={n0}: {bound}");
            if eps > bound {
                println!("note: eps {eps} exceeds the bound; BIC is not guaranteed");
            }
            let params = BicParams { n0, eps };
            let mode = if strict { BicMode::Strict } else { BicMode::Weak };
            let report = match inner {
                Inner::Arm2 => bic_verify(&RepeatedHiddenExploration::new(prior.clone(), params, ConstantArm(1))?, &prior, horizon, mode, cap)?,
                Inner::Alternate => {
                    bic_verify(&RepeatedHiddenExploration::new(prior.clone(), params, RoundRobin::new(1))?, &prior, horizon, mode, cap)?
                }
            };
            print_bic(&report);
            Ok(if report.pass { Outcome::Ok } else { Outcome::Violation })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => ExitCode::from(PROPERTY_VIOLATION),
        Err(Error::Invariant(msg)) => {
            eprintln!("property violation: {msg}");
            ExitCode::from(PROPERTY_VIOLATION)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(CONFIG_ERROR)
        }
    }
}
