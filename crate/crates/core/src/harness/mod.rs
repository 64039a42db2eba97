//! Seeded experiment runner: configuration, CSV output, fixtures and suites.
//!
//! One CSV per seed with header `seed,t,arm,reward,cum_reward,regret`, plus
//! `summary.csv` with each seed's totals followed by `mean` and `stderr` rows.
//! The regret column is cumulative pseudo-regret when the environment knows
//! its means, realized regret against the best fixed arm otherwise, and
//! blank for knapsack runs.

pub mod config;
pub mod fixtures;
pub mod registry;
pub mod suites;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, KeyValues, Spec};
use registry::{build_agent, build_continuum_agent, build_env, game_settings, Instance, Setting};

use crate::bwk::run_bwk;
use crate::episode::{run_episode, ArmIndex, FeedbackKind};
use crate::error::{Error, Result};
use crate::games::repeated_game;
use crate::lipschitz::run_continuum;
use crate::par::{map_seeds, mean_and_stderr};
use crate::rng::RngStream;

pub const CSV_HEADER: [&str; 6] = ["seed", "t", "arm", "reward", "cum_reward", "regret"];
pub const SUMMARY_HEADER: [&str; 4] = ["seed", "rounds", "total_reward", "final_regret"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArmValue {
    Index(ArmIndex),
    Point(f64),
}

impl fmt::Display for ArmValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArmValue::Index(a) => write!(f, "{a}"),
            ArmValue::Point(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub seed: u64,
    pub t: usize,
    pub arm: ArmValue,
    pub reward: f64,
    pub cum_reward: f64,
    pub regret: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedResult {
    pub seed: u64,
    pub rows: Vec<ResultRow>,
}

impl SeedResult {
    pub fn total_reward(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.cum_reward)
    }

    pub fn final_regret(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.regret)
    }
}

fn rows_from(seed: u64, arms: Vec<ArmValue>, rewards: &[f64], regret: Option<Vec<f64>>) -> Vec<ResultRow> {
    let mut cum = 0.0;
    arms.into_iter()
        .zip(rewards)
        .enumerate()
        .map(|(i, (arm, &reward))| {
            cum += reward;
            ResultRow {
                seed,
                t: i + 1,
                arm,
                reward,
                cum_reward: cum,
                regret: regret.as_ref().map(|r| r[i]),
            }
        })
        .collect()
}

fn cumulative(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// Runs one seed. Games report the row player's payoff `-M(i,j)` as the
/// reward; knapsack runs list only the rounds counted before stopping.
pub fn run_seed(config: &ExperimentConfig, seed: u64) -> Result<SeedResult> {
    let rng = RngStream::new(seed);
    let horizon = config.horizon;
    let rows = match build_env(&config.env, horizon, &rng)? {
        Instance::Episode { mut env, setting } => {
            let mut agent = build_agent(&config.agent, &setting)?;
            let ep = run_episode(&mut env, &mut agent, horizon, &rng)?;
            let regret = match &ep.round_gaps {
                Some(g) => cumulative(g),
                None => ep.hindsight_regret.clone(),
            };
            let arms = ep.history.arms().into_iter().map(ArmValue::Index).collect();
            rows_from(seed, arms, &ep.rewards, Some(regret))
        }
        Instance::Continuum { mut env, metric } => {
            let mut agent = build_continuum_agent(&config.agent, horizon, metric)?;
            let ep = run_continuum(&mut *env, &mut *agent, horizon, &rng)?;
            let arms = ep.arms.iter().map(|x| ArmValue::Point(*x)).collect();
            rows_from(seed, arms, &ep.rewards, Some(cumulative(&ep.gaps)))
        }
        Instance::Bwk(inst) => {
            let mut setting = Setting::new(inst.num_arms(), horizon, FeedbackKind::Outcome);
            setting.bwk = Some(inst.clone());
            let mut agent = build_agent(&config.agent, &setting)?;
            let run = run_bwk(&inst, &mut agent, &rng)?;
            let counted = run.stopped_at.map_or(run.rounds(), |s| s - 1);
            let arms = run.arms[..counted].iter().map(|a| ArmValue::Index(*a)).collect();
            rows_from(seed, arms, &run.rewards[..counted], None)
        }
        Instance::Game { matrix, feedback, opponent } => {
            let (rs, cs) = game_settings(&matrix, feedback, horizon);
            let mut row = build_agent(&config.agent, &rs)?;
            let mut col = build_agent(&opponent, &cs)?;
            let trace = repeated_game(&mut row, &mut col, &matrix, horizon, feedback, &rng)?;
            let mut col_costs = vec![0.0; matrix.num_rows()];
            let mut total = 0.0;
            let mut regret = Vec::with_capacity(horizon);
            for r in &trace.rounds {
                total += r.cost;
                for (i, c) in col_costs.iter_mut().enumerate() {
                    *c += matrix.get(i, r.j);
                }
                regret.push(total - col_costs.iter().cloned().fold(f64::INFINITY, f64::min));
            }
            let arms = trace.rounds.iter().map(|r| ArmValue::Index(r.i)).collect();
            let rewards: Vec<f64> = trace.rounds.iter().map(|r| -r.cost).collect();
            rows_from(seed, arms, &rewards, Some(regret))
        }
    };
    Ok(SeedResult { seed, rows })
}

/// Validates the configuration, then runs every seed (in parallel when enabled).
pub fn run_all(config: &ExperimentConfig) -> Result<Vec<SeedResult>> {
    registry::validate(&config.env, &config.agent, config.horizon, config.seeds[0])?;
    map_seeds(&config.seeds, |seed| run_seed(config, seed)).into_iter().collect()
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_rows<W: Write>(writer: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.seed.to_string(),
            r.t.to_string(),
            r.arm.to_string(),
            r.reward.to_string(),
            r.cum_reward.to_string(),
            fmt_opt(r.regret),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub per_seed: Vec<(u64, usize, f64, Option<f64>)>,
    pub mean_reward: f64,
    pub stderr_reward: f64,
    pub mean_regret: Option<f64>,
    pub stderr_regret: Option<f64>,
}

impl Summary {
    pub fn of(results: &[SeedResult]) -> Self {
        let per_seed: Vec<_> = results
            .iter()
            .map(|r| (r.seed, r.rows.len(), r.total_reward(), r.final_regret()))
            .collect();
        let rewards: Vec<f64> = per_seed.iter().map(|s| s.2).collect();
        let regrets: Option<Vec<f64>> = per_seed.iter().map(|s| s.3).collect();
        let (mean_reward, stderr_reward) = mean_and_stderr(&rewards);
        let (mean_regret, stderr_regret) = match regrets {
            Some(r) => {
                let (m, s) = mean_and_stderr(&r);
                (Some(m), Some(s))
            }
            None => (None, None),
        };
        Self {
            per_seed,
            mean_reward,
            stderr_reward,
            mean_regret,
            stderr_regret,
        }
    }

    pub fn write<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(SUMMARY_HEADER)?;
        for (seed, rounds, reward, regret) in &self.per_seed {
            w.write_record([seed.to_string(), rounds.to_string(), reward.to_string(), fmt_opt(*regret)])?;
        }
        w.write_record(["mean".to_string(), String::new(), self.mean_reward.to_string(), fmt_opt(self.mean_regret)])?;
        w.write_record(["stderr".to_string(), String::new(), self.stderr_reward.to_string(), fmt_opt(self.stderr_regret)])?;
        w.flush()?;
        Ok(())
    }
}

pub fn seed_file(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("seed_{seed}.csv"))
}

/// Runs the experiment and writes `seed_<s>.csv` per seed plus `summary.csv`
/// into `out`, falling back to `run.out` and then `results`.
pub fn run_experiment(config: &ExperimentConfig, out: Option<&Path>) -> Result<Summary> {
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    let results = run_all(config)?;
    std::fs::create_dir_all(&dir).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", dir.display()))))?;
    for r in &results {
        write_rows(std::fs::File::create(seed_file(&dir, r.seed))?, &r.rows)?;
    }
    let summary = Summary::of(&results);
    summary.write(std::fs::File::create(dir.join("summary.csv"))?)?;
    Ok(summary)
}
