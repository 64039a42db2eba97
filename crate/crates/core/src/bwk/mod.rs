//! Bandits with knapsacks: outcome matrices, the LP relaxation, the
//! LagrangeBwK and UCB-BwK agents, and pricing / procurement / ad instances.

mod agents;
mod lp;

pub use agents::{lagrange_primal_gamma, ucb_bwk_eps, LagrangeBwK, UcbBwk};
pub use lp::{solve_bwk_lp, LpSolution};

use std::fmt::Write as _;
use std::path::Path;

use crate::episode::{Agent, ArmIndex, Feedback, FeedbackKind, Round};
use crate::error::{config_err, domain_err, Result};
use crate::rng::RngStream;

/// One row per arm: reward, then consumption of each resource.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeMatrix {
    rows: Vec<Vec<f64>>,
}

impl OutcomeMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let w = rows.first().map(Vec::len).unwrap_or(0);
        if w < 2 || rows.iter().any(|r| r.len() != w) {
            return Err(config_err!("outcome matrix needs equal rows of reward plus at least one resource"));
        }
        if rows.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(domain_err!("outcome entries must lie in [0,1]"));
        }
        Ok(Self { rows })
    }

    pub fn num_arms(&self) -> usize {
        self.rows.len()
    }

    pub fn num_resources(&self) -> usize {
        self.rows[0].len() - 1
    }

    pub fn reward(&self, a: ArmIndex) -> f64 {
        self.rows[a][0]
    }

    pub fn consumption(&self, a: ArmIndex, i: usize) -> f64 {
        self.rows[a][i + 1]
    }

    pub fn row(&self, a: ArmIndex) -> &[f64] {
        &self.rows[a]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// `r(D)`.
    pub fn reward_of(&self, d: &[f64]) -> f64 {
        d.iter().enumerate().map(|(a, p)| p * self.reward(a)).sum()
    }

    /// `c_i(D)`.
    pub fn consumption_of(&self, d: &[f64], i: usize) -> f64 {
        d.iter().enumerate().map(|(a, p)| p * self.consumption(a, i)).sum()
    }
}

/// `L(a, i) = r(a) + 1 - (T/B) c_i(a)`. Index `d` (one past the last resource)
/// is the time resource, which consumes `B/T` per round, so `L(a, d) = r(a)`.
pub fn lagrange_payoff(m: &OutcomeMatrix, a: ArmIndex, i: usize, horizon: usize, budget: f64) -> f64 {
    if i == m.num_resources() {
        return m.reward(a);
    }
    m.reward(a) + 1.0 - horizon as f64 / budget * m.consumption(a, i)
}

/// Finite-support outcome distribution per arm, budgets, horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct BwkInstance {
    arms: Vec<Vec<(f64, Vec<f64>)>>,
    budgets: Vec<f64>,
    horizon: usize,
    null_arm: ArmIndex,
}

impl BwkInstance {
    /// `arms[a]` lists `(probability, outcome row)` pairs. The first arm that
    /// surely yields no reward and no consumption is the null arm.
    pub fn new(arms: Vec<Vec<(f64, Vec<f64>)>>, budgets: Vec<f64>, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(config_err!("horizon must be positive"));
        }
        if budgets.is_empty() {
            return Err(config_err!("need at least one resource besides time"));
        }
        if let Some(b) = budgets.iter().find(|b| !(**b > 0.0 && **b <= horizon as f64)) {
            return Err(domain_err!("budget {b} outside (0, T]"));
        }
        if arms.is_empty() {
            return Err(config_err!("need at least one arm"));
        }
        let width = budgets.len() + 1;
        for (a, dist) in arms.iter().enumerate() {
            if dist.is_empty() {
                return Err(config_err!("arm {a} has no outcomes"));
            }
            if dist.iter().any(|(_, row)| row.len() != width) {
                return Err(config_err!("arm {a}: outcome rows need {width} entries"));
            }
            if dist.iter().flat_map(|(_, r)| r).any(|v| !(0.0..=1.0).contains(v)) {
                return Err(domain_err!("arm {a}: outcome entries must lie in [0,1]"));
            }
            let probs: Vec<f64> = dist.iter().map(|(p, _)| *p).collect();
            crate::concentration::check_prob_vector(&probs)?;
        }
        let null_arm = arms
            .iter()
            .position(|dist| dist.iter().all(|(p, row)| *p == 0.0 || row.iter().all(|v| *v == 0.0)))
            .ok_or_else(|| config_err!("instance has no null arm"))?;
        Ok(Self {
            arms,
            budgets,
            horizon,
            null_arm,
        })
    }

    /// Deterministic instance: each arm always yields its row.
    pub fn deterministic(m: &OutcomeMatrix, budgets: Vec<f64>, horizon: usize) -> Result<Self> {
        Self::new(m.rows().iter().map(|r| vec![(1.0, r.clone())]).collect(), budgets, horizon)
    }

    /// Text format, one directive per line (`#` starts a comment):
    /// `horizon T`, `budget B` (once per resource), `arm` (starts a new arm),
    /// `outcome p r c_1 .. c_d`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut horizon = None;
        let mut budgets = Vec::new();
        let mut arms: Vec<Vec<(f64, Vec<f64>)>> = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let key = it.next().expect("non-empty line");
            let nums: Vec<f64> = it
                .map(|s| s.parse().map_err(|_| config_err!("line {}: bad number {s:?}", no + 1)))
                .collect::<Result<_>>()?;
            match (key, nums.as_slice()) {
                ("horizon", [t]) if *t >= 1.0 && t.fract() == 0.0 => horizon = Some(*t as usize),
                ("budget", [b]) => budgets.push(*b),
                ("arm", []) => arms.push(Vec::new()),
                ("outcome", [p, row @ ..]) if !row.is_empty() => arms
                    .last_mut()
                    .ok_or_else(|| config_err!("line {}: outcome before any arm", no + 1))?
                    .push((*p, row.to_vec())),
                _ => return Err(config_err!("line {}: cannot parse {line:?}", no + 1)),
            }
        }
        Self::new(arms, budgets, horizon.ok_or_else(|| config_err!("missing horizon"))?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("horizon {}\n", self.horizon);
        for b in &self.budgets {
            let _ = writeln!(s, "budget {b}");
        }
        for dist in &self.arms {
            s.push_str("arm\n");
            for (p, row) in dist {
                let cells: Vec<String> = row.iter().map(f64::to_string).collect();
                let _ = writeln!(s, "outcome {p} {}", cells.join(" "));
            }
        }
        s
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn num_resources(&self) -> usize {
        self.budgets.len()
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn null_arm(&self) -> ArmIndex {
        self.null_arm
    }

    pub fn outcomes(&self, a: ArmIndex) -> &[(f64, Vec<f64>)] {
        &self.arms[a]
    }

    /// Smallest budget.
    pub fn budget(&self) -> f64 {
        self.budgets.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Per-round consumption of the time resource after rescaling, `B/T`.
    pub fn time_consumption(&self) -> f64 {
        self.budget() / self.horizon as f64
    }

    pub fn expected(&self) -> OutcomeMatrix {
        let w = self.budgets.len() + 1;
        OutcomeMatrix {
            rows: self
                .arms
                .iter()
                .map(|dist| (0..w).map(|k| dist.iter().map(|(p, r)| p * r[k]).sum()).collect())
                .collect(),
        }
    }

    /// LP optimum of the expected instance.
    pub fn lp(&self) -> Result<LpSolution> {
        let b = self.rescaled();
        solve_bwk_lp(&b.expected(), b.budget(), b.horizon)
    }

    fn sample(&self, a: ArmIndex, rng: &mut RngStream) -> Vec<f64> {
        let dist = &self.arms[a];
        if dist.len() == 1 {
            return dist[0].1.clone();
        }
        let probs: Vec<f64> = dist.iter().map(|(p, _)| *p).collect();
        dist[rng.categorical(&probs)].1.clone()
    }

    fn rescaled(&self) -> Self {
        rescale_budgets(self)
    }
}

/// Common budget `B = min_i B_i`: resource `i`'s consumption is divided by `B_i / B`.
pub fn rescale_budgets(inst: &BwkInstance) -> BwkInstance {
    let b = inst.budget();
    let factors: Vec<f64> = inst.budgets.iter().map(|bi| b / bi).collect();
    let arms = inst
        .arms
        .iter()
        .map(|dist| {
            dist.iter()
                .map(|(p, row)| {
                    let mut r = row.clone();
                    for (k, f) in factors.iter().enumerate() {
                        r[k + 1] *= f;
                    }
                    (*p, r)
                })
                .collect()
        })
        .collect();
    BwkInstance {
        arms,
        budgets: vec![b; inst.budgets.len()],
        horizon: inst.horizon,
        null_arm: inst.null_arm,
    }
}

/// Finite-support distribution given as `(value, probability)` pairs.
pub type ValueDist = Vec<(f64, f64)>;

fn check_values(values: &ValueDist) -> Result<()> {
    let probs: Vec<f64> = values.iter().map(|(_, p)| *p).collect();
    crate::concentration::check_prob_vector(&probs)?;
    if values.iter().any(|(v, _)| !v.is_finite()) {
        return Err(domain_err!("values must be finite"));
    }
    Ok(())
}

fn check_prices(prices: &[f64]) -> Result<()> {
    if prices.is_empty() || prices.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(domain_err!("price grid must be non-empty with prices in [0,1]"));
    }
    Ok(())
}

fn with_null_arm(mut arms: Vec<Vec<(f64, Vec<f64>)>>, width: usize) -> Vec<Vec<(f64, Vec<f64>)>> {
    let has_null = arms.iter().any(|d| d.iter().all(|(p, r)| *p == 0.0 || r.iter().all(|v| *v == 0.0)));
    if !has_null {
        arms.push(vec![(1.0, vec![0.0; width])]);
    }
    arms
}

fn merge(outcomes: Vec<(f64, Vec<f64>)>) -> Vec<(f64, Vec<f64>)> {
    let mut out: Vec<(f64, Vec<f64>)> = Vec::new();
    for (p, row) in outcomes {
        match out.iter_mut().find(|(_, r)| *r == row) {
            Some(slot) => slot.0 += p,
            None => out.push((p, row)),
        }
    }
    out
}

/// Dynamic pricing with supply `B`: price `p` sells when the value is at least
/// `p`, giving outcome `(p, 1)`, else `(0, 0)`. A null arm is appended when no
/// price is null.
pub fn pricing_env(values: &ValueDist, prices: &[f64], supply: f64, horizon: usize) -> Result<BwkInstance> {
    check_values(values)?;
    check_prices(prices)?;
    let arms = prices
        .iter()
        .map(|&p| {
            merge(
                values
                    .iter()
                    .map(|&(v, q)| (q, if v >= p { vec![p, 1.0] } else { vec![0.0, 0.0] }))
                    .collect(),
            )
        })
        .collect();
    BwkInstance::new(with_null_arm(arms, 2), vec![supply], horizon)
}

/// Hiring with budget `B`: offer `p` is accepted when `p` is at least the
/// worker's value, giving outcome `(1, p)`, else `(0, 0)`.
pub fn procurement_env(values: &ValueDist, prices: &[f64], budget: f64, horizon: usize) -> Result<BwkInstance> {
    check_values(values)?;
    check_prices(prices)?;
    let arms = prices
        .iter()
        .map(|&p| {
            merge(
                values
                    .iter()
                    .map(|&(v, q)| (q, if p >= v { vec![1.0, p] } else { vec![0.0, 0.0] }))
                    .collect(),
            )
        })
        .collect();
    BwkInstance::new(with_null_arm(arms, 2), vec![budget], horizon)
}

/// Pay-per-click: ad `a` is clicked with probability `click_probs[a]`, earning
/// `rewards[a]` and charging the same amount to advertiser `owners[a]`.
pub fn ppc_env(
    click_probs: &[f64],
    rewards: &[f64],
    owners: &[usize],
    budgets: Vec<f64>,
    horizon: usize,
) -> Result<BwkInstance> {
    let k = click_probs.len();
    if k == 0 || rewards.len() != k || owners.len() != k {
        return Err(config_err!("ads need matching click probabilities, rewards and owners"));
    }
    if let Some(o) = owners.iter().find(|o| **o >= budgets.len()) {
        return Err(config_err!("owner {o} has no budget"));
    }
    let width = budgets.len() + 1;
    let arms = (0..k)
        .map(|a| {
            let mut click = vec![0.0; width];
            click[0] = rewards[a];
            click[owners[a] + 1] = rewards[a];
            merge(vec![(click_probs[a], click), (1.0 - click_probs[a], vec![0.0; width])])
        })
        .collect();
    BwkInstance::new(with_null_arm(arms, width), budgets, horizon)
}

/// One BwK run.
#[derive(Debug, Clone, PartialEq)]
pub struct BwkRun {
    pub arms: Vec<ArmIndex>,
    pub rewards: Vec<f64>,
    /// Cumulative consumption of each resource after each round.
    pub consumed: Vec<Vec<f64>>,
    /// Round in which some resource first exceeded its budget.
    pub stopped_at: Option<usize>,
    /// Reward of all rounds before the stopping round.
    pub adjusted_reward: f64,
}

impl BwkRun {
    pub fn rounds(&self) -> usize {
        self.arms.len()
    }
}

/// Runs `agent` on the rescaled instance until the horizon or the first round
/// in which some resource's total consumption exceeds `B`. The agent receives
/// `Feedback::OutcomeRow` with the rescaled consumption of the `d` resources.
pub fn run_bwk(inst: &BwkInstance, agent: &mut dyn Agent, rng: &RngStream) -> Result<BwkRun> {
    let inst = rescale_budgets(inst);
    if agent.num_arms() != inst.num_arms() {
        return Err(config_err!("agent has {} arms, instance {}", agent.num_arms(), inst.num_arms()));
    }
    if agent.feedback_kind() != FeedbackKind::Outcome {
        return Err(config_err!("BwK agents need outcome feedback"));
    }
    let b = inst.budget();
    let mut env_rng = rng.substream("env");
    let mut agent_rng = rng.substream("agent");
    let mut total = vec![0.0; inst.num_resources()];
    let mut run = BwkRun {
        arms: Vec::new(),
        rewards: Vec::new(),
        consumed: Vec::new(),
        stopped_at: None,
        adjusted_reward: 0.0,
    };
    for t in 1..=inst.horizon {
        let round = Round::plain(t);
        let a = agent.act(&round, &mut agent_rng);
        if a >= inst.num_arms() {
            return Err(config_err!("agent chose arm {a}"));
        }
        let row = inst.sample(a, &mut env_rng);
        for (c, x) in total.iter_mut().zip(&row[1..]) {
            *c += x;
        }
        run.arms.push(a);
        run.rewards.push(row[0]);
        run.consumed.push(total.clone());
        if total.iter().any(|c| *c > b) {
            run.stopped_at = Some(t);
            break;
        }
        run.adjusted_reward += row[0];
        agent.observe(
            &round,
            a,
            &Feedback::OutcomeRow {
                reward: row[0],
                consumption: row[1..].to_vec(),
            },
            &mut agent_rng,
        )?;
    }
    Ok(run)
}
