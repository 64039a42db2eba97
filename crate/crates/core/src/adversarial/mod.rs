//! Full-feedback experts algorithms (majority vote, WMA, Hedge) and their
//! bandit reductions (EXP3, EXP4).

mod exp4;
mod experts;

pub use exp4::{exp3, exp3_crude_gamma, exp4_fake_costs, exp4_propensities, Exp4, ExpertSet, ExpertTable, IdentityExperts};
pub use experts::{run_binary_prediction, BinaryPredictor, MajorityVote, Wma};

use crate::episode::{Agent, ArmIndex, Environment, Feedback, FeedbackKind, Round, Step};
use crate::error::{config_err, domain_err, Result};
use crate::rng::RngStream;

/// Multiplicative weights over `N` actions, stored as log-weights.
/// A cost `c` multiplies a weight by `(1 - eps)^c`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightState {
    log_w: Vec<f64>,
    eps: f64,
}

impl WeightState {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        if n == 0 {
            return Err(config_err!("weight state needs at least one action"));
        }
        if !(eps > 0.0 && eps <= 0.5) {
            return Err(domain_err!("Hedge parameter must lie in (0, 1/2], got {eps}"));
        }
        Ok(Self {
            log_w: vec![0.0; n],
            eps,
        })
    }

    pub fn len(&self) -> usize {
        self.log_w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_w.is_empty()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_w
    }

    /// Normalized weights.
    pub fn probs(&self) -> Vec<f64> {
        let top = self.log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = self.log_w.iter().map(|l| (l - top).exp()).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    }

    pub fn update(&mut self, costs: &[f64]) -> Result<()> {
        if costs.len() != self.log_w.len() {
            return Err(domain_err!("got {} costs for {} actions", costs.len(), self.log_w.len()));
        }
        if costs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(domain_err!("Hedge costs must be finite and nonnegative"));
        }
        let step = (1.0 - self.eps).ln();
        for (lw, c) in self.log_w.iter_mut().zip(costs) {
            *lw += c * step;
        }
        Ok(())
    }
}

fn clamp_eps(k: usize, raw: f64) -> f64 {
    if k <= 1 || !raw.is_finite() {
        0.25
    } else {
        raw.clamp(1e-12, 0.5)
    }
}

/// `sqrt(ln K / (2 U))` for per-round costs in `[0, u]` over `horizon` rounds (U = u T).
pub fn hedge_eps_bounded(k: usize, u: f64, horizon: usize) -> f64 {
    clamp_eps(k, ((k as f64).ln() / (2.0 * u * horizon as f64)).sqrt())
}

/// `sqrt(ln K / (3 U))` for unbounded costs with `sum_t E[G_t] <= U`.
pub fn hedge_eps_unbounded(k: usize, u_total: f64) -> f64 {
    clamp_eps(k, ((k as f64).ln() / (3.0 * u_total)).sqrt())
}

/// Hedge over `K` actions with full cost feedback.
#[derive(Debug, Clone)]
pub struct Hedge {
    weights: WeightState,
    expected_cost: f64,
    realized_cost: f64,
    last: Option<ArmIndex>,
}

impl Hedge {
    pub fn new(k: usize, eps: f64) -> Result<Self> {
        Ok(Self {
            weights: WeightState::new(k, eps)?,
            expected_cost: 0.0,
            realized_cost: 0.0,
            last: None,
        })
    }

    /// Parameter `sqrt(ln K / (2T))` for unit costs.
    pub fn for_horizon(k: usize, horizon: usize) -> Result<Self> {
        Self::new(k, hedge_eps_bounded(k, 1.0, horizon))
    }

    pub fn weights(&self) -> &WeightState {
        &self.weights
    }

    /// `sum_t p_t . c_t` so far.
    pub fn expected_cost(&self) -> f64 {
        self.expected_cost
    }

    pub fn realized_cost(&self) -> f64 {
        self.realized_cost
    }

    /// Feed a cost vector without having sampled an action.
    pub fn update(&mut self, costs: &[f64]) -> Result<()> {
        let p = self.weights.probs();
        self.weights.update(costs)?;
        self.expected_cost += p.iter().zip(costs).map(|(p, c)| p * c).sum::<f64>();
        Ok(())
    }
}

impl Agent for Hedge {
    fn num_arms(&self) -> usize {
        self.weights.len()
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::FullCosts
    }

    fn act(&mut self, _: &Round, rng: &mut RngStream) -> ArmIndex {
        let a = rng.categorical(&self.weights.probs());
        self.last = Some(a);
        a
    }

    fn observe(&mut self, _: &Round, arm: ArmIndex, feedback: &Feedback, _: &mut RngStream) -> Result<()> {
        match feedback {
            Feedback::FullCosts(c) => {
                self.update(c)?;
                self.realized_cost += c[arm];
                Ok(())
            }
            other => Err(config_err!("Hedge needs full cost feedback, got {other:?}")),
        }
    }

    fn action_distribution(&self, _: &Round) -> Option<Vec<f64>> {
        Some(self.weights.probs())
    }
}

/// Deterministic oblivious adversary given by a `T x K` cost table.
///
/// Under full feedback the agent sees every cost and is credited `-c(a)`.
/// Under bandit feedback costs must lie in `[0,1]`; the agent sees and is
/// credited the reward `1 - c(a)`.
#[derive(Debug, Clone)]
pub struct CostTableEnv {
    table: Vec<Vec<f64>>,
    kind: FeedbackKind,
}

impl CostTableEnv {
    pub fn new(table: Vec<Vec<f64>>, kind: FeedbackKind) -> Result<Self> {
        let k = table.first().map(Vec::len).unwrap_or(0);
        if k == 0 {
            return Err(config_err!("cost table must be non-empty"));
        }
        if table.iter().any(|r| r.len() != k) {
            return Err(config_err!("cost table rows differ in length"));
        }
        if table.iter().flatten().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(domain_err!("costs must be finite and nonnegative"));
        }
        match kind {
            FeedbackKind::FullCosts => {}
            FeedbackKind::Bandit => {
                if table.iter().flatten().any(|c| *c > 1.0) {
                    return Err(domain_err!("bandit cost tables need costs in [0,1]"));
                }
            }
            other => return Err(config_err!("cost tables support full or bandit feedback, not {other:?}")),
        }
        Ok(Self { table, kind })
    }

    /// Uniform `[0,1]` costs drawn from `rng`.
    pub fn random_uniform(rows: usize, k: usize, kind: FeedbackKind, rng: &mut RngStream) -> Result<Self> {
        let table = (0..rows).map(|_| (0..k).map(|_| rng.uniform()).collect()).collect();
        Self::new(table, kind)
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.table
    }
}

impl Environment for CostTableEnv {
    fn num_arms(&self) -> usize {
        self.table[0].len()
    }

    fn feedback_kind(&self) -> FeedbackKind {
        self.kind
    }

    fn step(&mut self, round: &Round, arm: ArmIndex, _: &mut RngStream) -> Result<Step> {
        let row = self
            .table
            .get(round.t - 1)
            .ok_or_else(|| config_err!("cost table has only {} rows", self.table.len()))?;
        Ok(match self.kind {
            FeedbackKind::Bandit => Step {
                feedback: Feedback::BanditReward(1.0 - row[arm]),
                reward: 1.0 - row[arm],
                arm_rewards: row.iter().map(|c| 1.0 - c).collect(),
                stop: false,
            },
            _ => Step {
                feedback: Feedback::FullCosts(row.clone()),
                reward: -row[arm],
                arm_rewards: row.iter().map(|c| -c).collect(),
                stop: false,
            },
        })
    }
}
