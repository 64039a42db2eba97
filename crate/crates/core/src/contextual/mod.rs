//! Contextual bandits: context-aware environments, per-context agent copies,
//! Lipschitz-context discretization, LinUCB, policy-class algorithms and
//! off-policy evaluation from logged data.

mod ips;
mod linucb;
mod policies;

pub use ips::{
    collect_log, ips_estimate, ips_train, join_logs, parse_logs, write_joined, Decision, JoinedPoint, LogRecord,
    LoggedPoint, Outcome,
};
pub use linucb::LinUcb;
pub use policies::{
    all_deterministic_policies, default_explore_rounds, exact_classification_oracle, exp4_policies, ExploreThenExploit,
    Policy, PolicyExperts,
};

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::episode::{argmax_lowest, Agent, ArmIndex, Context, Environment, Feedback, FeedbackKind, Round, Step};
use crate::error::{config_err, domain_err, Result};
use crate::lipschitz::nearest_mesh_index;
use crate::rng::RngStream;

/// How contexts arrive.
#[derive(Debug, Clone, PartialEq)]
pub enum ContextSchedule {
    /// IID draws from a distribution over context ids.
    Iid(Vec<f64>),
    /// `x_t = (t - 1) mod n`.
    Cycle,
}

/// Finite context set with Bernoulli rewards `means[x][a]`.
#[derive(Debug, Clone)]
pub struct FiniteContextEnv {
    means: Vec<Vec<f64>>,
    schedule: ContextSchedule,
}

impl FiniteContextEnv {
    pub fn new(means: Vec<Vec<f64>>, schedule: ContextSchedule) -> Result<Self> {
        let k = means.first().map(Vec::len).unwrap_or(0);
        if k == 0 || means.iter().any(|m| m.len() != k) {
            return Err(config_err!("context means must be a non-empty rectangular table"));
        }
        if means.iter().flatten().any(|m| !(0.0..=1.0).contains(m)) {
            return Err(domain_err!("context means must lie in [0,1]"));
        }
        if let ContextSchedule::Iid(p) = &schedule {
            if p.len() != means.len() {
                return Err(config_err!("context distribution has {} entries for {} contexts", p.len(), means.len()));
            }
            crate::concentration::check_prob_vector(p)?;
        }
        Ok(Self { means, schedule })
    }

    pub fn num_contexts(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    /// Probability of each context under the schedule (uniform for cycles).
    pub fn context_probs(&self) -> Vec<f64> {
        match &self.schedule {
            ContextSchedule::Iid(p) => p.clone(),
            ContextSchedule::Cycle => vec![1.0 / self.means.len() as f64; self.means.len()],
        }
    }

    /// `mu(pi) = sum_x P(x) mu(pi(x) | x)`.
    pub fn policy_value(&self, policy: &Policy) -> f64 {
        self.context_probs()
            .iter()
            .enumerate()
            .map(|(x, p)| p * self.means[x][policy.arm(x)])
            .sum()
    }
}

impl Environment for FiniteContextEnv {
    fn num_arms(&self) -> usize {
        self.means[0].len()
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Bandit
    }

    fn context(&mut self, t: usize, rng: &mut RngStream) -> Context {
        Context::Id(match &self.schedule {
            ContextSchedule::Iid(p) => rng.categorical(p),
            ContextSchedule::Cycle => (t - 1) % self.means.len(),
        })
    }

    fn mean_rewards(&self, context: &Context) -> Option<Vec<f64>> {
        match context {
            Context::Id(x) => self.means.get(*x).cloned(),
            _ => None,
        }
    }

    fn step(&mut self, round: &Round, arm: ArmIndex, rng: &mut RngStream) -> Result<Step> {
        let mu = self.mean_rewards(&round.context).ok_or_else(|| config_err!("unknown context"))?;
        let arm_rewards: Vec<f64> = mu.iter().map(|&m| if rng.bernoulli(m) { 1.0 } else { 0.0 }).collect();
        Ok(Step {
            feedback: Feedback::BanditReward(arm_rewards[arm]),
            reward: arm_rewards[arm],
            arm_rewards,
            stop: false,
        })
    }
}

pub type MeanFn = Arc<dyn Fn(f64, ArmIndex) -> f64 + Send + Sync>;

/// Contexts uniform on [0,1]; Bernoulli rewards with mean `mean(x, a)`.
#[derive(Clone)]
pub struct LipschitzContextEnv {
    k: usize,
    mean: MeanFn,
}

impl LipschitzContextEnv {
    pub fn new(k: usize, mean: MeanFn) -> Result<Self> {
        if k == 0 {
            return Err(config_err!("need at least one arm"));
        }
        Ok(Self { k, mean })
    }

    pub fn mean(&self, x: f64, a: ArmIndex) -> f64 {
        (self.mean)(x, a)
    }
}

impl Environment for LipschitzContextEnv {
    fn num_arms(&self) -> usize {
        self.k
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Bandit
    }

    fn context(&mut self, _: usize, rng: &mut RngStream) -> Context {
        Context::Real(rng.uniform())
    }

    fn mean_rewards(&self, context: &Context) -> Option<Vec<f64>> {
        match context {
            Context::Real(x) => Some((0..self.k).map(|a| (self.mean)(*x, a)).collect()),
            _ => None,
        }
    }

    fn step(&mut self, round: &Round, arm: ArmIndex, rng: &mut RngStream) -> Result<Step> {
        let mu = self.mean_rewards(&round.context).ok_or_else(|| config_err!("expected a real context"))?;
        let arm_rewards: Vec<f64> = mu.iter().map(|&m| if rng.bernoulli(m) { 1.0 } else { 0.0 }).collect();
        Ok(Step {
            feedback: Feedback::BanditReward(arm_rewards[arm]),
            reward: arm_rewards[arm],
            arm_rewards,
            stop: false,
        })
    }
}

/// Per-arm feature vectors uniform on `[0,1]^d`; arm `a` has reward
/// `theta_a . x_a` plus optional uniform noise of half-width `noise`,
/// clipped to [0,1].
#[derive(Debug, Clone)]
pub struct LinearContextEnv {
    thetas: Vec<Vec<f64>>,
    noise: f64,
}

impl LinearContextEnv {
    pub fn new(thetas: Vec<Vec<f64>>, noise: f64) -> Result<Self> {
        let d = thetas.first().map(Vec::len).unwrap_or(0);
        if d == 0 || thetas.iter().any(|t| t.len() != d) {
            return Err(config_err!("need at least one arm and equal nonzero dimensions"));
        }
        if thetas.iter().any(|t| t.iter().any(|v| *v < 0.0) || t.iter().sum::<f64>() > 1.0) {
            return Err(domain_err!("each theta must be nonnegative with sum <= 1"));
        }
        if !(noise >= 0.0) {
            return Err(domain_err!("noise must be nonnegative"));
        }
        Ok(Self { thetas, noise })
    }

    pub fn dim(&self) -> usize {
        self.thetas[0].len()
    }
}

impl Environment for LinearContextEnv {
    fn num_arms(&self) -> usize {
        self.thetas.len()
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Bandit
    }

    fn context(&mut self, _: usize, rng: &mut RngStream) -> Context {
        let d = self.dim();
        Context::Vectors(self.thetas.iter().map(|_| (0..d).map(|_| rng.uniform()).collect()).collect())
    }

    fn mean_rewards(&self, context: &Context) -> Option<Vec<f64>> {
        match context {
            Context::Vectors(xs) if xs.len() == self.thetas.len() => Some(
                xs.iter()
                    .zip(&self.thetas)
                    .map(|(x, th)| x.iter().zip(th).map(|(a, b)| a * b).sum())
                    .collect(),
            ),
            _ => None,
        }
    }

    fn step(&mut self, round: &Round, arm: ArmIndex, rng: &mut RngStream) -> Result<Step> {
        let mu = self.mean_rewards(&round.context).ok_or_else(|| config_err!("expected vector contexts"))?;
        let arm_rewards: Vec<f64> = mu
            .iter()
            .map(|m| {
                if self.noise > 0.0 {
                    (m + self.noise * (2.0 * rng.uniform() - 1.0)).clamp(0.0, 1.0)
                } else {
                    *m
                }
            })
            .collect();
        Ok(Step {
            feedback: Feedback::BanditReward(arm_rewards[arm]),
            reward: arm_rewards[arm],
            arm_rewards,
            stop: false,
        })
    }
}

pub type AgentFactory = Box<dyn Fn() -> Box<dyn Agent> + Send + Sync>;

/// One lazily created inner agent per context id. Copy `x` sees its own
/// round counter `1, 2, ...` and a context-free round.
pub struct PerContext {
    factory: AgentFactory,
    copies: BTreeMap<usize, (usize, Box<dyn Agent>)>,
    k: usize,
    kind: FeedbackKind,
}

impl PerContext {
    pub fn new(factory: AgentFactory) -> Self {
        let probe = factory();
        Self {
            k: probe.num_arms(),
            kind: probe.feedback_kind(),
            factory,
            copies: BTreeMap::new(),
        }
    }

    /// Rounds routed to each copy so far.
    pub fn rounds_per_context(&self) -> BTreeMap<usize, usize> {
        self.copies.iter().map(|(x, (n, _))| (*x, *n)).collect()
    }

    fn context_id(round: &Round) -> usize {
        match round.context {
            Context::Id(x) => x,
            Context::None => 0,
            ref other => panic!("per-context agent needs context ids, got {other:?}"),
        }
    }

    pub(crate) fn act_in(&mut self, x: usize, rng: &mut RngStream) -> ArmIndex {
        let factory = &self.factory;
        let (n, agent) = self.copies.entry(x).or_insert_with(|| (0, factory()));
        agent.act(&Round::plain(*n + 1), rng)
    }

    pub(crate) fn observe_in(&mut self, x: usize, arm: ArmIndex, feedback: &Feedback, rng: &mut RngStream) -> Result<()> {
        let (n, agent) = self
            .copies
            .get_mut(&x)
            .ok_or_else(|| config_err!("observe for context {x} before act"))?;
        *n += 1;
        agent.observe(&Round::plain(*n), arm, feedback, rng)
    }
}

impl Agent for PerContext {
    fn num_arms(&self) -> usize {
        self.k
    }

    fn feedback_kind(&self) -> FeedbackKind {
        self.kind
    }

    fn act(&mut self, round: &Round, rng: &mut RngStream) -> ArmIndex {
        self.act_in(Self::context_id(round), rng)
    }

    fn observe(&mut self, round: &Round, arm: ArmIndex, feedback: &Feedback, rng: &mut RngStream) -> Result<()> {
        self.observe_in(Self::context_id(round), arm, feedback, rng)
    }
}

/// Maps a real context to its nearest mesh point and runs one inner copy per point.
pub struct LipschitzContextAgent {
    mesh: Vec<f64>,
    inner: PerContext,
}

impl LipschitzContextAgent {
    pub fn new(mesh_eps: f64, factory: AgentFactory) -> Result<Self> {
        Ok(Self {
            mesh: crate::lipschitz::uniform_mesh(mesh_eps)?,
            inner: PerContext::new(factory),
        })
    }

    /// Mesh step `(T L^2 / ln T)^(-1/3)`-style default is left to the caller.
    pub fn mesh(&self) -> &[f64] {
        &self.mesh
    }

    /// Nearest mesh point, ties to the smaller one.
    pub fn project(&self, x: f64) -> f64 {
        self.mesh[nearest_mesh_index(&self.mesh, x)]
    }

    fn cell(&self, round: &Round) -> usize {
        match round.context {
            Context::Real(x) => nearest_mesh_index(&self.mesh, x),
            ref other => panic!("Lipschitz-context agent needs real contexts, got {other:?}"),
        }
    }
}

impl Agent for LipschitzContextAgent {
    fn num_arms(&self) -> usize {
        self.inner.k
    }

    fn feedback_kind(&self) -> FeedbackKind {
        self.inner.kind
    }

    fn act(&mut self, round: &Round, rng: &mut RngStream) -> ArmIndex {
        let c = self.cell(round);
        self.inner.act_in(c, rng)
    }

    fn observe(&mut self, round: &Round, arm: ArmIndex, feedback: &Feedback, rng: &mut RngStream) -> Result<()> {
        let c = self.cell(round);
        self.inner.observe_in(c, arm, feedback, rng)
    }
}

/// Split of Lipschitz-context pseudo-regret into regret against the best
/// mesh-measurable policy (`regret_s`) and the discretization error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizedRegret {
    pub total: f64,
    pub regret_s: f64,
    pub discretization_error: f64,
}

/// The benchmark policy plays `argmax_a mu(a | f_S(x))` on context `x`.
pub fn discretized_regret(env: &LipschitzContextEnv, mesh: &[f64], contexts: &[f64], arms: &[ArmIndex]) -> DiscretizedRegret {
    let mut out = DiscretizedRegret {
        total: 0.0,
        regret_s: 0.0,
        discretization_error: 0.0,
    };
    for (&x, &a) in contexts.iter().zip(arms) {
        let mu: Vec<f64> = (0..env.k).map(|b| env.mean(x, b)).collect();
        let best = mu.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let fx = mesh[nearest_mesh_index(mesh, x)];
        let cell_mu: Vec<f64> = (0..env.k).map(|b| env.mean(fx, b)).collect();
        let pi_s = argmax_lowest(&cell_mu).0;
        out.total += best - mu[a];
        out.regret_s += mu[pi_s] - mu[a];
        out.discretization_error += best - mu[pi_s];
    }
    out
}
