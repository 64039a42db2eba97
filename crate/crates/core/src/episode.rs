//! Environment/agent contracts, the episode driver, history and regret
//! accounting.
//!
//! Rewards are the canonical currency: environments that produce costs
//! report `reward = -cost` to the driver while still handing the raw costs
//! to the agent through [`Feedback`].

use crate::error::{config_err, domain_err, Result};
use crate::rng::RngStream;

pub type ArmIndex = usize;

/// What an agent learns after playing a round.
#[derive(Debug, Clone, PartialEq)]
pub enum Feedback {
    /// Reward of the chosen arm only.
    BanditReward(f64),
    /// Cost of every arm.
    FullCosts(Vec<f64>),
    /// `(atom, cost)` pairs. Carries the chosen action's atoms under
    /// semi-bandit feedback and every atom under full atom feedback.
    SemiBandit(Vec<(usize, f64)>),
    /// Reward and per-resource consumption of the chosen arm.
    OutcomeRow { reward: f64, consumption: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackKind {
    Bandit,
    FullCosts,
    SemiBandit,
    FullAtoms,
    Outcome,
}

impl Feedback {
    pub fn kind_matches(&self, kind: FeedbackKind) -> bool {
        matches!(
            (self, kind),
            (Feedback::BanditReward(_), FeedbackKind::Bandit)
                | (Feedback::FullCosts(_), FeedbackKind::FullCosts)
                | (Feedback::SemiBandit(_), FeedbackKind::SemiBandit)
                | (Feedback::SemiBandit(_), FeedbackKind::FullAtoms)
                | (Feedback::OutcomeRow { .. }, FeedbackKind::Outcome)
        )
    }

    /// Reward realized by `arm` as implied by this feedback, in the
    /// reward-maximization convention.
    pub fn realized_reward(&self, arm: ArmIndex) -> Option<f64> {
        match self {
            Feedback::BanditReward(r) => Some(*r),
            Feedback::FullCosts(c) => c.get(arm).map(|c| -c),
            Feedback::SemiBandit(_) => None,
            Feedback::OutcomeRow { reward, .. } => Some(*reward),
        }
    }
}

/// Side information revealed before the agent acts.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Context {
    #[default]
    None,
    Id(usize),
    Real(f64),
    /// One feature vector per arm.
    Vectors(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    /// 1-based round number.
    pub t: usize,
    pub context: Context,
}

impl Round {
    pub fn plain(t: usize) -> Self {
        Self {
            t,
            context: Context::None,
        }
    }
}

/// Environment response to one pull.
#[derive(Debug, Clone)]
pub struct Step {
    pub feedback: Feedback,
    /// Reward credited to the algorithm this round.
    pub reward: f64,
    /// Reward every arm would have realized this round (for hindsight benchmarks).
    pub arm_rewards: Vec<f64>,
    /// The environment ends the episode after this round.
    pub stop: bool,
}

pub trait Environment {
    fn num_arms(&self) -> usize;
    fn feedback_kind(&self) -> FeedbackKind;

    fn context(&mut self, _t: usize, _rng: &mut RngStream) -> Context {
        Context::None
    }

    /// True mean rewards under `context`, when the environment knows them.
    fn mean_rewards(&self, _context: &Context) -> Option<Vec<f64>> {
        None
    }

    fn step(&mut self, round: &Round, arm: ArmIndex, rng: &mut RngStream) -> Result<Step>;
}

pub trait Agent {
    fn num_arms(&self) -> usize;
    fn feedback_kind(&self) -> FeedbackKind;
    fn act(&mut self, round: &Round, rng: &mut RngStream) -> ArmIndex;
    fn observe(
        &mut self,
        round: &Round,
        arm: ArmIndex,
        feedback: &Feedback,
        rng: &mut RngStream,
    ) -> Result<()>;

    /// Distribution the next `act` samples from, for agents that have one.
    fn action_distribution(&self, _round: &Round) -> Option<Vec<f64>> {
        None
    }
}

impl<A: Agent + ?Sized> Agent for Box<A> {
    fn num_arms(&self) -> usize {
        (**self).num_arms()
    }
    fn feedback_kind(&self) -> FeedbackKind {
        (**self).feedback_kind()
    }
    fn act(&mut self, round: &Round, rng: &mut RngStream) -> ArmIndex {
        (**self).act(round, rng)
    }
    fn observe(
        &mut self,
        round: &Round,
        arm: ArmIndex,
        feedback: &Feedback,
        rng: &mut RngStream,
    ) -> Result<()> {
        (**self).observe(round, arm, feedback, rng)
    }
    fn action_distribution(&self, round: &Round) -> Option<Vec<f64>> {
        (**self).action_distribution(round)
    }
}

impl<E: Environment + ?Sized> Environment for Box<E> {
    fn num_arms(&self) -> usize {
        (**self).num_arms()
    }
    fn feedback_kind(&self) -> FeedbackKind {
        (**self).feedback_kind()
    }
    fn context(&mut self, t: usize, rng: &mut RngStream) -> Context {
        (**self).context(t, rng)
    }
    fn mean_rewards(&self, context: &Context) -> Option<Vec<f64>> {
        (**self).mean_rewards(context)
    }
    fn step(&mut self, round: &Round, arm: ArmIndex, rng: &mut RngStream) -> Result<Step> {
        (**self).step(round, arm, rng)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub t: usize,
    pub arm: ArmIndex,
    pub feedback: Feedback,
}

/// Append-only log of rounds, numbered from 1 without gaps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    records: Vec<Record>,
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append the next round and return its round number.
    pub fn push(&mut self, arm: ArmIndex, feedback: Feedback) -> usize {
        let t = self.records.len() + 1;
        self.records.push(Record { t, arm, feedback });
        t
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn arms(&self) -> Vec<ArmIndex> {
        self.records.iter().map(|r| r.arm).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretReport {
    pub total_reward: f64,
    pub best_fixed_hindsight: f64,
    /// Expected reward of always playing the best arm (per round), when means are known.
    pub best_foresight: Option<f64>,
    pub regret: f64,
    pub pseudo_regret: Option<f64>,
    /// Per-arm gap to the best mean, for context-free environments with known means.
    pub gaps: Option<Vec<f64>>,
}

/// A completed run: the history plus per-round accounting.
#[derive(Debug, Clone)]
pub struct Episode {
    pub history: History,
    /// Reward credited each round.
    pub rewards: Vec<f64>,
    /// Per-round gap of the played arm, when means are known.
    pub round_gaps: Option<Vec<f64>>,
    /// Regret against the best fixed arm over the first `t` rounds, for each `t`.
    pub hindsight_regret: Vec<f64>,
    pub report: RegretReport,
}

/// Drive `agent` against `env` for at most `horizon` rounds.
///
/// The environment and agent draw from the `"env"` and `"agent"`
/// substreams of `rng`, so either side can change its consumption of
/// randomness without perturbing the other.
pub fn run_episode<E, A>(env: &mut E, agent: &mut A, horizon: usize, rng: &RngStream) -> Result<Episode>
where
    E: Environment + ?Sized,
    A: Agent + ?Sized,
{
    if horizon == 0 {
        return Err(config_err!("horizon must be at least 1"));
    }
    if env.num_arms() != agent.num_arms() {
        return Err(config_err!(
            "environment has {} arms but agent expects {}",
            env.num_arms(),
            agent.num_arms()
        ));
    }
    if env.feedback_kind() != agent.feedback_kind() {
        return Err(config_err!(
            "environment emits {:?} feedback but agent consumes {:?}",
            env.feedback_kind(),
            agent.feedback_kind()
        ));
    }
    let k = env.num_arms();
    let mut env_rng = rng.substream("env");
    let mut agent_rng = rng.substream("agent");

    let mut history = History::new();
    let mut rewards = Vec::with_capacity(horizon);
    let mut hindsight_regret = Vec::with_capacity(horizon);
    let mut cum_reward = 0.0;
    let mut column_sums = vec![0.0; k];
    let mut gaps_trace: Option<Vec<f64>> = Some(Vec::with_capacity(horizon));
    let mut foresight = 0.0;
    let mut first_means: Option<Vec<f64>> = None;
    let mut context_free = true;

    for t in 1..=horizon {
        let context = env.context(t, &mut env_rng);
        context_free &= context == Context::None;
        let round = Round { t, context };
        let arm = agent.act(&round, &mut agent_rng);
        if arm >= k {
            return Err(domain_err!("agent chose arm {arm} but only {k} arms exist"));
        }
        let means = env.mean_rewards(&round.context);
        let step = env.step(&round, arm, &mut env_rng)?;
        if step.arm_rewards.len() != k {
            return Err(config_err!("environment reported {} arm rewards, expected {k}", step.arm_rewards.len()));
        }
        agent.observe(&round, arm, &step.feedback, &mut agent_rng)?;

        match (&mut gaps_trace, means) {
            (Some(trace), Some(mu)) => {
                let best = mu.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                foresight += best;
                trace.push(best - mu[arm]);
                if first_means.is_none() {
                    first_means = Some(mu);
                }
            }
            _ => gaps_trace = None,
        }
        for (sum, r) in column_sums.iter_mut().zip(&step.arm_rewards) {
            *sum += r;
        }
        cum_reward += step.reward;
        hindsight_regret.push(argmax_lowest(&column_sums).1 - cum_reward);
        rewards.push(step.reward);
        history.push(arm, step.feedback);
        if step.stop {
            break;
        }
    }

    let total_reward: f64 = rewards.iter().sum();
    let (_, best_fixed) = argmax_lowest(&column_sums);
    let pseudo = gaps_trace.as_ref().map(|g| g.iter().sum::<f64>());
    let gaps = match (&gaps_trace, first_means, context_free) {
        (Some(_), Some(mu), true) => {
            let best = mu.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Some(mu.iter().map(|m| best - m).collect())
        }
        _ => None,
    };
    let report = RegretReport {
        total_reward,
        best_fixed_hindsight: best_fixed,
        best_foresight: gaps_trace.as_ref().map(|_| foresight),
        regret: best_fixed - total_reward,
        pseudo_regret: pseudo,
        gaps,
    };
    Ok(Episode {
        history,
        rewards,
        round_gaps: gaps_trace,
        hindsight_regret,
        report,
    })
}

/// Index of the largest value, lowest index on ties.
pub fn argmax_lowest(values: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    (best, values.get(best).copied().unwrap_or(f64::NAN))
}

/// Index of the smallest value, lowest index on ties.
pub fn argmin_lowest(values: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    (best, values.get(best).copied().unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Reward,
    Cost,
}

/// Best fixed arm of a `T x K` table: largest column sum for rewards,
/// smallest for costs, lowest index on ties.
pub fn best_fixed_hindsight(table: &[Vec<f64>], sense: Sense) -> Result<(ArmIndex, f64)> {
    let k = table.first().map(Vec::len).unwrap_or(0);
    if k == 0 {
        return Err(domain_err!("best_fixed_hindsight needs a non-empty table"));
    }
    let mut sums = vec![0.0; k];
    for (t, row) in table.iter().enumerate() {
        if row.len() != k {
            return Err(domain_err!("row {t} has {} entries, expected {k}", row.len()));
        }
        for (s, v) in sums.iter_mut().zip(row) {
            *s += v;
        }
    }
    Ok(match sense {
        Sense::Reward => argmax_lowest(&sums),
        Sense::Cost => argmin_lowest(&sums),
    })
}

/// `max(means) * T - sum_t means[arm_t]`, accumulated as a sum of
/// per-round gaps so it is never negative.
pub fn pseudo_regret(means: &[f64], arms: &[ArmIndex]) -> Result<f64> {
    let best = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    arms.iter().try_fold(0.0, |acc, &a| {
        means
            .get(a)
            .map(|m| acc + (best - m))
            .ok_or_else(|| domain_err!("arm {a} out of range for {} means", means.len()))
    })
}

/// Anytime wrapper: phase `p = 1, 2, ...` covers rounds `2^(p-1) ..= 2^p - 1`
/// and runs a fresh inner agent built for horizon `2^(p-1)`.
///
/// Each phase draws from its own `"phase-<p>"` substream of the stream the
/// driver passes in, so the first round of a phase behaves exactly like a
/// fresh agent handed that substream.
pub struct Doubling<F>
where
    F: Fn(usize) -> Box<dyn Agent>,
{
    factory: F,
    inner: Box<dyn Agent>,
    phase: u32,
    phase_start: usize,
    phase_rng: Option<RngStream>,
    num_arms: usize,
    kind: FeedbackKind,
}

impl<F> Doubling<F>
where
    F: Fn(usize) -> Box<dyn Agent>,
{
    pub fn new(factory: F) -> Self {
        let inner = factory(1);
        Self {
            num_arms: inner.num_arms(),
            kind: inner.feedback_kind(),
            factory,
            inner,
            phase: 1,
            phase_start: 1,
            phase_rng: None,
        }
    }

    pub fn phase(&self) -> u32 {
        self.phase
    }

    pub fn phase_len(phase: u32) -> usize {
        1usize << (phase - 1)
    }

    /// Phase containing round `t` (1-based).
    pub fn phase_of(t: usize) -> u32 {
        usize::BITS - t.leading_zeros()
    }

    fn local_round(&self, round: &Round) -> Round {
        Round {
            t: round.t - self.phase_start + 1,
            context: round.context.clone(),
        }
    }
}

impl<F> Agent for Doubling<F>
where
    F: Fn(usize) -> Box<dyn Agent>,
{
    fn num_arms(&self) -> usize {
        self.num_arms
    }

    fn feedback_kind(&self) -> FeedbackKind {
        self.kind
    }

    fn act(&mut self, round: &Round, rng: &mut RngStream) -> ArmIndex {
        let phase = Self::phase_of(round.t);
        if phase != self.phase || self.phase_rng.is_none() {
            if phase != self.phase {
                self.inner = (self.factory)(Self::phase_len(phase));
            }
            self.phase = phase;
            self.phase_start = Self::phase_len(phase);
            self.phase_rng = Some(rng.substream(&format!("phase-{phase}")));
        }
        let local = self.local_round(round);
        let prng = self.phase_rng.as_mut().expect("phase stream initialized");
        self.inner.act(&local, prng)
    }

    fn observe(
        &mut self,
        round: &Round,
        arm: ArmIndex,
        feedback: &Feedback,
        _rng: &mut RngStream,
    ) -> Result<()> {
        let local = self.local_round(round);
        let prng = self.phase_rng.as_mut().expect("observe follows act");
        self.inner.observe(&local, arm, feedback, prng)
    }

    fn action_distribution(&self, round: &Round) -> Option<Vec<f64>> {
        let phase = Self::phase_of(round.t);
        if phase != self.phase {
            let fresh = (self.factory)(Self::phase_len(phase));
            return fresh.action_distribution(&Round {
                t: 1,
                context: round.context.clone(),
            });
        }
        self.inner.action_distribution(&self.local_round(round))
    }
}
