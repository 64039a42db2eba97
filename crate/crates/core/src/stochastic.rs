//! IID-reward environments and the basic stochastic bandit algorithms:
//! explore-first, epsilon-greedy, successive elimination and UCB1.

use crate::concentration::{check_prob_vector, hoeffding_radius};
use crate::episode::{argmax_lowest, Agent, ArmIndex, Context, Environment, Feedback, FeedbackKind, Round, Step};
use crate::error::{config_err, domain_err, Result};
use crate::rng::RngStream;

/// Per-arm pull counts and reward sums.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmStats {
    n: Vec<u64>,
    sum: Vec<f64>,
}

impl ArmStats {
    pub fn new(k: usize) -> Self {
        Self {
            n: vec![0; k],
            sum: vec![0.0; k],
        }
    }

    pub fn record(&mut self, arm: ArmIndex, reward: f64) {
        self.n[arm] += 1;
        self.sum[arm] += reward;
    }

    pub fn pulls(&self, arm: ArmIndex) -> u64 {
        self.n[arm]
    }

    pub fn counts(&self) -> &[u64] {
        &self.n
    }

    pub fn sum(&self, arm: ArmIndex) -> f64 {
        self.sum[arm]
    }

    /// Empirical mean, 0 for an unplayed arm.
    pub fn mean(&self, arm: ArmIndex) -> f64 {
        if self.n[arm] == 0 {
            0.0
        } else {
            self.sum[arm] / self.n[arm] as f64
        }
    }

    pub fn means(&self) -> Vec<f64> {
        (0..self.n.len()).map(|a| self.mean(a)).collect()
    }

    pub fn total_pulls(&self) -> u64 {
        self.n.iter().sum()
    }

    pub fn num_arms(&self) -> usize {
        self.n.len()
    }
}

fn bandit_reward(feedback: &Feedback) -> Result<f64> {
    match feedback {
        Feedback::BanditReward(r) => Ok(*r),
        other => Err(config_err!("expected bandit reward feedback, got {other:?}")),
    }
}

/// Reward distribution of one arm.
#[derive(Debug, Clone, PartialEq)]
pub enum ArmDist {
    Bernoulli(f64),
    /// Finite support on [0,1].
    Finite { values: Vec<f64>, probs: Vec<f64> },
}

impl ArmDist {
    pub fn mean(&self) -> f64 {
        match self {
            ArmDist::Bernoulli(p) => *p,
            ArmDist::Finite { values, probs } => values.iter().zip(probs).map(|(v, p)| v * p).sum(),
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match self {
            ArmDist::Bernoulli(p) => {
                if rng.bernoulli(*p) {
                    1.0
                } else {
                    0.0
                }
            }
            ArmDist::Finite { values, probs } => values[rng.categorical(probs)],
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            ArmDist::Bernoulli(p) if !(0.0..=1.0).contains(p) => {
                Err(domain_err!("Bernoulli mean {p} outside [0,1]"))
            }
            ArmDist::Finite { values, probs } => {
                if values.len() != probs.len() || values.is_empty() {
                    return Err(domain_err!("finite reward distribution needs matching non-empty values and probs"));
                }
                if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(domain_err!("finite reward support must lie in [0,1]"));
                }
                check_prob_vector(probs)
            }
            _ => Ok(()),
        }
    }
}

/// Stochastic environment with independent per-arm reward distributions.
#[derive(Debug, Clone)]
pub struct StochasticEnv {
    arms: Vec<ArmDist>,
}

impl StochasticEnv {
    pub fn new(arms: Vec<ArmDist>) -> Result<Self> {
        if arms.is_empty() {
            return Err(config_err!("stochastic environment needs at least one arm"));
        }
        for a in &arms {
            a.validate()?;
        }
        Ok(Self { arms })
    }

    pub fn bernoulli(means: &[f64]) -> Result<Self> {
        Self::new(means.iter().map(|&m| ArmDist::Bernoulli(m)).collect())
    }

    /// Rewards that equal their means every round. Means must lie in [0,1].
    pub fn deterministic(rewards: &[f64]) -> Result<Self> {
        Self::new(
            rewards
                .iter()
                .map(|&r| ArmDist::Finite {
                    values: vec![r],
                    probs: vec![1.0],
                })
                .collect(),
        )
    }

    pub fn means(&self) -> Vec<f64> {
        self.arms.iter().map(ArmDist::mean).collect()
    }
}

impl Environment for StochasticEnv {
    fn num_arms(&self) -> usize {
        self.arms.len()
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Bandit
    }

    fn mean_rewards(&self, _: &Context) -> Option<Vec<f64>> {
        Some(self.means())
    }

    fn step(&mut self, _: &Round, arm: ArmIndex, rng: &mut RngStream) -> Result<Step> {
        let arm_rewards: Vec<f64> = self.arms.iter().map(|d| d.sample(rng)).collect();
        let r = arm_rewards[arm];
        Ok(Step {
            feedback: Feedback::BanditReward(r),
            reward: r,
            arm_rewards,
            stop: false,
        })
    }
}

/// Exploration budget `floor((T/K)^(2/3) (ln T)^(1/3))`, at least 1 and at most `T/K`.
pub fn default_explore_budget(k: usize, horizon: usize) -> usize {
    let t = horizon as f64;
    let raw = (t / k as f64).powf(2.0 / 3.0) * t.ln().max(0.0).cbrt();
    (raw.floor() as usize).clamp(1, (horizon / k).max(1))
}

/// Round-robin exploration for `N` passes, then commit to the empirical best.
#[derive(Debug, Clone)]
pub struct ExploreFirst {
    k: usize,
    n: usize,
    stats: ArmStats,
    committed: Option<ArmIndex>,
}

impl ExploreFirst {
    pub fn new(k: usize, horizon: usize, n: usize) -> Result<Self> {
        if k == 0 {
            return Err(config_err!("explore-first needs K >= 1"));
        }
        if n == 0 {
            return Err(config_err!("explore-first needs N >= 1"));
        }
        if n * k > horizon {
            return Err(config_err!("explore-first budget N*K = {} exceeds T = {horizon}", n * k));
        }
        Ok(Self {
            k,
            n,
            stats: ArmStats::new(k),
            committed: None,
        })
    }

    pub fn with_default_budget(k: usize, horizon: usize) -> Result<Self> {
        Self::new(k, horizon, default_explore_budget(k, horizon))
    }

    pub fn budget(&self) -> usize {
        self.n
    }

    pub fn committed(&self) -> Option<ArmIndex> {
        self.committed
    }

    pub fn stats(&self) -> &ArmStats {
        &self.stats
    }
}

impl Agent for ExploreFirst {
    fn num_arms(&self) -> usize {
        self.k
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Bandit
    }

    fn act(&mut self, round: &Round, _: &mut RngStream) -> ArmIndex {
        if round.t <= self.n * self.k {
            return (round.t - 1) % self.k;
        }
        *self
            .committed
            .get_or_insert_with(|| argmax_lowest(&self.stats.means()).0)
    }

    fn observe(&mut self, round: &Round, arm: ArmIndex, feedback: &Feedback, _: &mut RngStream) -> Result<()> {
        let r = bandit_reward(feedback)?;
        if round.t <= self.n * self.k {
            self.stats.record(arm, r);
        }
        Ok(())
    }
}

/// `min(1, t^(-1/3) (K ln t)^(1/3))`, which is 1 at `t = 1`.
pub fn epsilon_schedule(k: usize, t: usize) -> f64 {
    if t <= 1 {
        return 1.0;
    }
    let t = t as f64;
    (t.powf(-1.0 / 3.0) * (k as f64 * t.ln()).cbrt()).min(1.0)
}

#[derive(Debug, Clone)]
pub struct EpsilonGreedy {
    stats: ArmStats,
}

impl EpsilonGreedy {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(config_err!("epsilon-greedy needs K >= 1"));
        }
        Ok(Self { stats: ArmStats::new(k) })
    }

    pub fn stats(&self) -> &ArmStats {
        &self.stats
    }
}

impl Agent for EpsilonGreedy {
    fn num_arms(&self) -> usize {
        self.stats.num_arms()
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Bandit
    }

    fn act(&mut self, round: &Round, rng: &mut RngStream) -> ArmIndex {
        let k = self.stats.num_arms();
        if rng.bernoulli(epsilon_schedule(k, round.t)) {
            rng.index(k)
        } else {
            argmax_lowest(&self.stats.means()).0
        }
    }

    fn observe(&mut self, _: &Round, arm: ArmIndex, feedback: &Feedback, _: &mut RngStream) -> Result<()> {
        self.stats.record(arm, bandit_reward(feedback)?);
        Ok(())
    }

    fn action_distribution(&self, round: &Round) -> Option<Vec<f64>> {
        let k = self.stats.num_arms();
        let eps = epsilon_schedule(k, round.t);
        let best = argmax_lowest(&self.stats.means()).0;
        let mut p = vec![eps / k as f64; k];
        p[best] += 1.0 - eps;
        Some(p)
    }
}

/// Successive elimination: round-robin over active arms, pruning after each
/// full pass any arm whose upper bound falls below another's lower bound.
#[derive(Debug, Clone)]
pub struct SuccessiveElimination {
    horizon: u64,
    stats: ArmStats,
    active: Vec<ArmIndex>,
    cursor: usize,
    /// `(arm, samples per arm when removed)`
    eliminated: Vec<(ArmIndex, u64)>,
}

impl SuccessiveElimination {
    pub fn new(k: usize, horizon: usize) -> Result<Self> {
        if k == 0 {
            return Err(config_err!("successive elimination needs K >= 1"));
        }
        if horizon < 2 {
            return Err(config_err!("successive elimination needs T >= 2"));
        }
        Ok(Self {
            horizon: horizon as u64,
            stats: ArmStats::new(k),
            active: (0..k).collect(),
            cursor: 0,
            eliminated: Vec::new(),
        })
    }

    pub fn active(&self) -> &[ArmIndex] {
        &self.active
    }

    pub fn eliminated(&self) -> &[(ArmIndex, u64)] {
        &self.eliminated
    }

    pub fn stats(&self) -> &ArmStats {
        &self.stats
    }

    fn bounds(&self, arm: ArmIndex) -> (f64, f64) {
        let r = hoeffding_radius(self.stats.pulls(arm), self.horizon).expect("active arms sampled each pass");
        let m = self.stats.mean(arm);
        (m - r, m + r)
    }

    fn prune(&mut self) {
        let best_lcb = self
            .active
            .iter()
            .map(|&a| self.bounds(a).0)
            .fold(f64::NEG_INFINITY, f64::max);
        let (keep, drop): (Vec<_>, Vec<_>) = self.active.iter().partition(|&&a| self.bounds(a).1 >= best_lcb);
        for a in drop {
            self.eliminated.push((a, self.stats.pulls(a)));
        }
        self.active = keep;
    }
}

impl Agent for SuccessiveElimination {
    fn num_arms(&self) -> usize {
        self.stats.num_arms()
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Bandit
    }

    fn act(&mut self, _: &Round, _: &mut RngStream) -> ArmIndex {
        self.active[self.cursor]
    }

    fn observe(&mut self, _: &Round, arm: ArmIndex, feedback: &Feedback, _: &mut RngStream) -> Result<()> {
        self.stats.record(arm, bandit_reward(feedback)?);
        self.cursor += 1;
        if self.cursor == self.active.len() {
            self.cursor = 0;
            if self.active.len() > 1 {
                self.prune();
            }
        }
        Ok(())
    }
}

/// Upper confidence bound `mean + sqrt(2 ln T / n)`.
pub fn ucb_index(mean: f64, n: u64, horizon: u64) -> Result<f64> {
    Ok(mean + hoeffding_radius(n, horizon)?)
}

#[derive(Debug, Clone)]
pub struct Ucb1 {
    horizon: u64,
    stats: ArmStats,
}

impl Ucb1 {
    pub fn new(k: usize, horizon: usize) -> Result<Self> {
        if k == 0 || k > horizon {
            return Err(config_err!("UCB1 needs 1 <= K <= T, got K = {k}, T = {horizon}"));
        }
        Ok(Self {
            horizon: horizon.max(2) as u64,
            stats: ArmStats::new(k),
        })
    }

    pub fn stats(&self) -> &ArmStats {
        &self.stats
    }

    pub fn indices(&self) -> Vec<f64> {
        (0..self.stats.num_arms())
            .map(|a| match self.stats.pulls(a) {
                0 => f64::INFINITY,
                n => self.stats.mean(a) + hoeffding_radius(n, self.horizon).expect("n >= 1"),
            })
            .collect()
    }
}

impl Agent for Ucb1 {
    fn num_arms(&self) -> usize {
        self.stats.num_arms()
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Bandit
    }

    fn act(&mut self, _: &Round, _: &mut RngStream) -> ArmIndex {
        argmax_lowest(&self.indices()).0
    }

    fn observe(&mut self, _: &Round, arm: ArmIndex, feedback: &Feedback, _: &mut RngStream) -> Result<()> {
        self.stats.record(arm, bandit_reward(feedback)?);
        Ok(())
    }
}

/// Most-pulled arm, lowest index on ties.
pub fn most_pulled(stats: &ArmStats) -> ArmIndex {
    let counts: Vec<f64> = stats.counts().iter().map(|&n| n as f64).collect();
    argmax_lowest(&counts).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::episode::{run_episode, Doubling};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn drive<A: Agent>(env: &mut StochasticEnv, agent: &mut A, t: usize, seed: u64) -> crate::episode::Episode {
        run_episode(env, agent, t, &RngStream::new(seed)).unwrap()
    }

    #[test]
    fn explore_first_commits_to_better_arm() {
        let mut env = StochasticEnv::deterministic(&[1.0, 0.0]).unwrap();
        let mut a = ExploreFirst::new(2, 50, 1).unwrap();
        let ep = drive(&mut env, &mut a, 50, 0);
        assert!(ep.history.arms()[2..].iter().all(|&x| x == 0));
        assert_eq!(a.committed(), Some(0));
        assert!(ExploreFirst::new(2, 50, 0).is_err());
        assert!(ExploreFirst::new(2, 50, 26).is_err());
    }

    #[test]
    fn default_budget_value() {
        // 292.4018 * 2.0962 = 612.92, floored
        let oracle = (5000f64.powf(2.0 / 3.0) * 10000f64.ln().cbrt()).floor() as usize;
        assert_eq!(oracle, 612);
        assert_eq!(default_explore_budget(2, 10_000), oracle);
    }

    #[test]
    fn epsilon_schedule_values() {
        assert_eq!(epsilon_schedule(2, 1), 1.0);
        assert_abs_diff_eq!(epsilon_schedule(2, 1000), 0.1 * (2.0 * 1000f64.ln()).cbrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(epsilon_schedule(2, 1000), 0.2400, epsilon = 1e-4);
    }

    #[test]
    fn greedy_branch_picks_best_after_sampling() {
        let mut env = StochasticEnv::deterministic(&[1.0, 0.0]).unwrap();
        let mut a = EpsilonGreedy::new(2).unwrap();
        run_episode(&mut env, &mut a, 200, &RngStream::new(4)).unwrap();
        assert!(a.stats().pulls(0) > 0 && a.stats().pulls(1) > 0);
        let p = a.action_distribution(&Round::plain(201)).unwrap();
        let eps = epsilon_schedule(2, 201);
        assert_abs_diff_eq!(p[0], 1.0 - eps / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn se_eliminates_after_37_samples() {
        // oracle: first m with 2*sqrt(2 ln 100 / m) < 1
        let m = (1u64..).find(|&m| 2.0 * (2.0 * 100f64.ln() / m as f64).sqrt() < 1.0).unwrap();
        assert_eq!(m, 37);
        let mut env = StochasticEnv::deterministic(&[1.0, 0.0]).unwrap();
        let mut a = SuccessiveElimination::new(2, 100).unwrap();
        drive(&mut env, &mut a, 100, 0);
        assert_eq!(a.eliminated(), &[(1, m)]);
        assert_eq!(a.stats().pulls(1), m);
    }

    #[test]
    fn se_degenerate_cases() {
        let mut env = StochasticEnv::deterministic(&[0.4]).unwrap();
        let mut a = SuccessiveElimination::new(1, 100).unwrap();
        drive(&mut env, &mut a, 100, 0);
        assert!(a.eliminated().is_empty());
        let mut env = StochasticEnv::deterministic(&[0.4, 0.4, 0.4]).unwrap();
        let mut a = SuccessiveElimination::new(3, 300).unwrap();
        drive(&mut env, &mut a, 300, 0);
        assert_eq!(a.active().len(), 3);
    }

    #[test]
    fn ucb_index_value() {
        let v = ucb_index(0.5, 2, 100).unwrap();
        assert_abs_diff_eq!(v, 0.5 + 100f64.ln().sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(v, 2.645_966, epsilon = 1e-6);
    }

    #[test]
    fn ucb_tie_and_warmup() {
        let mut a = Ucb1::new(3, 100).unwrap();
        let mut rng = RngStream::new(0);
        for t in 1..=3 {
            let arm = a.act(&Round::plain(t), &mut rng);
            assert_eq!(arm, t - 1);
            a.observe(&Round::plain(t), arm, &Feedback::BanditReward(0.5), &mut rng).unwrap();
        }
        assert_eq!(a.act(&Round::plain(4), &mut rng), 0);
    }

    #[test]
    fn ucb_pull_count_reproduces() {
        let run = || {
            let mut env = StochasticEnv::deterministic(&[1.0, 0.0]).unwrap();
            let mut a = Ucb1::new(2, 1000).unwrap();
            drive(&mut env, &mut a, 1000, 9);
            a.stats().pulls(1)
        };
        let n = run();
        assert_eq!(n, run());
        // pulls of the bad arm stay near 2 ln T / (1 + ...)^2 scale, far below T
        assert!(n <= (8.0 * 1000f64.ln()) as u64 + 1, "{n}");
    }

    #[test]
    fn doubling_phase_start_matches_fresh_agent() {
        type Factory = fn(usize) -> Box<dyn Agent>;
        let factory: Factory = |_| Box::new(EpsilonGreedy::new(3).unwrap());
        let mut wrapped = Doubling::new(factory);
        let mut rng = RngStream::new(11);
        let mut env = StochasticEnv::bernoulli(&[0.2, 0.5, 0.7]).unwrap();
        let mut env_rng = RngStream::new(12);
        for t in 1..=64 {
            let round = Round::plain(t);
            let expected = wrapped.action_distribution(&round);
            let arm = wrapped.act(&round, &mut rng);
            if t.is_power_of_two() {
                let mut fresh = factory(t);
                let label = format!("phase-{}", Doubling::<Factory>::phase_of(t));
                assert_eq!(fresh.action_distribution(&Round::plain(1)), expected);
                assert_eq!(fresh.act(&Round::plain(1), &mut rng.substream(&label)), arm);
            }
            let step = env.step(&round, arm, &mut env_rng).unwrap();
            wrapped.observe(&round, arm, &step.feedback, &mut rng).unwrap();
        }
        assert_eq!(wrapped.phase(), 7);
    }

    proptest! {
        #[test]
        fn counts_conserved(seed in any::<u64>(), which in 0usize..4) {
            let mut env = StochasticEnv::bernoulli(&[0.3, 0.6, 0.5]).unwrap();
            let t = 150;
            let rng = RngStream::new(seed);
            let total = match which {
                0 => { let mut a = ExploreFirst::new(3, t, 10).unwrap(); run_episode(&mut env, &mut a, t, &rng).unwrap(); a.stats().total_pulls() + (t as u64 - 30) }
                1 => { let mut a = EpsilonGreedy::new(3).unwrap(); run_episode(&mut env, &mut a, t, &rng).unwrap(); a.stats().total_pulls() }
                2 => { let mut a = SuccessiveElimination::new(3, t).unwrap(); run_episode(&mut env, &mut a, t, &rng).unwrap(); a.stats().total_pulls() }
                _ => { let mut a = Ucb1::new(3, t).unwrap(); run_episode(&mut env, &mut a, t, &rng).unwrap(); a.stats().total_pulls() }
            };
            prop_assert_eq!(total, t as u64);
        }

        #[test]
        fn ucb_index_frozen_while_unplayed(seed in any::<u64>()) {
            let mut a = Ucb1::new(3, 500).unwrap();
            let mut env = StochasticEnv::bernoulli(&[0.3, 0.6, 0.5]).unwrap();
            let mut rng = RngStream::new(seed);
            let mut prev = a.indices();
            for t in 1..=200 {
                let round = Round::plain(t);
                let arm = a.act(&round, &mut rng);
                let step = env.step(&round, arm, &mut rng).unwrap();
                a.observe(&round, arm, &step.feedback, &mut rng).unwrap();
                let now = a.indices();
                for b in (0..3).filter(|&b| b != arm) {
                    prop_assert!(now[b] == prev[b]);
                }
                prev = now;
            }
        }

        #[test]
        fn se_keeps_strict_best_on_deterministic(best in 0usize..4, gap in 0.05f64..0.9) {
            let mut mu = vec![0.9 - gap; 4];
            mu[best] = 0.9;
            let mut env = StochasticEnv::deterministic(&mu).unwrap();
            let mut a = SuccessiveElimination::new(4, 2000).unwrap();
            run_episode(&mut env, &mut a, 2000, &RngStream::new(0)).unwrap();
            prop_assert!(a.active().contains(&best));
        }
    }
}
