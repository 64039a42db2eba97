//! Incentivized exploration with two Bernoulli arms: posterior gaps,
//! Bayesian-greedy, hidden exploration and exact BIC verification.
//!
//! Arm 0 is the prior-preferred arm; priors whose means say otherwise are
//! relabeled on construction.

use std::path::Path;

use crate::bayes::FinitePrior;
use crate::episode::{argmax_lowest, Agent, ArmIndex, Feedback, FeedbackKind, Round};
use crate::error::{config_err, domain_err, Error, Result};
use crate::rng::RngStream;

/// Finite prior over `(mu_1, mu_2)` with `E[mu_1] >= E[mu_2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoArmPrior {
    points: Vec<[f64; 2]>,
    probs: Vec<f64>,
    swapped: bool,
}

impl TwoArmPrior {
    pub fn new(points: Vec<[f64; 2]>, probs: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != probs.len() {
            return Err(config_err!("prior needs one probability per support point"));
        }
        if points.iter().flatten().any(|m| !(0.0..=1.0).contains(m)) {
            return Err(domain_err!("Bernoulli means must lie in [0,1]"));
        }
        crate::concentration::check_prob_vector(&probs)?;
        let mut prior = Self {
            points,
            probs,
            swapped: false,
        };
        let m = prior.mean();
        if m[0] < m[1] {
            prior.points.iter_mut().for_each(|p| p.swap(0, 1));
            prior.swapped = true;
        }
        Ok(prior)
    }

    pub fn from_finite(prior: &FinitePrior) -> Result<Self> {
        if prior.num_arms() != 2 {
            return Err(config_err!("two-arm prior needs exactly two arms"));
        }
        Self::new(prior.support().iter().map(|s| [s[0], s[1]]).collect(), prior.probs().to_vec())
    }

    /// Lines `point <mu1> <mu2> <prob>`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        let mut probs = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let nums: Option<Vec<f64>> = parts.get(1..).map(|p| p.iter().filter_map(|s| s.parse().ok()).collect());
            match (parts[0], nums) {
                ("point", Some(n)) if n.len() == 3 && parts.len() == 4 => {
                    points.push([n[0], n[1]]);
                    probs.push(n[2]);
                }
                _ => return Err(config_err!("line {}: expected `point mu1 mu2 prob`", no + 1)),
            }
        }
        Self::new(points, probs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Whether the input arms were swapped to put the preferred arm first.
    pub fn swapped(&self) -> bool {
        self.swapped
    }

    pub fn mean(&self) -> [f64; 2] {
        let mut m = [0.0; 2];
        for (p, w) in self.points.iter().zip(&self.probs) {
            m[0] += w * p[0];
            m[1] += w * p[1];
        }
        m
    }

    /// Draws a mean vector.
    pub fn sample(&self, rng: &mut RngStream) -> [f64; 2] {
        self.points[rng.categorical(&self.probs)]
    }

    fn likelihood(&self, k: usize, arm: ArmIndex, r: bool) -> f64 {
        let mu = self.points[k][arm];
        if r {
            mu
        } else {
            1.0 - mu
        }
    }
}

/// Unnormalized posterior weights over the prior's support.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief {
    weights: Vec<f64>,
}

impl Belief {
    pub fn new(prior: &TwoArmPrior) -> Self {
        Self {
            weights: prior.probs.clone(),
        }
    }

    pub fn update(&mut self, prior: &TwoArmPrior, arm: ArmIndex, r: bool) {
        for (k, w) in self.weights.iter_mut().enumerate() {
            *w *= prior.likelihood(k, arm, r);
        }
    }

    /// Probability of the observations so far.
    pub fn evidence(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn posterior_mean(&self, prior: &TwoArmPrior) -> Result<[f64; 2]> {
        let z = self.evidence();
        if !(z > 0.0) {
            return Err(domain_err!("observations have probability zero under the prior"));
        }
        let mut m = [0.0; 2];
        for (p, w) in prior.points.iter().zip(&self.weights) {
            m[0] += w * p[0] / z;
            m[1] += w * p[1] / z;
        }
        Ok(m)
    }

    /// `min argmax_a E[mu_a | signal]`.
    pub fn exploit_arm(&self, prior: &TwoArmPrior) -> Result<ArmIndex> {
        Ok(argmax_lowest(&self.posterior_mean(prior)?).0)
    }
}

/// `E[mu_2 - mu_1 | signal]` for a signal of `(arm, reward)` pairs.
pub fn posterior_gap_of(prior: &TwoArmPrior, signal: &[(ArmIndex, bool)]) -> Result<f64> {
    let mut b = Belief::new(prior);
    for &(a, r) in signal {
        if a > 1 {
            return Err(config_err!("arm {a} out of range for two arms"));
        }
        b.update(prior, a, r);
    }
    let m = b.posterior_mean(prior)?;
    Ok(m[1] - m[0])
}

/// Posterior gap after samples of arm 0.
pub fn posterior_gap(prior: &TwoArmPrior, arm1_samples: &[bool]) -> Result<f64> {
    let signal: Vec<(ArmIndex, bool)> = arm1_samples.iter().map(|r| (0, *r)).collect();
    posterior_gap_of(prior, &signal)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `(1/3) E[G 1{G > 0}]` with `G` the posterior gap after `n0` samples of arm 0.
/// Sample tuples with the same number of successes share a probability and a
/// gap, so the sum over all `2^n0` tuples is taken by success count.
pub fn bic_epsilon_bound(prior: &TwoArmPrior, n0: u32) -> f64 {
    (0..=n0)
        .map(|s| {
            let mut b = Belief::new(prior);
            for i in 0..n0 {
                b.update(prior, 0, i < s);
            }
            let pr = b.evidence();
            if pr == 0.0 {
                return 0.0;
            }
            let m = b.posterior_mean(prior).expect("positive evidence");
            binomial(n0, s) * pr * (m[1] - m[0]).max(0.0)
        })
        .sum::<f64>()
        / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BicParams {
    pub n0: u32,
    pub eps: f64,
}

impl BicParams {
    /// Rejects `eps` above the bound; a zero bound means the prior gives arm 1 no fighting chance.
    pub fn checked(prior: &TwoArmPrior, n0: u32, eps: f64) -> Result<Self> {
        let bound = bic_epsilon_bound(prior, n0);
        if bound == 0.0 {
            return Err(domain_err!("posterior gap is never positive after {n0} samples; no BIC exploration possible"));
        }
        if !(eps > 0.0 && eps <= bound) {
            return Err(domain_err!("eps {eps} must lie in (0, {bound}]"));
        }
        Ok(Self { n0, eps })
    }
}

/// One round of hidden exploration: explore with probability `eps` using
/// `explore`, otherwise recommend the posterior-best arm given the signal.
pub fn hidden_exploration<F>(
    prior: &TwoArmPrior,
    signal: &[(ArmIndex, bool)],
    eps: f64,
    explore: F,
    rng: &mut RngStream,
) -> Result<ArmIndex>
where
    F: FnOnce(&[(ArmIndex, bool)], &mut RngStream) -> ArmIndex,
{
    if !(0.0..=1.0).contains(&eps) {
        return Err(domain_err!("exploration probability must lie in [0,1]"));
    }
    let mut b = Belief::new(prior);
    for &(a, r) in signal {
        b.update(prior, a, r);
    }
    let exploit = b.exploit_arm(prior)?;
    Ok(if rng.bernoulli(eps) { explore(signal, rng) } else { exploit })
}

/// A recommendation algorithm whose randomness is a finite list of branches,
/// so that it can be both simulated and enumerated exactly.
pub trait Recommender: Clone {
    /// `(probability, recommended arm, state after committing to the branch)`.
    fn branches(&self) -> Result<Vec<(f64, ArmIndex, Self)>>;
    /// Reward of the recommended arm, after the agent complied.
    fn observe(&mut self, arm: ArmIndex, reward: bool);
}

/// Always recommends the same arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantArm(pub ArmIndex);

impl Recommender for ConstantArm {
    fn branches(&self) -> Result<Vec<(f64, ArmIndex, Self)>> {
        Ok(vec![(1.0, self.0, *self)])
    }

    fn observe(&mut self, _: ArmIndex, _: bool) {}
}

/// Alternates arms starting from `first`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRobin {
    next: ArmIndex,
}

impl RoundRobin {
    pub fn new(first: ArmIndex) -> Self {
        Self { next: first }
    }
}

impl Recommender for RoundRobin {
    fn branches(&self) -> Result<Vec<(f64, ArmIndex, Self)>> {
        Ok(vec![(1.0, self.next, Self { next: 1 - self.next })])
    }

    fn observe(&mut self, _: ArmIndex, _: bool) {}
}

/// Recommends the posterior-best arm given the full history.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesianGreedy {
    prior: TwoArmPrior,
    belief: Belief,
}

impl BayesianGreedy {
    pub fn new(prior: TwoArmPrior) -> Self {
        Self {
            belief: Belief::new(&prior),
            prior,
        }
    }
}

impl Recommender for BayesianGreedy {
    fn branches(&self) -> Result<Vec<(f64, ArmIndex, Self)>> {
        Ok(vec![(1.0, self.belief.exploit_arm(&self.prior)?, self.clone())])
    }

    fn observe(&mut self, arm: ArmIndex, reward: bool) {
        self.belief.update(&self.prior, arm, reward);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Initial,
    Explore,
    Exploit,
}

/// Arm 0 for `n0` rounds, then hidden exploration each round: with
/// probability `eps` the inner algorithm picks and learns, otherwise the
/// posterior-best arm given all exploration rounds so far.
#[derive(Debug, Clone, PartialEq)]
pub struct RepeatedHiddenExploration<I: Recommender> {
    prior: TwoArmPrior,
    params: BicParams,
    inner: I,
    signal: Belief,
    signal_len: usize,
    round: usize,
    phase: Phase,
}

impl<I: Recommender> RepeatedHiddenExploration<I> {
    pub fn new(prior: TwoArmPrior, params: BicParams, inner: I) -> Result<Self> {
        if !(params.eps > 0.0 && params.eps < 1.0) {
            return Err(domain_err!("exploration probability must lie in (0,1)"));
        }
        Ok(Self {
            signal: Belief::new(&prior),
            prior,
            params,
            inner,
            signal_len: 0,
            round: 0,
            phase: Phase::Initial,
        })
    }

    /// Phase of the most recent recommendation.
    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Number of exploration rounds (initial ones included) observed so far.
    pub fn signal_len(&self) -> usize {
        self.signal_len
    }

    pub fn exploit_arm(&self) -> Result<ArmIndex> {
        self.signal.exploit_arm(&self.prior)
    }

    pub fn inner(&self) -> &I {
        &self.inner
    }
}

impl<I: Recommender> Recommender for RepeatedHiddenExploration<I> {
    fn branches(&self) -> Result<Vec<(f64, ArmIndex, Self)>> {
        let mut next = self.clone();
        next.round += 1;
        if next.round <= self.params.n0 as usize {
            next.phase = Phase::Initial;
            return Ok(vec![(1.0, 0, next)]);
        }
        let mut out = Vec::new();
        for (q, arm, inner) in self.inner.branches()? {
            let mut s = next.clone();
            s.inner = inner;
            s.phase = Phase::Explore;
            out.push((self.params.eps * q, arm, s));
        }
        let mut s = next;
        s.phase = Phase::Exploit;
        out.push((1.0 - self.params.eps, self.exploit_arm()?, s));
        Ok(out)
    }

    fn observe(&mut self, arm: ArmIndex, reward: bool) {
        match self.phase {
            Phase::Initial => {}
            Phase::Explore => self.inner.observe(arm, reward),
            Phase::Exploit => return,
        }
        self.signal.update(&self.prior, arm, reward);
        self.signal_len += 1;
    }
}

/// Runs a [`Recommender`] as a bandit agent by sampling its branches.
/// Rewards must be 0 or 1.
#[derive(Debug, Clone)]
pub struct Sampled<R: Recommender> {
    rec: R,
    swapped: bool,
}

impl<R: Recommender> Sampled<R> {
    /// Arms are numbered as in the recommender.
    pub fn new(rec: R) -> Self {
        Self { rec, swapped: false }
    }

    /// Arms are numbered as in the input the prior was built from, undoing its relabeling.
    pub fn for_prior(rec: R, prior: &TwoArmPrior) -> Self {
        Self {
            rec,
            swapped: prior.swapped,
        }
    }

    pub fn recommender(&self) -> &R {
        &self.rec
    }

    fn map(&self, arm: ArmIndex) -> ArmIndex {
        if self.swapped {
            1 - arm
        } else {
            arm
        }
    }
}

impl<R: Recommender> Agent for Sampled<R> {
    fn num_arms(&self) -> usize {
        2
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Bandit
    }

    fn act(&mut self, _: &Round, rng: &mut RngStream) -> ArmIndex {
        let mut branches = self.rec.branches().expect("recommendation on a possible history");
        let i = if branches.len() == 1 {
            0
        } else {
            rng.categorical(&branches.iter().map(|b| b.0).collect::<Vec<_>>())
        };
        let (_, arm, state) = branches.swap_remove(i);
        self.rec = state;
        self.map(arm)
    }

    fn observe(&mut self, _: &Round, arm: ArmIndex, feedback: &Feedback, _: &mut RngStream) -> Result<()> {
        if arm > 1 {
            return Err(config_err!("arm {arm} out of range for two arms"));
        }
        match feedback {
            Feedback::BanditReward(r) if *r == 0.0 || *r == 1.0 => {
                let a = self.map(arm);
                self.rec.observe(a, *r == 1.0);
                Ok(())
            }
            other => Err(domain_err!("incentive agents need 0/1 rewards, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BicMode {
    /// `E[mu_a - mu_a' | rec_t = a] >= 0`.
    Weak,
    /// Strictly positive, for strongly BIC algorithms.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BicConstraint {
    pub round: usize,
    pub arm: ArmIndex,
    /// `Pr[rec_t = arm]`.
    pub prob: f64,
    /// `E[mu_arm - mu_other | rec_t = arm]`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BicReport {
    pub pass: bool,
    pub worst_margin: f64,
    pub constraints: Vec<BicConstraint>,
    /// Rounds where arm 1's constraint held, both arms had positive probability
    /// and arm 0's constraint failed; always empty when the prior prefers arm 0.
    pub symmetry_violations: Vec<usize>,
    pub nodes: usize,
}

const BIC_TOL: f64 = 1e-12;

/// Exact BIC check by enumerating every prior point, reward realization and
/// algorithm branch for `T` rounds, with all agents complying.
pub fn bic_verify<R: Recommender>(
    agent: &R,
    prior: &TwoArmPrior,
    horizon: usize,
    mode: BicMode,
    node_cap: usize,
) -> Result<BicReport> {
    if horizon == 0 {
        return Err(config_err!("horizon must be positive"));
    }
    // mass[t][a] = Pr[rec_t = a], diff[t][a] = E[(mu_a - mu_other) 1{rec_t = a}]
    let mut mass = vec![[0.0f64; 2]; horizon];
    let mut diff = vec![[0.0f64; 2]; horizon];
    let mut nodes = 0usize;
    for (k, (mu, p)) in prior.points.iter().zip(&prior.probs).enumerate() {
        if *p == 0.0 {
            continue;
        }
        let mut frontier = vec![(*p, agent.clone())];
        for t in 0..horizon {
            let mut next = Vec::with_capacity(frontier.len() * 4);
            for (w, state) in frontier {
                for (q, arm, branch) in state.branches()? {
                    if arm > 1 {
                        return Err(config_err!("recommended arm {arm} out of range"));
                    }
                    let wq = w * q;
                    if wq == 0.0 {
                        continue;
                    }
                    mass[t][arm] += wq;
                    diff[t][arm] += wq * (mu[arm] - mu[1 - arm]);
                    if t + 1 == horizon {
                        continue;
                    }
                    for r in [false, true] {
                        let lr = prior.likelihood(k, arm, r);
                        if lr == 0.0 {
                            continue;
                        }
                        let mut s = branch.clone();
                        s.observe(arm, r);
                        next.push((wq * lr, s));
                    }
                }
                nodes += 1;
                if nodes > node_cap {
                    return Err(Error::Resource(format!("BIC enumeration exceeded {node_cap} nodes")));
                }
            }
            frontier = next;
        }
    }
    let mut constraints = Vec::new();
    let mut symmetry_violations = Vec::new();
    for t in 0..horizon {
        for arm in 0..2 {
            if mass[t][arm] > 0.0 {
                constraints.push(BicConstraint {
                    round: t + 1,
                    arm,
                    prob: mass[t][arm],
                    margin: diff[t][arm] / mass[t][arm],
                });
            }
        }
        if mass[t][0] > 0.0 && mass[t][1] > 0.0 {
            let ok = |a: usize| diff[t][a] / mass[t][a] >= -BIC_TOL;
            if ok(1) && !ok(0) {
                symmetry_violations.push(t + 1);
            }
        }
    }
    let worst_margin = constraints.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
    let pass = match mode {
        BicMode::Weak => worst_margin >= -BIC_TOL,
        BicMode::Strict => worst_margin > BIC_TOL,
    };
    Ok(BicReport {
        pass,
        worst_margin,
        constraints,
        symmetry_violations,
        nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn example() -> TwoArmPrior {
        TwoArmPrior::new(vec![[0.3, 0.5], [0.9, 0.5]], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn gap_examples() {
        let p = example();
        assert_abs_diff_eq!(posterior_gap(&p, &[false]).unwrap(), 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(posterior_gap(&p, &[true]).unwrap(), -0.25, epsilon = 1e-15);
        let point = TwoArmPrior::new(vec![[0.7, 0.2]], vec![1.0]).unwrap();
        assert_abs_diff_eq!(posterior_gap(&point, &[true, false, false]).unwrap(), -0.5, epsilon = 1e-15);
        let certain = TwoArmPrior::new(vec![[1.0, 0.5]], vec![1.0]).unwrap();
        assert!(posterior_gap(&certain, &[false]).is_err());
    }

    #[test]
    fn relabeling() {
        let p = TwoArmPrior::new(vec![[0.2, 0.6]], vec![1.0]).unwrap();
        assert!(p.swapped());
        assert_eq!(p.points(), &[[0.6, 0.2]]);
        assert!(!example().swapped());
    }

    #[test]
    fn prior_file() {
        let p = TwoArmPrior::parse("# example\npoint 0.3 0.5 0.5\npoint 0.9 0.5 0.5\n").unwrap();
        assert_eq!(p, example());
        assert!(TwoArmPrior::parse("point 0.3 0.5\n").is_err());
        assert!(TwoArmPrior::parse("pt 0.3 0.5 1\n").is_err());
    }

    /// Sum over all 2^n tuples, enumerated bit by bit.
    fn bound_by_tuples(p: &TwoArmPrior, n: u32) -> f64 {
        let mut total = 0.0;
        for bits in 0u32..(1 << n) {
            let tuple: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
            let pr: f64 = p
                .points()
                .iter()
                .zip(p.probs())
                .map(|(mu, w)| w * tuple.iter().map(|r| if *r { mu[0] } else { 1.0 - mu[0] }).product::<f64>())
                .sum();
            if pr > 0.0 {
                total += pr * posterior_gap(p, &tuple).unwrap().max(0.0);
            }
        }
        total / 3.0
    }

    #[test]
    fn epsilon_bound_examples() {
        let p = example();
        assert_abs_diff_eq!(bic_epsilon_bound(&p, 1), 0.4 * 0.125 / 3.0, epsilon = 1e-15);
        assert_eq!(bic_epsilon_bound(&p, 0), 0.0);
        let mut prev = 0.0;
        for n in 0..=4 {
            let b = bic_epsilon_bound(&p, n);
            assert_abs_diff_eq!(b, bound_by_tuples(&p, n), epsilon = 1e-15);
            assert!(b >= prev - 1e-15);
            prev = b;
        }
        assert!(BicParams::checked(&p, 0, 0.01).is_err());
        assert!(BicParams::checked(&p, 1, 0.02).is_err());
        assert!(BicParams::checked(&p, 1, 0.016).is_ok());
    }

    #[test]
    fn hidden_exploration_branches() {
        let p = example();
        let mut rng = RngStream::new(0);
        for _ in 0..20 {
            assert_eq!(hidden_exploration(&p, &[(0, false)], 0.0, |_, _| 0, &mut rng).unwrap(), 1);
            assert_eq!(hidden_exploration(&p, &[(0, true)], 0.0, |_, _| 1, &mut rng).unwrap(), 0);
            assert_eq!(hidden_exploration(&p, &[(0, true)], 1.0, |_, _| 1, &mut rng).unwrap(), 1);
        }
    }

    fn rhe(n0: u32, eps: f64) -> RepeatedHiddenExploration<ConstantArm> {
        RepeatedHiddenExploration::new(example(), BicParams { n0, eps }, ConstantArm(1)).unwrap()
    }

    #[test]
    fn rhe_phases_and_exploit_arm() {
        let agent = rhe(1, 0.016);
        let b = agent.branches().unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!((b[0].1, b[0].2.phase()), (0, Phase::Initial));
        let mut after = b[0].2.clone();
        after.observe(0, false);
        let b = after.branches().unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!((b[0].0, b[0].1, b[0].2.phase()), (0.016, 1, Phase::Explore));
        assert_eq!((b[1].1, b[1].2.phase()), (1, Phase::Exploit));
        // exploitation rounds do not enter the signal
        let mut ex = b[1].2.clone();
        ex.observe(1, true);
        assert_eq!(ex.signal_len(), 1);
        let mut ep = b[0].2.clone();
        ep.observe(1, true);
        assert_eq!(ep.signal_len(), 2);
    }

    #[test]
    fn rhe_inner_arm_only_on_exploration() {
        let mut agent = Sampled::new(RepeatedHiddenExploration::new(example(), BicParams { n0: 2, eps: 0.3 }, ConstantArm(1)).unwrap());
        let mut rng = RngStream::new(5);
        let mut env_rng = RngStream::new(6);
        for t in 1..=300 {
            let round = Round::plain(t);
            let a = agent.act(&round, &mut rng);
            let exploit_arm = agent.recommender().exploit_arm().unwrap();
            match agent.recommender().phase() {
                Phase::Initial => assert_eq!(a, 0),
                Phase::Explore => assert_eq!(a, 1),
                Phase::Exploit => assert_eq!(a, exploit_arm),
            }
            let r = if env_rng.bernoulli(if a == 0 { 0.3 } else { 0.5 }) { 1.0 } else { 0.0 };
            agent.observe(&round, a, &Feedback::BanditReward(r), &mut rng).unwrap();
        }
    }

    #[test]
    fn sampled_undoes_relabeling() {
        let p = TwoArmPrior::new(vec![[0.2, 0.6]], vec![1.0]).unwrap();
        let mut agent = Sampled::for_prior(BayesianGreedy::new(p), &TwoArmPrior::new(vec![[0.2, 0.6]], vec![1.0]).unwrap());
        let mut rng = RngStream::new(1);
        // the preferred arm is input arm 1
        assert_eq!(agent.act(&Round::plain(1), &mut rng), 1);
        agent.observe(&Round::plain(1), 1, &Feedback::BanditReward(1.0), &mut rng).unwrap();
        assert!(agent.observe(&Round::plain(2), 1, &Feedback::BanditReward(0.5), &mut rng).is_err());
    }

    #[test]
    fn greedy_rules() {
        let g = BayesianGreedy::new(example());
        assert_eq!(g.branches().unwrap()[0].1, 0);
        let mut h = g.clone();
        h.observe(0, true);
        assert_eq!(h.branches().unwrap()[0].1, 0);
        let mut l = g;
        l.observe(0, false);
        assert_eq!(l.branches().unwrap()[0].1, 1);
    }

    #[test]
    fn bic_constant_agents() {
        let p = example();
        let r = bic_verify(&ConstantArm(0), &p, 3, BicMode::Weak, 1 << 20).unwrap();
        assert!(r.pass);
        let r = bic_verify(&ConstantArm(1), &p, 1, BicMode::Weak, 1 << 20).unwrap();
        assert!(!r.pass);
        assert_abs_diff_eq!(r.worst_margin, -0.1, epsilon = 1e-15);
    }

    #[test]
    fn bic_rhe_within_bound() {
        let p = example();
        let r = bic_verify(&rhe(1, 0.016), &p, 4, BicMode::Weak, 1 << 20).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.symmetry_violations.is_empty());
        // far too much exploration breaks it
        let r = bic_verify(&rhe(1, 0.9), &p, 4, BicMode::Weak, 1 << 20).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn bic_node_cap() {
        let r = bic_verify(&rhe(1, 0.016), &example(), 12, BicMode::Weak, 100);
        assert!(matches!(r, Err(Error::Resource(_))));
    }

    #[test]
    fn no_fighting_chance_means_no_strict_arm_two() {
        // mu_1 - mu_2 independent of mu_1: samples of arm 0 never make arm 1 look better
        let p = TwoArmPrior::new(vec![[0.4, 0.3], [0.8, 0.7]], vec![0.5, 0.5]).unwrap();
        for n in 0..6 {
            assert_eq!(bic_epsilon_bound(&p, n), 0.0);
        }
        let agent = RepeatedHiddenExploration::new(p.clone(), BicParams { n0: 2, eps: 0.01 }, ConstantArm(1)).unwrap();
        assert!(!bic_verify(&agent, &p, 4, BicMode::Strict, 1 << 20).unwrap().pass);
    }

    proptest! {
        #[test]
        fn gap_is_martingale(
            m1 in prop::collection::vec(0.05f64..0.95, 3),
            m2 in prop::collection::vec(0.0f64..1.0, 3),
            w in prop::collection::vec(0.1f64..1.0, 3),
            bits in prop::collection::vec(any::<bool>(), 0..5),
        ) {
            let s: f64 = w.iter().sum();
            let probs: Vec<f64> = w.iter().map(|x| x / s).collect();
            let pts: Vec<[f64; 2]> = m1.iter().zip(&m2).map(|(a, b)| [*a, *b]).collect();
            let p = TwoArmPrior::new(pts, probs).unwrap();
            let g = posterior_gap(&p, &bits).unwrap();
            let mut b = Belief::new(&p);
            for r in &bits { b.update(&p, 0, *r); }
            let m = b.posterior_mean(&p).unwrap();
            let p1 = m[0];
            let mut more = bits.clone();
            more.push(true);
            let g1 = posterior_gap(&p, &more).unwrap();
            more.pop();
            more.push(false);
            let g0 = posterior_gap(&p, &more).unwrap();
            prop_assert!((p1 * g1 + (1.0 - p1) * g0 - g).abs() < 1e-12);
        }
    }
}
