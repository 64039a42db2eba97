//! Exact Bayesian updates for finite-support priors with Bernoulli rewards,
//! the Beta-Bernoulli and Gaussian conjugate pairs, and Thompson Sampling.

use rand_distr::{Beta, Distribution, Normal};

use crate::concentration::check_prob_vector;
use crate::episode::{argmax_lowest, run_episode, Agent, ArmIndex, Feedback, FeedbackKind, History, Round};
use crate::error::{config_err, domain_err, Result};
use crate::rng::RngStream;
use crate::stochastic::StochasticEnv;

/// Prior with explicit finite support of mean-reward vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePrior {
    support: Vec<Vec<f64>>,
    probs: Vec<f64>,
}

impl FinitePrior {
    pub fn new(support: Vec<Vec<f64>>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(domain_err!("prior needs a non-empty support with one probability per point"));
        }
        let k = support[0].len();
        if k == 0 || support.iter().any(|mu| mu.len() != k) {
            return Err(domain_err!("support points must share a positive dimension"));
        }
        if support.iter().flatten().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(domain_err!("support entries must lie in [0,1]"));
        }
        check_prob_vector(&probs)?;
        Ok(Self { support, probs })
    }

    /// Product of independent per-arm finite priors `(values, probs)`.
    pub fn product(marginals: &[(Vec<f64>, Vec<f64>)]) -> Result<Self> {
        let mut support = vec![Vec::new()];
        let mut probs = vec![1.0];
        for (values, ps) in marginals {
            if values.len() != ps.len() {
                return Err(domain_err!("marginal values and probabilities differ in length"));
            }
            let mut next_s = Vec::new();
            let mut next_p = Vec::new();
            for (mu, p) in support.iter().zip(&probs) {
                for (v, q) in values.iter().zip(ps) {
                    let mut m = mu.clone();
                    m.push(*v);
                    next_s.push(m);
                    next_p.push(p * q);
                }
            }
            support = next_s;
            probs = next_p;
        }
        Self::new(support, probs)
    }

    pub fn num_arms(&self) -> usize {
        self.support[0].len()
    }

    pub fn support(&self) -> &[Vec<f64>] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Prior mean reward of every arm.
    pub fn mean(&self) -> Vec<f64> {
        weighted_mean(&self.support, &self.probs)
    }

    /// `Pr[a* = a]` under weights over the support, best arm by lowest index on ties.
    pub fn best_arm_distribution(&self, weights: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_arms()];
        for (mu, w) in self.support.iter().zip(weights) {
            out[argmax_lowest(mu).0] += w;
        }
        out
    }

    pub fn sample(&self, rng: &mut RngStream) -> &[f64] {
        &self.support[rng.categorical(&self.probs)]
    }
}

fn weighted_mean(support: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let mut m = vec![0.0; support[0].len()];
    for (mu, w) in support.iter().zip(weights) {
        for (acc, x) in m.iter_mut().zip(mu) {
            *acc += w * x;
        }
    }
    m
}

/// Log-likelihood of Bernoulli reward `r` under mean `x`.
fn bernoulli_log_lik(x: f64, r: f64) -> Result<f64> {
    if r == 1.0 {
        Ok(x.ln())
    } else if r == 0.0 {
        Ok((1.0 - x).ln())
    } else {
        Err(domain_err!("finite-prior updates need rewards in {{0,1}}, got {r}"))
    }
}

/// Posterior over a finite support, kept as unnormalized log weights.
#[derive(Debug, Clone)]
pub struct FinitePosterior {
    prior: FinitePrior,
    log_w: Vec<f64>,
}

impl FinitePosterior {
    pub fn new(prior: FinitePrior) -> Self {
        let log_w = prior.probs.iter().map(|p| p.ln()).collect();
        Self { prior, log_w }
    }

    pub fn update(&mut self, arm: ArmIndex, reward: f64) -> Result<()> {
        if arm >= self.prior.num_arms() {
            return Err(domain_err!("arm {arm} out of range"));
        }
        let mut next = self.log_w.clone();
        for (lw, mu) in next.iter_mut().zip(&self.prior.support) {
            *lw += bernoulli_log_lik(mu[arm], reward)?;
        }
        if next.iter().all(|w| *w == f64::NEG_INFINITY) {
            return Err(domain_err!("history has zero probability under every support point"));
        }
        self.log_w = next;
        Ok(())
    }

    pub fn probs(&self) -> Vec<f64> {
        let top = self.log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = self.log_w.iter().map(|l| (l - top).exp()).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    }

    pub fn prior(&self) -> &FinitePrior {
        &self.prior
    }

    pub fn mean(&self) -> Vec<f64> {
        weighted_mean(&self.prior.support, &self.probs())
    }
}

/// Posterior over the support of `prior` given `(arm, reward)` pairs.
pub fn posterior_from_pairs(prior: &FinitePrior, pairs: &[(ArmIndex, f64)]) -> Result<Vec<f64>> {
    let mut post = FinitePosterior::new(prior.clone());
    for &(a, r) in pairs {
        post.update(a, r)?;
    }
    Ok(post.probs())
}

/// Posterior over the support of `prior` given a bandit history.
pub fn posterior_update_finite(prior: &FinitePrior, history: &History) -> Result<Vec<f64>> {
    let pairs = history
        .records()
        .iter()
        .map(|rec| match rec.feedback {
            Feedback::BanditReward(r) => Ok((rec.arm, r)),
            ref other => Err(domain_err!("finite-prior updates need bandit feedback, got {other:?}")),
        })
        .collect::<Result<Vec<_>>>()?;
    posterior_from_pairs(prior, &pairs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(domain_err!("Beta parameters must be positive, got ({alpha}, {beta})"));
        }
        Ok(Self { alpha, beta })
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }
}

pub fn beta_bernoulli_update(p: BetaParams, successes: u64, failures: u64) -> BetaParams {
    BetaParams {
        alpha: p.alpha + successes as f64,
        beta: p.beta + failures as f64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub mean: f64,
    pub std: f64,
}

impl GaussianParams {
    pub fn new(mean: f64, std: f64) -> Result<Self> {
        if !(std > 0.0) {
            return Err(domain_err!("Gaussian std must be positive, got {std}"));
        }
        Ok(Self { mean, std })
    }
}

/// Conjugate normal update with known observation noise `obs_std`.
pub fn gaussian_update(prior: GaussianParams, obs_std: f64, sum: f64, n: u64) -> Result<GaussianParams> {
    if !(obs_std > 0.0) {
        return Err(domain_err!("observation std must be positive, got {obs_std}"));
    }
    if n == 0 {
        return Ok(prior);
    }
    let tau0 = prior.std.powi(-2);
    let tau_obs = obs_std.powi(-2);
    let tau = tau0 + n as f64 * tau_obs;
    Ok(GaussianParams {
        mean: (tau0 * prior.mean + tau_obs * sum) / tau,
        std: tau.powf(-0.5),
    })
}

/// Thompson Sampling against a known finite prior.
#[derive(Debug, Clone)]
pub struct ThompsonFinite {
    posterior: FinitePosterior,
}

impl ThompsonFinite {
    pub fn new(prior: FinitePrior) -> Self {
        Self {
            posterior: FinitePosterior::new(prior),
        }
    }

    pub fn posterior(&self) -> &FinitePosterior {
        &self.posterior
    }
}

impl Agent for ThompsonFinite {
    fn num_arms(&self) -> usize {
        self.posterior.prior.num_arms()
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Bandit
    }

    fn act(&mut self, _: &Round, rng: &mut RngStream) -> ArmIndex {
        let i = rng.categorical(&self.posterior.probs());
        argmax_lowest(&self.posterior.prior.support[i]).0
    }

    fn observe(&mut self, _: &Round, arm: ArmIndex, feedback: &Feedback, _: &mut RngStream) -> Result<()> {
        match feedback {
            Feedback::BanditReward(r) => self.posterior.update(arm, *r),
            other => Err(config_err!("Thompson Sampling needs bandit feedback, got {other:?}")),
        }
    }

    fn action_distribution(&self, _: &Round) -> Option<Vec<f64>> {
        Some(self.posterior.prior.best_arm_distribution(&self.posterior.probs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsMode {
    BetaBernoulli,
    Gaussian,
}

/// Thompson Sampling with independent per-arm conjugate priors: Beta(1,1)
/// with coin-flip binarization, or N(0,1) with unit-variance likelihood.
#[derive(Debug, Clone)]
pub struct ThompsonPriorFree {
    mode: TsMode,
    beta: Vec<BetaParams>,
    n: Vec<u64>,
    sum: Vec<f64>,
}

impl ThompsonPriorFree {
    pub fn new(k: usize, mode: TsMode) -> Result<Self> {
        if k == 0 {
            return Err(config_err!("Thompson Sampling needs K >= 1"));
        }
        Ok(Self {
            mode,
            beta: vec![BetaParams { alpha: 1.0, beta: 1.0 }; k],
            n: vec![0; k],
            sum: vec![0.0; k],
        })
    }

    pub fn beta_params(&self, arm: ArmIndex) -> BetaParams {
        self.beta[arm]
    }

    pub fn gaussian_params(&self, arm: ArmIndex) -> GaussianParams {
        gaussian_update(GaussianParams { mean: 0.0, std: 1.0 }, 1.0, self.sum[arm], self.n[arm]).expect("unit noise")
    }
}

impl Agent for ThompsonPriorFree {
    fn num_arms(&self) -> usize {
        self.beta.len()
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Bandit
    }

    fn act(&mut self, _: &Round, rng: &mut RngStream) -> ArmIndex {
        let draws: Vec<f64> = (0..self.beta.len())
            .map(|a| match self.mode {
                TsMode::BetaBernoulli => {
                    let p = self.beta[a];
                    Beta::new(p.alpha, p.beta).expect("positive parameters").sample(rng)
                }
                TsMode::Gaussian => {
                    let g = self.gaussian_params(a);
                    Normal::new(g.mean, g.std).expect("positive std").sample(rng)
                }
            })
            .collect();
        argmax_lowest(&draws).0
    }

    fn observe(&mut self, _: &Round, arm: ArmIndex, feedback: &Feedback, rng: &mut RngStream) -> Result<()> {
        let r = match feedback {
            Feedback::BanditReward(r) => *r,
            other => return Err(config_err!("Thompson Sampling needs bandit feedback, got {other:?}")),
        };
        match self.mode {
            TsMode::BetaBernoulli => {
                let success = if r == 1.0 || r == 0.0 { r == 1.0 } else { rng.bernoulli(r) };
                let (s, f) = if success { (1, 0) } else { (0, 1) };
                self.beta[arm] = beta_bernoulli_update(self.beta[arm], s, f);
            }
            TsMode::Gaussian => {
                self.n[arm] += 1;
                self.sum[arm] += r;
            }
        }
        Ok(())
    }
}

/// Monte-Carlo Bayesian regret: for each seed draw a mean vector from the
/// prior, run a fresh agent on the Bernoulli instance, average pseudo-regret.
pub fn bayesian_regret<F>(prior: &FinitePrior, make_agent: F, horizon: usize, seeds: &[u64]) -> Result<(f64, f64)>
where
    F: Fn() -> Box<dyn Agent> + Sync + Send,
{
    let runs = crate::par::map_seeds(seeds, |seed| -> Result<f64> {
        let root = RngStream::new(seed);
        let mu = prior.sample(&mut root.substream("prior")).to_vec();
        let mut env = StochasticEnv::bernoulli(&mu)?;
        let mut agent = make_agent();
        let ep = run_episode(&mut env, &mut agent, horizon, &root.substream("run"))?;
        Ok(ep.report.pseudo_regret.unwrap_or(f64::NAN))
    });
    let xs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(crate::par::mean_and_stderr(&xs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn example_prior() -> FinitePrior {
        FinitePrior::new(vec![vec![0.3, 0.5], vec![0.9, 0.5]], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn empty_history_keeps_prior() {
        let p = posterior_update_finite(&example_prior(), &History::new()).unwrap();
        assert_abs_diff_eq!(p[0], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn hand_posterior() {
        // likelihoods 0.7 and 0.1 for r = 0 on arm 0
        let mut h = History::new();
        h.push(0, Feedback::BanditReward(0.0));
        let p = posterior_update_finite(&example_prior(), &h).unwrap();
        assert_abs_diff_eq!(p[0], 0.7 / 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 0.125, epsilon = 1e-12);
    }

    #[test]
    fn impossible_history_is_domain_error() {
        let prior = FinitePrior::new(vec![vec![1.0, 0.0]], vec![1.0]).unwrap();
        assert!(posterior_from_pairs(&prior, &[(0, 0.0)]).is_err());
        assert!(posterior_from_pairs(&prior, &[(0, 0.5)]).is_err());
    }

    #[test]
    fn beta_updates() {
        let u = BetaParams::new(1.0, 1.0).unwrap();
        assert_eq!(beta_bernoulli_update(u, 0, 0), u);
        let p = beta_bernoulli_update(u, 3, 1);
        assert_eq!((p.alpha, p.beta), (4.0, 2.0));
        assert!(BetaParams::new(0.0, 1.0).is_err());
    }

    #[test]
    fn beta_mean_matches_discretized_prior() {
        let n = 2001;
        let support: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 / (n - 1) as f64]).collect();
        let prior = FinitePrior::new(support, vec![1.0 / n as f64; n]).unwrap();
        let post = posterior_from_pairs(&prior, &[(0, 1.0), (0, 1.0), (0, 1.0), (0, 0.0)]).unwrap();
        let mean: f64 = prior.support().iter().zip(&post).map(|(x, p)| x[0] * p).sum();
        let conj = beta_bernoulli_update(BetaParams::new(1.0, 1.0).unwrap(), 3, 1).mean();
        assert_abs_diff_eq!(conj, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mean, conj, epsilon = 1e-3);
    }

    #[test]
    fn gaussian_updates() {
        let prior = GaussianParams::new(0.0, 1.0).unwrap();
        assert_eq!(gaussian_update(prior, 1.0, 0.0, 0).unwrap(), prior);
        let g = gaussian_update(prior, 1.0, 1.0, 1).unwrap();
        assert_abs_diff_eq!(g.mean, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g.std, 0.5f64.sqrt(), epsilon = 1e-15);
        assert!(gaussian_update(prior, 0.0, 1.0, 1).is_err());
        let mut rng = RngStream::new(5);
        let normal = Normal::new(0.7, 1.0).unwrap();
        let sum: f64 = (0..10_000).map(|_| normal.sample(&mut rng)).sum();
        let g = gaussian_update(prior, 1.0, sum, 10_000).unwrap();
        assert_abs_diff_eq!(g.mean, sum / 10_000.0, epsilon = 1e-3);
    }

    #[test]
    fn point_mass_thompson() {
        let prior = FinitePrior::new(vec![vec![1.0, 0.0]], vec![1.0]).unwrap();
        let mut env = StochasticEnv::bernoulli(&[1.0, 0.0]).unwrap();
        let mut ts = ThompsonFinite::new(prior);
        let ep = run_episode(&mut env, &mut ts, 50, &RngStream::new(1)).unwrap();
        assert!(ep.history.arms().iter().all(|&a| a == 0));
    }

    #[test]
    fn round_one_distribution_is_best_arm_probability() {
        let prior = FinitePrior::new(
            vec![vec![0.2, 0.8, 0.5], vec![0.9, 0.1, 0.5], vec![0.4, 0.4, 0.7], vec![0.6, 0.6, 0.1]],
            vec![0.1, 0.2, 0.3, 0.4],
        )
        .unwrap();
        // enumeration: point 0 -> arm 1, point 1 -> arm 0, point 2 -> arm 2, point 3 -> arm 0 (tie)
        let oracle = [0.2 + 0.4, 0.1, 0.3];
        let ts = ThompsonFinite::new(prior);
        let d = ts.action_distribution(&Round::plain(1)).unwrap();
        for (x, y) in d.iter().zip(oracle) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn prior_free_counts() {
        let mut ts = ThompsonPriorFree::new(2, TsMode::BetaBernoulli).unwrap();
        let mut rng = RngStream::new(0);
        for t in 1..=10 {
            ts.observe(&Round::plain(t), 0, &Feedback::BanditReward(1.0), &mut rng).unwrap();
        }
        assert_eq!(ts.beta_params(0), BetaParams { alpha: 11.0, beta: 1.0 });
    }

    fn random_prior(rng: &mut RngStream, k: usize, m: usize) -> FinitePrior {
        let support = (0..m).map(|_| (0..k).map(|_| 0.05 + 0.9 * rng.uniform()).collect()).collect();
        let w: Vec<f64> = (0..m).map(|_| rng.uniform() + 0.01).collect();
        let s: f64 = w.iter().sum();
        FinitePrior::new(support, w.into_iter().map(|x| x / s).collect()).unwrap()
    }

    fn random_pairs(rng: &mut RngStream, k: usize, n: usize) -> Vec<(ArmIndex, f64)> {
        (0..n).map(|_| (rng.index(k), if rng.bernoulli(0.5) { 1.0 } else { 0.0 })).collect()
    }

    proptest! {
        #[test]
        fn sequential_equals_batch_and_order_free(seed in any::<u64>(), split in 0usize..30) {
            let mut rng = RngStream::new(seed);
            let prior = random_prior(&mut rng, 3, 6);
            let pairs = random_pairs(&mut rng, 3, 30);
            let batch = posterior_from_pairs(&prior, &pairs).unwrap();

            let mut ts = ThompsonFinite::new(prior.clone());
            for (t, &(a, r)) in pairs.iter().enumerate() {
                ts.observe(&Round::plain(t + 1), a, &Feedback::BanditReward(r), &mut rng).unwrap();
            }
            let seq = ts.posterior().probs();

            let head = posterior_from_pairs(&prior, &pairs[..split]).unwrap();
            let mid = FinitePrior::new(prior.support().to_vec(), head).unwrap();
            let two_step = posterior_from_pairs(&mid, &pairs[split..]).unwrap();

            let mut rev = pairs.clone();
            rev.reverse();
            let reordered = posterior_from_pairs(&prior, &rev).unwrap();
            for i in 0..batch.len() {
                prop_assert!((batch[i] - seq[i]).abs() < 1e-12);
                prop_assert!((batch[i] - two_step[i]).abs() < 1e-12);
                prop_assert!((batch[i] - reordered[i]).abs() < 1e-12);
            }
            prop_assert!(check_prob_vector(&batch).is_ok());
        }

        #[test]
        fn independent_priors_factorize(seed in any::<u64>()) {
            let mut rng = RngStream::new(seed);
            let m0 = (vec![0.2, 0.5, 0.8], vec![0.3, 0.3, 0.4]);
            let m1 = (vec![0.1, 0.6], vec![0.5, 0.5]);
            let joint = FinitePrior::product(&[m0.clone(), m1.clone()]).unwrap();
            let pairs = random_pairs(&mut rng, 2, 20);
            let post = posterior_from_pairs(&joint, &pairs).unwrap();
            for (arm, marg) in [m0, m1].into_iter().enumerate() {
                let single = FinitePrior::new(marg.0.iter().map(|v| vec![*v]).collect(), marg.1.clone()).unwrap();
                let projected: Vec<_> = pairs.iter().filter(|p| p.0 == arm).map(|p| (0, p.1)).collect();
                let direct = posterior_from_pairs(&single, &projected).unwrap();
                for (j, v) in marg.0.iter().enumerate() {
                    let from_joint: f64 = joint.support().iter().zip(&post).filter(|(mu, _)| mu[arm] == *v).map(|(_, p)| p).sum();
                    prop_assert!((from_joint - direct[j]).abs() < 1e-12);
                }
            }
        }
    }
}
