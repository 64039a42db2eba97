use crate::adversarial::{Exp4, ExpertSet};
use crate::episode::{Agent, ArmIndex, Context, Feedback, FeedbackKind, Round};
use crate::error::{config_err, domain_err, Result};
use crate::rng::RngStream;

/// Deterministic map from context ids to arms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Policy(Vec<ArmIndex>);

impl Policy {
    pub fn new(table: Vec<ArmIndex>, k: usize) -> Result<Self> {
        if table.is_empty() {
            return Err(config_err!("policy table is empty"));
        }
        if let Some(a) = table.iter().find(|a| **a >= k) {
            return Err(config_err!("policy arm {a} out of range for {k} arms"));
        }
        Ok(Self(table))
    }

    pub fn constant(arm: ArmIndex, num_contexts: usize) -> Self {
        Self(vec![arm; num_contexts])
    }

    /// Panics when `x` is outside the context set.
    pub fn arm(&self, x: usize) -> ArmIndex {
        self.0[x]
    }

    pub fn num_contexts(&self) -> usize {
        self.0.len()
    }

    pub fn table(&self) -> &[ArmIndex] {
        &self.0
    }
}

/// All `K^n` deterministic policies in lexicographic order of their tables.
pub fn all_deterministic_policies(num_contexts: usize, k: usize) -> Vec<Policy> {
    let mut out = vec![Vec::new()];
    for _ in 0..num_contexts {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<ArmIndex>| {
                (0..k).map(move |a| {
                    let mut p = prefix.clone();
                    p.push(a);
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(Policy).collect()
}

fn context_id(round: &Round) -> usize {
    match round.context {
        Context::Id(x) => x,
        Context::None => 0,
        ref other => panic!("policies need context ids, got {other:?}"),
    }
}

/// A policy class used as an expert set: expert `i` recommends `pi_i(x_t)`.
#[derive(Debug, Clone)]
pub struct PolicyExperts {
    k: usize,
    policies: Vec<Policy>,
}

impl PolicyExperts {
    pub fn new(k: usize, policies: Vec<Policy>) -> Result<Self> {
        if policies.is_empty() || k == 0 {
            return Err(config_err!("need at least one policy and one arm"));
        }
        let n = policies[0].num_contexts();
        if policies.iter().any(|p| p.num_contexts() != n || p.table().iter().any(|a| *a >= k)) {
            return Err(config_err!("policies must share a context set and use arms below {k}"));
        }
        Ok(Self { k, policies })
    }

    pub fn policies(&self) -> &[Policy] {
        &self.policies
    }
}

impl ExpertSet for PolicyExperts {
    fn num_experts(&self) -> usize {
        self.policies.len()
    }

    fn num_arms(&self) -> usize {
        self.k
    }

    fn recommend(&self, round: &Round) -> Vec<ArmIndex> {
        let x = context_id(round);
        self.policies.iter().map(|p| p.arm(x)).collect()
    }
}

/// EXP4 over an explicit policy class.
pub fn exp4_policies(k: usize, policies: Vec<Policy>, gamma: f64, eps: Option<f64>, horizon: usize) -> Result<Exp4<PolicyExperts>> {
    Exp4::new(PolicyExperts::new(k, policies)?, gamma, eps, horizon)
}

/// `argmax_pi sum_t r_t(pi(x_t))` by exhaustive scan; ties go to the earliest policy.
pub fn exact_classification_oracle(points: &[(usize, Vec<f64>)], policies: &[Policy]) -> Result<usize> {
    if points.is_empty() || policies.is_empty() {
        return Err(domain_err!("classification oracle needs data and at least one policy"));
    }
    let mut best = (0, f64::NEG_INFINITY);
    for (i, pi) in policies.iter().enumerate() {
        let v: f64 = points.iter().map(|(x, r)| r[pi.arm(*x)]).sum();
        if v > best.1 {
            best = (i, v);
        }
    }
    Ok(best.0)
}

/// `N = T^(2/3) (K ln(|Pi| T))^(1/3)`, floored and clamped to `[1, T]`.
pub fn default_explore_rounds(horizon: usize, k: usize, num_policies: usize) -> usize {
    let t = horizon as f64;
    let n = t.powf(2.0 / 3.0) * (k as f64 * (num_policies as f64 * t).ln()).cbrt();
    (n.floor() as usize).clamp(1, horizon.max(1))
}

/// Uniform exploration for `N` rounds, one oracle call on the IPS fake
/// rewards `r K 1{a = a_t}`, then the returned policy forever.
pub struct ExploreThenExploit {
    k: usize,
    n: usize,
    policies: Vec<Policy>,
    data: Vec<(usize, Vec<f64>)>,
    chosen: Option<usize>,
}

impl ExploreThenExploit {
    pub fn new(k: usize, n: usize, policies: Vec<Policy>) -> Result<Self> {
        let experts = PolicyExperts::new(k, policies)?;
        if n == 0 {
            return Err(config_err!("exploration length must be positive"));
        }
        Ok(Self {
            k,
            n,
            policies: experts.policies,
            data: Vec::new(),
            chosen: None,
        })
    }

    pub fn with_default_rounds(k: usize, horizon: usize, policies: Vec<Policy>) -> Result<Self> {
        let n = default_explore_rounds(horizon, k, policies.len());
        Self::new(k, n, policies)
    }

    pub fn explore_rounds(&self) -> usize {
        self.n
    }

    /// Exploration data fed to the oracle.
    pub fn data(&self) -> &[(usize, Vec<f64>)] {
        &self.data
    }

    /// Index of the policy returned by the oracle, once called.
    pub fn chosen(&self) -> Option<usize> {
        self.chosen
    }

    pub fn policies(&self) -> &[Policy] {
        &self.policies
    }
}

impl Agent for ExploreThenExploit {
    fn num_arms(&self) -> usize {
        self.k
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Bandit
    }

    fn act(&mut self, round: &Round, rng: &mut RngStream) -> ArmIndex {
        match self.chosen {
            Some(i) => self.policies[i].arm(context_id(round)),
            None => rng.index(self.k),
        }
    }

    fn observe(&mut self, round: &Round, arm: ArmIndex, feedback: &Feedback, _: &mut RngStream) -> Result<()> {
        if self.chosen.is_some() {
            return Ok(());
        }
        let Feedback::BanditReward(r) = feedback else {
            return Err(config_err!("explore-then-exploit needs bandit feedback"));
        };
        let mut fake = vec![0.0; self.k];
        fake[arm] = r * self.k as f64;
        self.data.push((context_id(round), fake));
        if self.data.len() >= self.n {
            self.chosen = Some(exact_classification_oracle(&self.data, &self.policies)?);
        }
        Ok(())
    }

    fn action_distribution(&self, round: &Round) -> Option<Vec<f64>> {
        Some(match self.chosen {
            Some(i) => {
                let mut p = vec![0.0; self.k];
                p[self.policies[i].arm(context_id(round))] = 1.0;
                p
            }
            None => vec![1.0 / self.k as f64; self.k],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contextual::{ContextSchedule, FiniteContextEnv};
    use crate::episode::run_episode;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn enumeration() {
        let ps = all_deterministic_policies(2, 3);
        assert_eq!(ps.len(), 9);
        assert_eq!(ps[0].table(), &[0, 0]);
        assert_eq!(ps[5].table(), &[1, 2]);
    }

    #[test]
    fn default_rounds_formula() {
        let n = default_explore_rounds(1000, 2, 4);
        let want = 100.0 * (2.0 * 4000f64.ln()).cbrt();
        assert_eq!(n, want.floor() as usize);
    }

    #[test]
    fn fake_reward_scaled_by_k() {
        let mut agent = ExploreThenExploit::new(4, 10, vec![Policy::constant(0, 1)]).unwrap();
        let mut rng = RngStream::new(0);
        let round = Round { t: 1, context: Context::Id(0) };
        agent.observe(&round, 2, &Feedback::BanditReward(1.0), &mut rng).unwrap();
        assert_eq!(agent.data()[0].1, vec![0.0, 0.0, 4.0, 0.0]);
    }

    #[test]
    fn single_policy_followed_without_exploration() {
        let p = Policy::new(vec![1, 0], 2).unwrap();
        let mut agent = exp4_policies(2, vec![p.clone()], 0.0, None, 100).unwrap();
        let mut env = FiniteContextEnv::new(vec![vec![0.5, 0.5], vec![0.2, 0.9]], ContextSchedule::Cycle).unwrap();
        let ep = run_episode(&mut env, &mut agent, 100, &RngStream::new(3)).unwrap();
        for (t, a) in ep.history.arms().iter().enumerate() {
            assert_eq!(*a, p.arm(t % 2));
        }
    }

    #[test]
    fn identical_policies_keep_equal_weights() {
        let p = Policy::new(vec![1, 0], 2).unwrap();
        let q = Policy::new(vec![0, 0], 2).unwrap();
        let mut agent = exp4_policies(2, vec![p.clone(), q, p], 0.1, None, 300).unwrap();
        let mut env = FiniteContextEnv::new(vec![vec![0.5, 0.5], vec![0.2, 0.9]], ContextSchedule::Cycle).unwrap();
        run_episode(&mut env, &mut agent, 300, &RngStream::new(3)).unwrap();
        let w = agent.expert_distribution();
        assert_abs_diff_eq!(w[0], w[2], epsilon = 1e-12);
    }

    #[test]
    fn oracle_single_point() {
        let ps = all_deterministic_policies(2, 3);
        let i = exact_classification_oracle(&[(1, vec![0.0, 0.2, 0.9])], &ps).unwrap();
        assert_eq!(ps[i].arm(1), 2);
        assert_eq!(i, 2);
        assert!(exact_classification_oracle(&[], &ps).is_err());
    }

    #[test]
    fn explore_then_exploit_picks_brute_force_argmax() {
        let means = vec![vec![0.2, 0.8], vec![0.7, 0.3], vec![0.5, 0.6]];
        let ps = all_deterministic_policies(3, 2);
        for seed in 0..20 {
            let mut env = FiniteContextEnv::new(means.clone(), ContextSchedule::Iid(vec![0.3, 0.3, 0.4])).unwrap();
            let mut agent = ExploreThenExploit::new(2, 200, ps.clone()).unwrap();
            run_episode(&mut env, &mut agent, 400, &RngStream::new(seed)).unwrap();
            let values: Vec<f64> = ps
                .iter()
                .map(|p| agent.data().iter().map(|(x, r)| r[p.arm(*x)]).sum())
                .collect();
            let mut best = 0;
            for i in 1..values.len() {
                if values[i] > values[best] {
                    best = i;
                }
            }
            assert_eq!(agent.chosen(), Some(best));
        }
    }

    proptest! {
        #[test]
        fn oracle_matches_scan(
            rows in prop::collection::vec((0usize..3, prop::collection::vec(0u8..5, 3)), 1..12),
        ) {
            let pts: Vec<(usize, Vec<f64>)> =
                rows.into_iter().map(|(x, r)| (x, r.into_iter().map(f64::from).collect())).collect();
            let ps = all_deterministic_policies(3, 3);
            let got = exact_classification_oracle(&pts, &ps).unwrap();
            let score = |p: &Policy| pts.iter().map(|(x, r)| r[p.arm(*x)]).sum::<f64>();
            let top = ps.iter().map(score).fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(score(&ps[got]), top);
            prop_assert!(ps[..got].iter().all(|p| score(p) < top));
        }
    }
}
