//! EXP4: Hedge over experts fed inverse-propensity fake costs, with uniform
//! exploration mixed in. EXP3 is EXP4 with one expert per arm.

use super::{hedge_eps_unbounded, WeightState};
use crate::episode::{Agent, ArmIndex, Feedback, FeedbackKind, Round};
use crate::error::{config_err, domain_err, Result};
use crate::rng::RngStream;

/// Experts whose recommendations depend only on the round and its public context.
pub trait ExpertSet {
    fn num_experts(&self) -> usize;
    fn num_arms(&self) -> usize;
    fn recommend(&self, round: &Round) -> Vec<ArmIndex>;
}

/// Expert `e` always recommends arm `e`.
#[derive(Debug, Clone, Copy)]
pub struct IdentityExperts(pub usize);

impl ExpertSet for IdentityExperts {
    fn num_experts(&self) -> usize {
        self.0
    }
    fn num_arms(&self) -> usize {
        self.0
    }
    fn recommend(&self, _: &Round) -> Vec<ArmIndex> {
        (0..self.0).collect()
    }
}

/// Precomputed recommendations `recs[t - 1][e]`.
#[derive(Debug, Clone)]
pub struct ExpertTable {
    k: usize,
    recs: Vec<Vec<ArmIndex>>,
}

impl ExpertTable {
    pub fn new(k: usize, recs: Vec<Vec<ArmIndex>>) -> Result<Self> {
        let n = recs.first().map(Vec::len).unwrap_or(0);
        if n == 0 || recs.iter().any(|r| r.len() != n) {
            return Err(config_err!("expert table needs equal, non-empty rows"));
        }
        if recs.iter().flatten().any(|&a| a >= k) {
            return Err(config_err!("expert table recommends an arm outside 0..{k}"));
        }
        Ok(Self { k, recs })
    }
}

impl ExpertSet for ExpertTable {
    fn num_experts(&self) -> usize {
        self.recs[0].len()
    }
    fn num_arms(&self) -> usize {
        self.k
    }
    fn recommend(&self, round: &Round) -> Vec<ArmIndex> {
        self.recs[(round.t - 1).min(self.recs.len() - 1)].clone()
    }
}

/// `q(a) = (1 - gamma) * sum_{e -> a} p(e) + gamma / K`.
pub fn exp4_propensities(recs: &[ArmIndex], p: &[f64], gamma: f64, k: usize) -> Vec<f64> {
    let mut q = vec![gamma / k as f64; k];
    for (&a, &pe) in recs.iter().zip(p) {
        q[a] += (1.0 - gamma) * pe;
    }
    q
}

/// Fake cost of every expert: `cost / q(arm)` for experts that recommended `arm`, else 0.
pub fn exp4_fake_costs(recs: &[ArmIndex], q: &[f64], arm: ArmIndex, cost: f64) -> Vec<f64> {
    recs.iter().map(|&a| if a == arm { cost / q[arm] } else { 0.0 }).collect()
}

/// `T^(-1/3) (K ln N)^(1/3)`.
pub fn exp3_crude_gamma(k: usize, n: usize, horizon: usize) -> f64 {
    (horizon as f64).powf(-1.0 / 3.0) * (k as f64 * (n as f64).ln()).cbrt()
}

#[derive(Debug, Clone)]
pub struct Exp4<E: ExpertSet> {
    experts: E,
    hedge: WeightState,
    gamma: f64,
    recs: Vec<ArmIndex>,
    q: Vec<f64>,
    max_fake_cost: f64,
}

impl<E: ExpertSet> Exp4<E> {
    /// `eps = None` selects `sqrt(ln N / (3 U))` with `U = T K / (1 - gamma)`.
    pub fn new(experts: E, gamma: f64, eps: Option<f64>, horizon: usize) -> Result<Self> {
        if !(0.0..0.5).contains(&gamma) {
            return Err(domain_err!("EXP4 needs gamma in [0, 1/2), got {gamma}"));
        }
        let (n, k) = (experts.num_experts(), experts.num_arms());
        if n == 0 || k == 0 {
            return Err(config_err!("EXP4 needs at least one expert and one arm"));
        }
        let eps = eps.unwrap_or_else(|| hedge_eps_unbounded(n, horizon as f64 * k as f64 / (1.0 - gamma)));
        Ok(Self {
            experts,
            hedge: WeightState::new(n, eps)?,
            gamma,
            recs: Vec::new(),
            q: Vec::new(),
            max_fake_cost: 0.0,
        })
    }

    pub fn expert_distribution(&self) -> Vec<f64> {
        self.hedge.probs()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn eps(&self) -> f64 {
        self.hedge.eps()
    }

    /// Largest fake cost fed to Hedge so far.
    pub fn max_fake_cost(&self) -> f64 {
        self.max_fake_cost
    }

    pub fn experts(&self) -> &E {
        &self.experts
    }

    fn propensities(&self, round: &Round) -> (Vec<ArmIndex>, Vec<f64>) {
        let recs = self.experts.recommend(round);
        let q = exp4_propensities(&recs, &self.hedge.probs(), self.gamma, self.experts.num_arms());
        (recs, q)
    }
}

impl<E: ExpertSet> Agent for Exp4<E> {
    fn num_arms(&self) -> usize {
        self.experts.num_arms()
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Bandit
    }

    fn act(&mut self, round: &Round, rng: &mut RngStream) -> ArmIndex {
        let (recs, q) = self.propensities(round);
        let arm = if rng.bernoulli(self.gamma) {
            rng.index(self.experts.num_arms())
        } else {
            recs[rng.categorical(&self.hedge.probs())]
        };
        self.recs = recs;
        self.q = q;
        arm
    }

    fn observe(&mut self, _: &Round, arm: ArmIndex, feedback: &Feedback, _: &mut RngStream) -> Result<()> {
        let r = match feedback {
            Feedback::BanditReward(r) => *r,
            other => return Err(config_err!("EXP4 needs bandit feedback, got {other:?}")),
        };
        let fake = exp4_fake_costs(&self.recs, &self.q, arm, 1.0 - r);
        self.max_fake_cost = fake.iter().cloned().fold(self.max_fake_cost, f64::max);
        self.hedge.update(&fake)
    }

    fn action_distribution(&self, round: &Round) -> Option<Vec<f64>> {
        Some(self.propensities(round).1)
    }
}

/// EXP3 with exploration `gamma` (pass `exp3_crude_gamma(K, K, T)` for the crude tuning).
pub fn exp3(k: usize, gamma: f64, horizon: usize) -> Result<Exp4<IdentityExperts>> {
    Exp4::new(IdentityExperts(k), gamma, None, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversarial::CostTableEnv;
    use crate::episode::run_episode;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn exp3_fake_cost_is_ips() {
        let p = [0.2, 0.5, 0.3];
        let q = exp4_propensities(&[0, 1, 2], &p, 0.3, 3);
        let c = exp4_fake_costs(&[0, 1, 2], &q, 1, 0.4);
        assert_abs_diff_eq!(c[1], 0.4 / q[1], epsilon = 1e-15);
        assert_eq!((c[0], c[2]), (0.0, 0.0));
    }

    #[test]
    fn single_arm_fake_cost_is_cost() {
        let q = exp4_propensities(&[0, 0], &[0.4, 0.6], 0.2, 1);
        assert_abs_diff_eq!(q[0], 1.0, epsilon = 1e-15);
        assert_eq!(exp4_fake_costs(&[0, 0], &q, 0, 0.7), vec![0.7, 0.7]);
    }

    #[test]
    fn crude_gamma_value() {
        assert_abs_diff_eq!(exp3_crude_gamma(5, 5, 1000), 0.1 * (5.0 * 5f64.ln()).cbrt(), epsilon = 1e-12);
    }

    #[test]
    fn gamma_range_checked() {
        assert!(exp3(3, 0.5, 100).is_err());
        assert!(exp3(3, 0.0, 100).is_ok());
    }

    proptest! {
        #[test]
        fn fake_costs_unbiased(seed in any::<u64>(), k in 1usize..5, n in 1usize..6, gamma in 0.0f64..0.49) {
            let mut rng = RngStream::new(seed);
            let recs: Vec<ArmIndex> = (0..n).map(|_| rng.index(k)).collect();
            let w: Vec<f64> = (0..n).map(|_| rng.uniform() + 0.01).collect();
            let s: f64 = w.iter().sum();
            let p: Vec<f64> = w.iter().map(|x| x / s).collect();
            let costs: Vec<f64> = (0..k).map(|_| rng.uniform()).collect();
            let q = exp4_propensities(&recs, &p, gamma, k);
            prop_assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let mut expect = vec![0.0; n];
            for a in 0..k {
                if q[a] == 0.0 { continue; }
                for (e, c) in exp4_fake_costs(&recs, &q, a, costs[a]).into_iter().enumerate() {
                    expect[e] += q[a] * c;
                }
            }
            for e in 0..n {
                prop_assert!((expect[e] - costs[recs[e]]).abs() < 1e-12);
            }
            if gamma > 0.0 {
                prop_assert!(q.iter().all(|&x| x >= gamma / k as f64 - 1e-15));
            }
        }

        #[test]
        fn fake_costs_bounded_by_k_over_gamma(seed in any::<u64>(), gamma in 0.05f64..0.45) {
            let mut rng = RngStream::new(seed);
            let mut env = CostTableEnv::random_uniform(300, 4, FeedbackKind::Bandit, &mut rng).unwrap();
            let mut a = exp3(4, gamma, 300).unwrap();
            run_episode(&mut env, &mut a, 300, &rng).unwrap();
            prop_assert!(a.max_fake_cost() <= 4.0 / gamma + 1e-9);
        }
    }
}
