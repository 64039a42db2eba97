use super::{rescale_budgets, solve_bwk_lp, BwkInstance, LpSolution, OutcomeMatrix};
use crate::adversarial::{exp3, Exp4, Hedge, IdentityExperts};
use crate::episode::{Agent, ArmIndex, Feedback, FeedbackKind, Round};
use crate::error::{config_err, Result};
use crate::rng::RngStream;

/// `gamma = min(0.49, sqrt(K ln K / T))`.
pub fn lagrange_primal_gamma(k: usize, horizon: usize) -> f64 {
    let k = k as f64;
    (k * k.ln() / horizon as f64).sqrt().min(0.49)
}

/// `eps = sqrt(K / B)` clamped to `[0, 1/2]`.
pub fn ucb_bwk_eps(k: usize, budget: f64) -> f64 {
    (k as f64 / budget).sqrt().clamp(0.0, 0.5)
}

fn outcome(feedback: &Feedback, d: usize) -> Result<(f64, &[f64])> {
    match feedback {
        Feedback::OutcomeRow { reward, consumption } if consumption.len() == d => Ok((*reward, consumption)),
        other => Err(config_err!("expected an outcome row with {d} resources, got {other:?}")),
    }
}

/// Repeated Lagrange game: EXP3 picks arms (bandit feedback), Hedge picks
/// resources (full feedback), both on the payoff `L_t(a, i)` rescaled from
/// `[1 - T/B, 2]` to `[0, 1]`. The dual's last action is the time resource.
pub struct LagrangeBwK {
    primal: Exp4<IdentityExperts>,
    dual: Hedge,
    d: usize,
    ratio: f64,
    resource: usize,
    last_dual_payoffs: Vec<f64>,
}

impl LagrangeBwK {
    pub fn new(inst: &BwkInstance) -> Result<Self> {
        let inst = rescale_budgets(inst);
        let (k, t) = (inst.num_arms(), inst.horizon());
        let d = inst.num_resources();
        Ok(Self {
            primal: exp3(k, lagrange_primal_gamma(k, t), t)?,
            dual: Hedge::for_horizon(d + 1, t)?,
            d,
            ratio: t as f64 / inst.budget(),
            resource: 0,
            last_dual_payoffs: Vec::new(),
        })
    }

    /// Payoff range `[1 - T/B, 2]`.
    pub fn payoff_range(&self) -> (f64, f64) {
        (1.0 - self.ratio, 2.0)
    }

    fn scale(&self, l: f64) -> f64 {
        let (a, b) = self.payoff_range();
        (l - a) / (b - a)
    }

    /// Unscaled `L_t(a_t, i)` for every resource `i` (time last) from the latest round.
    pub fn last_dual_payoffs(&self) -> &[f64] {
        &self.last_dual_payoffs
    }

    pub fn resource(&self) -> usize {
        self.resource
    }

    pub fn dual_distribution(&self) -> Vec<f64> {
        self.dual.weights().probs()
    }
}

impl Agent for LagrangeBwK {
    fn num_arms(&self) -> usize {
        self.primal.num_arms()
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Outcome
    }

    fn act(&mut self, round: &Round, rng: &mut RngStream) -> ArmIndex {
        self.resource = self.dual.act(round, rng);
        self.primal.act(round, rng)
    }

    fn observe(&mut self, round: &Round, arm: ArmIndex, feedback: &Feedback, rng: &mut RngStream) -> Result<()> {
        let (r, c) = outcome(feedback, self.d)?;
        let mut payoffs: Vec<f64> = c.iter().map(|ci| r + 1.0 - self.ratio * ci).collect();
        payoffs.push(r);
        let scaled: Vec<f64> = payoffs.iter().map(|l| self.scale(*l)).collect();
        self.primal.observe(round, arm, &Feedback::BanditReward(scaled[self.resource]), rng)?;
        self.dual.observe(round, self.resource, &Feedback::FullCosts(scaled), rng)?;
        self.last_dual_payoffs = payoffs;
        Ok(())
    }
}

/// Optimism for BwK: pull each arm once, then sample from the LP optimum with
/// upper confidence rewards, lower confidence consumption and budget `B(1 - eps)`.
pub struct UcbBwk {
    k: usize,
    d: usize,
    horizon: usize,
    shrunk_budget: f64,
    scale: f64,
    pulls: Vec<u64>,
    sums: Vec<Vec<f64>>,
}

impl UcbBwk {
    pub fn new(inst: &BwkInstance) -> Result<Self> {
        Self::with_confidence_scale(inst, 1.0)
    }

    /// Confidence radius `scale * sqrt(2 ln T / n)`; scale 0 trusts the empirical means.
    pub fn with_confidence_scale(inst: &BwkInstance, scale: f64) -> Result<Self> {
        let inst = rescale_budgets(inst);
        if !(scale >= 0.0) {
            return Err(config_err!("confidence scale must be nonnegative"));
        }
        let b = inst.budget();
        let (k, d) = (inst.num_arms(), inst.num_resources());
        Ok(Self {
            k,
            d,
            horizon: inst.horizon(),
            shrunk_budget: b * (1.0 - ucb_bwk_eps(k, b)),
            scale,
            pulls: vec![0; k],
            sums: vec![vec![0.0; d + 1]; k],
        })
    }

    pub fn shrunk_budget(&self) -> f64 {
        self.shrunk_budget
    }

    /// Optimistic outcome matrix from the current statistics.
    pub fn optimistic_matrix(&self) -> OutcomeMatrix {
        let ln_t = (self.horizon.max(2) as f64).ln();
        let rows = (0..self.k)
            .map(|a| {
                let n = self.pulls[a];
                let rad = if n == 0 { f64::INFINITY } else { self.scale * (2.0 * ln_t / n as f64).sqrt() };
                let mean = |j: usize| if n == 0 { 0.0 } else { self.sums[a][j] / n as f64 };
                let mut row = vec![(mean(0) + rad).min(1.0)];
                row.extend((1..=self.d).map(|j| (mean(j) - rad).max(0.0)));
                row
            })
            .collect();
        OutcomeMatrix::new(rows).expect("entries clamped to [0,1]")
    }

    pub fn optimistic_lp(&self) -> Result<LpSolution> {
        solve_bwk_lp(&self.optimistic_matrix(), self.shrunk_budget, self.horizon)
    }
}

impl Agent for UcbBwk {
    fn num_arms(&self) -> usize {
        self.k
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Outcome
    }

    fn act(&mut self, _: &Round, rng: &mut RngStream) -> ArmIndex {
        if let Some(a) = self.pulls.iter().position(|n| *n == 0) {
            return a;
        }
        let lp = self.optimistic_lp().expect("a zero-consumption arm keeps the LP feasible");
        rng.categorical(&lp.dist)
    }

    fn observe(&mut self, _: &Round, arm: ArmIndex, feedback: &Feedback, _: &mut RngStream) -> Result<()> {
        let (r, c) = outcome(feedback, self.d)?;
        self.pulls[arm] += 1;
        self.sums[arm][0] += r;
        for (s, x) in self.sums[arm][1..].iter_mut().zip(c) {
            *s += x;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bwk::{pricing_env, run_bwk, OutcomeMatrix};
    use approx::assert_abs_diff_eq;

    fn single_resource(t: usize) -> BwkInstance {
        let m = OutcomeMatrix::new(vec![vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        BwkInstance::deterministic(&m, vec![t as f64 / 2.0], t).unwrap()
    }

    #[test]
    fn eps_clamp() {
        assert_eq!(ucb_bwk_eps(4, 4.0), 0.5);
        assert_abs_diff_eq!(ucb_bwk_eps(4, 400.0), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn lagrange_range() {
        let a = LagrangeBwK::new(&single_resource(100)).unwrap();
        assert_eq!(a.payoff_range(), (-1.0, 2.0));
    }

    #[test]
    fn zero_consumption_never_stops() {
        let m = OutcomeMatrix::new(vec![vec![0.7, 0.0], vec![0.2, 0.0], vec![0.0, 0.0]]).unwrap();
        let inst = BwkInstance::deterministic(&m, vec![10.0], 300).unwrap();
        let run = run_bwk(&inst, &mut LagrangeBwK::new(&inst).unwrap(), &RngStream::new(0)).unwrap();
        assert_eq!((run.stopped_at, run.rounds()), (None, 300));
    }

    #[test]
    fn dual_feedback_is_lagrangian_of_revealed_row() {
        let inst = single_resource(100);
        let mut agent = LagrangeBwK::new(&inst).unwrap();
        let mut rng = RngStream::new(1);
        let round = Round::plain(1);
        let a = agent.act(&round, &mut rng);
        let fb = Feedback::OutcomeRow { reward: 1.0, consumption: vec![1.0] };
        agent.observe(&round, a, &fb, &mut rng).unwrap();
        assert_eq!(agent.last_dual_payoffs(), &[1.0 + 1.0 - 2.0, 1.0]);
    }

    #[test]
    fn lagrange_single_resource_band() {
        let t = 2000;
        let inst = single_resource(t);
        for seed in 0..20 {
            let run = run_bwk(&inst, &mut LagrangeBwK::new(&inst).unwrap(), &RngStream::new(seed)).unwrap();
            assert!(run.rounds() >= t / 2, "stopped at {}", run.rounds());
            assert!(run.adjusted_reward >= 0.5 * (t as f64 / 2.0));
            assert!(run.adjusted_reward <= t as f64 / 2.0 + 1.0);
        }
    }

    #[test]
    fn zero_width_matches_exact_lp() {
        let m = OutcomeMatrix::new(vec![vec![0.9, 0.8], vec![0.5, 0.2], vec![0.0, 0.0]]).unwrap();
        let inst = BwkInstance::deterministic(&m, vec![300.0], 1000).unwrap();
        let mut agent = UcbBwk::with_confidence_scale(&inst, 0.0).unwrap();
        let mut rng = RngStream::new(0);
        for t in 1..=10 {
            let round = Round::plain(t);
            let a = agent.act(&round, &mut rng);
            let row = m.row(a);
            agent
                .observe(&round, a, &Feedback::OutcomeRow { reward: row[0], consumption: row[1..].to_vec() }, &mut rng)
                .unwrap();
        }
        let want = solve_bwk_lp(&m, agent.shrunk_budget(), 1000).unwrap();
        let got = agent.optimistic_lp().unwrap();
        for (g, w) in got.dist.iter().zip(&want.dist) {
            assert_abs_diff_eq!(g, w, epsilon = 1e-12);
        }
        assert_eq!(got.binding, want.binding);
    }

    #[test]
    fn optimism_dominates_truth() {
        let values = vec![(0.3, 0.4), (0.6, 0.3), (0.9, 0.3)];
        let inst = pricing_env(&values, &[0.2, 0.5, 0.8, 1.0], 200.0, 1000).unwrap();
        let mut agent = UcbBwk::new(&inst).unwrap();
        let run = run_bwk(&inst, &mut agent, &RngStream::new(3)).unwrap();
        let truth = solve_bwk_lp(&inst.expected(), agent.shrunk_budget(), 1000).unwrap();
        let opt = agent.optimistic_matrix();
        let m = inst.expected();
        let inside = (0..m.num_arms()).all(|a| opt.reward(a) >= m.reward(a) && opt.consumption(a, 0) <= m.consumption(a, 0));
        if inside {
            assert!(agent.optimistic_lp().unwrap().value >= truth.value - 1e-12);
        }
        let lp = inst.lp().unwrap();
        assert!(run.adjusted_reward <= 1000.0 * lp.value + 2.0 * (1000f64 * 1000f64.ln()).sqrt());
    }
}
