//! Seed-sweep checks of the statistical examples: regret bands, unbiasedness
//! and frequency bounds, each against a bound computed here.

use banditlab::adversarial::{exp3, exp3_crude_gamma, Hedge};
use banditlab::bayes::{ThompsonPriorFree, TsMode};
use banditlab::bwk::{run_bwk, BwkInstance, LagrangeBwK, OutcomeMatrix, UcbBwk};
use banditlab::contextual::{all_deterministic_policies, exp4_policies, ContextSchedule, FiniteContextEnv};
use banditlab::episode::{run_episode, Agent};
use banditlab::games::{repeated_game, GameFeedback, GameMatrix};
use banditlab::harness::fixtures::{best_arm_id_experiment, coin_decision_experiment};
use banditlab::incentives::{BayesianGreedy, Sampled, TwoArmPrior};
use banditlab::par::{map_seeds, mean_and_stderr, seed_range};
use banditlab::stochastic::{StochasticEnv, Ucb1};
use banditlab::{Result, RngStream};

fn pseudo_regret(means: &[f64], agent: &mut dyn Agent, horizon: usize, seed: u64) -> f64 {
    let mut env = StochasticEnv::bernoulli(means).unwrap();
    let ep = run_episode(&mut env, agent, horizon, &RngStream::new(seed)).unwrap();
    ep.report.pseudo_regret.unwrap()
}

#[test]
fn exp3_regret_band() {
    let (t, k) = (10_000, 5);
    // costs 0.4 on the best arm and 0.6 elsewhere
    let means = [0.6, 0.4, 0.4, 0.4, 0.4];
    let gamma = exp3_crude_gamma(k, k, t);
    let rs = map_seeds(&seed_range(50), |s| pseudo_regret(&means, &mut exp3(k, gamma, t).unwrap(), t, s));
    let (m, _) = mean_and_stderr(&rs);
    let band = 10.0 * (t as f64 * k as f64 * (k as f64).ln()).sqrt();
    assert!(m <= band, "mean regret {m} > {band}");
}

#[test]
fn exp4_policies_regret_band() {
    let t = 5000;
    let means = vec![vec![0.3, 0.7], vec![0.6, 0.2]];
    let policies = all_deterministic_policies(2, 2);
    let n = policies.len() as f64;
    let gamma = exp3_crude_gamma(2, policies.len(), t);
    let rs = map_seeds(&seed_range(100), |s| {
        let mut env = FiniteContextEnv::new(means.clone(), ContextSchedule::Iid(vec![0.5, 0.5])).unwrap();
        let mut agent = exp4_policies(2, policies.clone(), gamma, None, t).unwrap();
        run_episode(&mut env, &mut agent, t, &RngStream::new(s)).unwrap().report.pseudo_regret.unwrap()
    });
    let (m, _) = mean_and_stderr(&rs);
    let band = 10.0 * (2.0 * t as f64 * n.ln()).sqrt();
    assert!(m <= band, "mean regret {m} > {band}");
}

#[test]
fn thompson_beats_ucb1_on_paired_seeds() {
    let (t, means) = (5000, [0.6, 0.4]);
    let seeds = seed_range(100);
    let ts = map_seeds(&seeds, |s| pseudo_regret(&means, &mut ThompsonPriorFree::new(2, TsMode::BetaBernoulli).unwrap(), t, s));
    let ucb = map_seeds(&seeds, |s| pseudo_regret(&means, &mut Ucb1::new(2, t).unwrap(), t, s));
    assert!(mean_and_stderr(&ts).0 < mean_and_stderr(&ucb).0);
}

#[test]
fn best_arm_identification() {
    let make = |k, t| -> Result<Box<dyn Agent>> { Ok(Box::new(Ucb1::new(k, t)?)) };
    let eps: f64 = 0.3;
    let t = (10.0 * 2.0 / (eps * eps)).ceil() as usize;
    let seeds = seed_range(500);
    let r = best_arm_id_experiment(make, 2, eps, t, &seeds).unwrap();
    assert!(r.error_rate < 0.05, "{r:?}");
    assert_eq!(best_arm_id_experiment(make, 2, eps, t, &seeds).unwrap(), r);

    // identical arms: the prediction is a coin flip against the planted label
    let z = best_arm_id_experiment(make, 2, 0.0, t, &seeds).unwrap();
    assert!((z.error_rate - 0.5).abs() <= 3.0 * z.stderr, "{z:?}");
}

#[test]
fn coin_rule_error_rates() {
    let r = coin_decision_experiment(400, 0.4, &seed_range(1000)).unwrap();
    assert!(r.high_given_fair < 0.01 && r.low_given_biased < 0.01, "{r:?}");
}

#[test]
fn bayesian_greedy_often_never_explores() {
    let prior = TwoArmPrior::new(vec![[0.3, 0.5], [0.9, 0.5]], vec![0.5, 0.5]).unwrap();
    let never: Vec<f64> = map_seeds(&seed_range(5000), |s| {
        let root = RngStream::new(s);
        let mu = prior.sample(&mut root.substream("prior"));
        let mut env = StochasticEnv::bernoulli(&mu).unwrap();
        let mut agent = Sampled::for_prior(BayesianGreedy::new(prior.clone()), &prior);
        let ep = run_episode(&mut env, &mut agent, 30, &root).unwrap();
        f64::from(u8::from(ep.history.arms().iter().all(|&a| a == 0)))
    });
    let (freq, se) = mean_and_stderr(&never);
    let [m1, m2] = prior.mean();
    assert!(freq >= m1 - m2 - 3.0 * se, "frequency {freq} (se {se})");
}

#[test]
fn bwk_single_resource_band() {
    let (t, b) = (400usize, 200.0);
    let m = OutcomeMatrix::new(vec![vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
    let inst = BwkInstance::deterministic(&m, vec![b], t).unwrap();
    let lagrange = |i: &BwkInstance| -> Box<dyn Agent> { Box::new(LagrangeBwK::new(i).unwrap()) };
    let ucb = |i: &BwkInstance| -> Box<dyn Agent> { Box::new(UcbBwk::new(i).unwrap()) };
    for (name, make) in [("lagrange", &lagrange as &dyn Fn(&BwkInstance) -> Box<dyn Agent>), ("ucb-bwk", &ucb)] {
        for seed in 0..20 {
            let mut agent = make(&inst);
            let run = run_bwk(&inst, agent.as_mut(), &RngStream::new(seed)).unwrap();
            let stop = run.stopped_at.unwrap_or(t + 1);
            assert!(stop as f64 >= b, "{name} seed {seed}: stopped at {stop}");
            assert!(
                run.adjusted_reward >= 0.5 * b && run.adjusted_reward <= b + 1.0,
                "{name} seed {seed}: reward {}",
                run.adjusted_reward
            );
        }
    }
}

#[test]
fn duality_gap_shrinks_with_horizon() {
    let m = GameMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let gap = |t: usize, seed: u64| {
        let mut row = Hedge::for_horizon(2, t).unwrap();
        let mut col = Hedge::for_horizon(2, t).unwrap();
        repeated_game(&mut row, &mut col, &m, t, GameFeedback::Full, &RngStream::new(seed)).unwrap().report().duality_gap
    };
    let short: Vec<f64> = (0..10).map(|s| gap(1000, s)).collect();
    let long: Vec<f64> = (0..10).map(|s| gap(10_000, s)).collect();
    assert!(mean_and_stderr(&long).0 <= mean_and_stderr(&short).0, "{long:?} vs {short:?}");
}
