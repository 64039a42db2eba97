//! Quick per-topic property checks, runnable from the command line.

use std::fmt;

use super::config::{ExperimentConfig, Spec};
use super::fixtures::{best_arm_id_experiment, coin_decision_experiment};
use super::run_all;
use crate::adversarial::{run_binary_prediction, CostTableEnv, Hedge, MajorityVote};
use crate::bayes::{FinitePosterior, FinitePrior};
use crate::bwk::{run_bwk, solve_bwk_lp, BwkInstance, LagrangeBwK, OutcomeMatrix};
use crate::concentration::{coin_kl, kl_divergence, tv_distance, CoinDirection};
use crate::contextual::{all_deterministic_policies, collect_log, ips_estimate, ContextSchedule, FiniteContextEnv};
use crate::episode::{Agent, FeedbackKind};
use crate::error::{config_err, Result};
use crate::games::{approx_nash_check, cce_check, repeated_game, GameFeedback, GameMatrix};
use crate::incentives::{bic_epsilon_bound, bic_verify, BicMode, BicParams, ConstantArm, RepeatedHiddenExploration, TwoArmPrior};
use crate::linear::{bpl_diagnostic, ftl_instance, ActionFamily, Dag, Fpl};
use crate::lipschitz::{ContinuumAgent, ContinuumEnv, Interval1DMetric, TargetEnv, Zooming};
use crate::par::{map_seeds, mean_and_stderr, seed_range};
use crate::rng::RngStream;
use crate::stochastic::Ucb1;

pub const SUITES: &[&str] = &[
    "iid",
    "lower-bounds",
    "bayes",
    "lipschitz",
    "experts",
    "adversarial",
    "linear",
    "contextual",
    "games",
    "bwk",
    "incentives",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {}/{}: {}", if c.pass { "PASS" } else { "FAIL" }, self.name, c.name, c.detail)?;
        }
        Ok(())
    }
}

fn check(name: &str, pass: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        pass,
        detail,
    }
}

pub fn run_suite(name: &str) -> Result<SuiteReport> {
    let checks = match name {
        "iid" => iid()?,
        "lower-bounds" => lower_bounds()?,
        "bayes" => bayes()?,
        "lipschitz" => lipschitz()?,
        "experts" => experts()?,
        "adversarial" => adversarial()?,
        "linear" => linear()?,
        "contextual" => contextual()?,
        "games" => games()?,
        "bwk" => bwk()?,
        "incentives" => incentives()?,
        _ => return Err(config_err!("unknown suite `{name}`; expected one of {SUITES:?}")),
    };
    Ok(SuiteReport {
        name: name.to_string(),
        checks,
    })
}

fn mean_final_regret(env: Spec, agent: Spec, horizon: usize, seeds: u64) -> Result<f64> {
    let c = ExperimentConfig {
        env,
        agent,
        horizon,
        seeds: seed_range(seeds),
        out: None,
    };
    let rs = run_all(&c)?;
    let finals: Vec<f64> = rs.iter().map(|r| r.final_regret().unwrap_or(f64::NAN)).collect();
    Ok(mean_and_stderr(&finals).0)
}

fn iid() -> Result<Vec<Check>> {
    let (k, t) = (2.0, 2000usize);
    let bound = 4.0 * (k * t as f64 * (t as f64).ln()).sqrt();
    let mut out = Vec::new();
    for kind in ["explore-first", "epsilon-greedy", "successive-elimination", "ucb1", "thompson-beta"] {
        let env = Spec::new("env", "bernoulli").with("means", "0.6 0.5");
        let r = mean_final_regret(env, Spec::new("agent", kind), t, 20)?;
        out.push(check(kind, r <= bound, format!("mean pseudo-regret {r:.2} <= {bound:.1}")));
    }
    let c = ExperimentConfig::parse("run.horizon = 300\nrun.seeds = 7\nenv.kind = bernoulli\nenv.means = 0.2 0.5 0.4\nagent.kind = ucb1\n")?;
    let same = run_all(&c)? == run_all(&c)?;
    out.push(check("determinism", same, "identical rows on rerun".into()));
    Ok(out)
}

fn lower_bounds() -> Result<Vec<Check>> {
    let seeds = seed_range(1000);
    let big = coin_decision_experiment(400, 0.4, &seeds)?;
    let small = coin_decision_experiment(4, 0.4, &seeds)?;
    let mut rng = RngStream::new(11);
    let mut pinsker = true;
    for _ in 0..200 {
        let draw = |rng: &mut RngStream| {
            let w: Vec<f64> = (0..10).map(|_| rng.uniform() + 1e-3).collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect::<Vec<_>>()
        };
        let (p, q) = (draw(&mut rng), draw(&mut rng));
        let tv = tv_distance(&p, &q)?;
        pinsker &= 2.0 * tv * tv <= kl_divergence(&p, &q)? + 1e-12;
    }
    let mut coins = true;
    for i in 1..20 {
        let e = 0.49 * i as f64 / 20.0;
        coins &= coin_kl(e, CoinDirection::BiasedVsFair)? <= 2.0 * e * e && coin_kl(e, CoinDirection::FairVsBiased)? <= e * e;
    }
    let make = |k, t| -> Result<Box<dyn Agent>> { Ok(Box::new(Ucb1::new(k, t)?)) };
    let bai = best_arm_id_experiment(make, 2, 0.3, (10.0 * 2.0 / 0.09f64).ceil() as usize, &seed_range(200))?;
    Ok(vec![
        check(
            "coin-large-T",
            big.high_given_fair < 0.01 && big.low_given_biased < 0.01,
            format!("T=400 error rates {:.4}, {:.4}", big.high_given_fair, big.low_given_biased),
        ),
        check(
            "coin-small-T",
            small.high_given_fair > 0.2 && small.low_given_biased > 0.2,
            format!("T=4 error rates {:.3}, {:.3}", small.high_given_fair, small.low_given_biased),
        ),
        check("pinsker", pinsker, "2 TV^2 <= KL on 200 random pairs".into()),
        check("coin-kl", coins, "KL bounds 2 eps^2 and eps^2".into()),
        check("best-arm-id", bai.error_rate < 0.05, format!("UCB1 error rate {:.3}", bai.error_rate)),
    ])
}

fn bayes() -> Result<Vec<Check>> {
    let mut rng = RngStream::new(5);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = 2 + rng.index(4);
        let support: Vec<Vec<f64>> = (0..n).map(|_| (0..2).map(|_| 0.05 + 0.9 * rng.uniform()).collect()).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.uniform() + 0.1).collect();
        let s: f64 = w.iter().sum();
        let prior = FinitePrior::new(support.clone(), w.iter().map(|x| x / s).collect())?;
        let pairs: Vec<(usize, f64)> = (0..8).map(|_| (rng.index(2), f64::from(u8::from(rng.bernoulli(0.5))))).collect();
        let mut post = FinitePosterior::new(prior.clone());
        for &(a, r) in &pairs {
            post.update(a, r)?;
        }
        let batch: Vec<f64> = support
            .iter()
            .zip(prior.probs())
            .map(|(mu, p)| p * pairs.iter().map(|&(a, r)| if r == 1.0 { mu[a] } else { 1.0 - mu[a] }).product::<f64>())
            .collect();
        let z: f64 = batch.iter().sum();
        for (x, y) in post.probs().iter().zip(&batch) {
            worst = worst.max((x - y / z).abs());
        }
    }
    let env = Spec::new("env", "bayes-instance").with("points", "0.2 0.8; 0.7 0.4; 0.5 0.5").with("probs", "0.3 0.3 0.4");
    let ts = mean_final_regret(env, Spec::new("agent", "thompson-finite"), 1000, 20)?;
    let bound = 4.0 * (2.0 * 1000.0 * 1000f64.ln()).sqrt();
    Ok(vec![
        check("sequential-vs-batch", worst <= 1e-12, format!("max deviation {worst:.2e}")),
        check("thompson-bayesian-regret", ts <= bound, format!("{ts:.2} <= {bound:.1}")),
    ])
}

fn lipschitz() -> Result<Vec<Check>> {
    let metric = Interval1DMetric::new_scaled(4.0)?;
    let mut covered = true;
    for seed in 0..5 {
        let mut env = TargetEnv::new(0.37, 0.9, metric)?;
        let mut z = Zooming::new(300, metric)?;
        let root = RngStream::new(seed);
        let (mut er, mut ar) = (root.substream("env"), root.substream("agent"));
        for t in 1..=300 {
            let x = z.act(t, &mut ar);
            covered &= z.uncovered_point().is_none();
            let r = env.sample(x, &mut er);
            z.observe(t, x, r, &mut ar)?;
        }
    }
    let env = Spec::new("env", "target").with("x_star", 0.37).with("mu_star", 0.9).with("l", 4);
    let zr = mean_final_regret(env, Spec::new("agent", "zooming"), 2000, 10)?;
    Ok(vec![
        check("covering", covered, "confidence balls cover [0,1] after every activation".into()),
        check("zooming-sublinear", zr < 0.25 * 2000.0, format!("mean regret {zr:.1} at T=2000")),
    ])
}

fn experts() -> Result<Vec<Check>> {
    let (t, k) = (1000, 10);
    let eps = ((k as f64).ln() / (2.0 * t as f64)).sqrt();
    let bound = 2.0 * (2.0 * t as f64 * (k as f64).ln()).sqrt();
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..5 {
        let env = CostTableEnv::random_uniform(t, k, FeedbackKind::FullCosts, &mut RngStream::new(seed))?;
        let mut h = Hedge::new(k, eps)?;
        let mut totals = vec![0.0; k];
        for row in env.table() {
            h.update(row)?;
            totals.iter_mut().zip(row).for_each(|(a, c)| *a += c);
        }
        let best = totals.iter().cloned().fold(f64::INFINITY, f64::min);
        worst = worst.max(h.expected_cost() - best);
    }
    let mut rng = RngStream::new(9);
    let truth: Vec<bool> = (0..200).map(|_| rng.bernoulli(0.5)).collect();
    let advice: Vec<Vec<bool>> = truth
        .iter()
        .map(|&y| (0..8).map(|e| if e == 3 { y } else { rng.bernoulli(0.5) }).collect())
        .collect();
    let mistakes = run_binary_prediction(&mut MajorityVote::new(8), &advice, &truth)?.iter().filter(|m| **m).count();
    Ok(vec![
        check("hedge-bound", worst < bound, format!("worst regret {worst:.2} < {bound:.2}")),
        check("majority-vote", mistakes <= 3, format!("{mistakes} mistakes <= log2(8) with a perfect expert")),
    ])
}

fn adversarial() -> Result<Vec<Check>> {
    let (t, k) = (3000usize, 4usize);
    let bound = 10.0 * (t as f64 * k as f64 * (k as f64).ln()).sqrt();
    let env = Spec::new("env", "cost-table").with("k", k).with("feedback", "bandit");
    let r = mean_final_regret(env, Spec::new("agent", "exp3"), t, 10)?;
    Ok(vec![check("exp3", r <= bound, format!("mean realized regret {r:.1} <= {bound:.1}"))])
}

fn linear() -> Result<Vec<Check>> {
    let t = 500;
    let (family, table) = ftl_instance(t);
    let mut rng = RngStream::new(0);
    let mut ftl = Fpl::follow_the_leader(family.clone());
    let mut cost = 0.0;
    for (i, row) in table.iter().enumerate() {
        let a = ftl.choose(&mut rng)?;
        if i > 0 {
            cost += family.cost(a, row);
        }
        ftl.feed(row)?;
    }
    let dag = Dag::random_layered(3, 3, 10, &mut RngStream::new(3))?;
    let fam = ActionFamily::from_dag(dag)?;
    let d = fam.num_atoms();
    let bpl_ok = (0..10u64).all(|seed| {
        let mut r = RngStream::new(seed);
        let tab: Vec<Vec<f64>> = (0..200).map(|_| (0..d).map(|_| r.uniform()).collect()).collect();
        bpl_diagnostic(&fam, &tab, 0.5, &mut r).is_ok()
    });
    Ok(vec![
        check("ftl-counterexample", (cost - t as f64).abs() < 1e-9, format!("FTL cost {cost} over T={t}")),
        check("bpl", bpl_ok, "cost <= OPT + d/eps on 10 seeds".into()),
    ])
}

fn contextual() -> Result<Vec<Check>> {
    let means = vec![vec![0.2, 0.8], vec![0.7, 0.3]];
    let schedule = ContextSchedule::Iid(vec![0.4, 0.6]);
    let policies = all_deterministic_policies(2, 2);
    let pi = &policies[1];
    let truth = 0.4 * means[0][pi.arm(0)] + 0.6 * means[1][pi.arm(1)];
    let ests = map_seeds(&seed_range(300), |seed| -> Result<f64> {
        let mut env = FiniteContextEnv::new(means.clone(), schedule.clone())?;
        ips_estimate(pi, &collect_log(&mut env, 100, &RngStream::new(seed))?)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let (m, se) = mean_and_stderr(&ests);
    let env = Spec::new("env", "finite-context").with("means", "0.2 0.8; 0.7 0.3").with("probs", "0.4 0.6");
    let r = mean_final_regret(env, Spec::new("agent", "per-context").with("inner.kind", "ucb1"), 2000, 10)?;
    Ok(vec![
        check("ips-unbiased", (m - truth).abs() <= 4.0 * se, format!("mean {m:.4} vs {truth:.4} (se {se:.4})")),
        check("per-context-ucb", r < 0.1 * 2000.0, format!("mean regret {r:.1} at T=2000")),
    ])
}

fn games() -> Result<Vec<Check>> {
    let m = GameMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]])?;
    let t = 4000;
    let mut row = Hedge::for_horizon(2, t)?;
    let mut col = Hedge::for_horizon(2, t)?;
    let trace = repeated_game(&mut row, &mut col, &m, t, GameFeedback::Full, &RngStream::new(1))?;
    let rep = trace.report();
    let eps = (trace.row_regret() + trace.col_regret()) / t as f64;
    let nash = approx_nash_check(&rep.p_bar, &rep.q_bar, &m, 0.5, eps)?;
    let cce = cce_check(&trace.average_joint(), &m, &m, 2.0 * (2.0 * t as f64 * 2f64.ln()).sqrt() / t as f64)?;
    Ok(vec![
        check("duality-gap", rep.duality_gap <= 0.1, format!("gap {:.4}", rep.duality_gap)),
        check("approx-nash", nash.pass, format!("row excess {:.4}, col shortfall {:.4}", nash.row_excess, nash.col_shortfall)),
        check("cce", cce.pass, format!("gains {:.4}, {:.4}", cce.row_gain, cce.col_gain)),
    ])
}

fn bwk() -> Result<Vec<Check>> {
    let b = 100.0;
    let m = OutcomeMatrix::new(vec![vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 1.0], vec![0.0, 0.0, 0.0]])?;
    let lp = solve_bwk_lp(&m, b, 200)?;
    let inst = BwkInstance::deterministic(&m, vec![b, b], 200)?;
    let mut agent = LagrangeBwK::new(&inst)?;
    let run = run_bwk(&inst, &mut agent, &RngStream::new(2))?;
    let within = run.consumed[..run.stopped_at.map_or(run.rounds(), |s| s - 1)].iter().flatten().all(|c| *c <= b);
    Ok(vec![
        check("lp-hand-instance", (lp.value * 200.0 - 2.0 * b).abs() < 1e-9, format!("LP total {}", lp.value * 200.0)),
        check("budget-respected", within, format!("adjusted reward {}", run.adjusted_reward)),
        check("beats-best-fixed-arm", run.adjusted_reward >= b, format!("{} >= B = {b}", run.adjusted_reward)),
    ])
}

fn incentives() -> Result<Vec<Check>> {
    let prior = TwoArmPrior::new(vec![[0.3, 0.5], [0.9, 0.5]], vec![0.5, 0.5])?;
    let bound = bic_epsilon_bound(&prior, 1);
    let rhe = RepeatedHiddenExploration::new(prior.clone(), BicParams::checked(&prior, 1, 0.016)?, ConstantArm(1))?;
    let pass = bic_verify(&rhe, &prior, 4, BicMode::Weak, 1 << 20)?;
    let fail = bic_verify(&ConstantArm(1), &prior, 1, BicMode::Weak, 1 << 20)?;
    Ok(vec![
        check("epsilon-bound", (bound - 0.05 / 3.0).abs() < 1e-12, format!("bound {bound:.6}")),
        check("hidden-exploration-bic", pass.pass, format!("worst margin {:.6}", pass.worst_margin)),
        check("arm2-not-bic", !fail.pass && (fail.worst_margin + 0.1).abs() < 1e-12, format!("margin {:.6}", fail.worst_margin)),
    ])
}
