//! Lower-bound instances and the two identification experiments built on them.

use crate::episode::{run_episode, Agent, ArmIndex};
use crate::error::{config_err, domain_err, Result};
use crate::par::{map_seeds, mean_and_stderr};
use crate::rng::RngStream;
use crate::stochastic::{ArmStats, StochasticEnv};

fn lb_means(k: usize, eps: f64, j: usize) -> Result<Vec<f64>> {
    if k == 0 || j >= k {
        return Err(domain_err!("planted arm {j} out of range for {k} arms"));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(domain_err!("eps must lie in [0,1), got {eps}"));
    }
    let mut means = vec![0.5; k];
    means[j] = (1.0 + eps) / 2.0;
    Ok(means)
}

/// Bernoulli means: `(1+eps)/2` at arm `j`, `1/2` elsewhere.
pub fn lb_instance(k: usize, eps: f64, j: usize) -> Result<Vec<f64>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(domain_err!("eps must lie in (0,1), got {eps}"));
    }
    lb_means(k, eps, j)
}

/// [`lb_instance`] with `j` drawn uniformly from `rng`.
pub fn random_lb_instance(k: usize, eps: f64, rng: &mut RngStream) -> Result<(ArmIndex, Vec<f64>)> {
    if k == 0 {
        return Err(domain_err!("need at least one arm"));
    }
    let j = rng.index(k);
    Ok((j, lb_instance(k, eps, j)?))
}

/// Most-pulled arm, lowest index on ties.
pub fn most_pulled_arm(k: usize, arms: &[ArmIndex]) -> ArmIndex {
    let mut stats = ArmStats::new(k);
    for &a in arms {
        stats.record(a, 0.0);
    }
    crate::stochastic::most_pulled(&stats)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestArmReport {
    pub seeds: Vec<u64>,
    pub planted: Vec<ArmIndex>,
    pub predicted: Vec<ArmIndex>,
    pub error_rate: f64,
    pub stderr: f64,
}

/// Per seed: plant the best arm uniformly at random (`"instance"` substream),
/// run the agent for `T` rounds and predict the most-pulled arm. `eps = 0`
/// plants an arm that is not actually better.
pub fn best_arm_id_experiment<F>(make_agent: F, k: usize, eps: f64, horizon: usize, seeds: &[u64]) -> Result<BestArmReport>
where
    F: Fn(usize, usize) -> Result<Box<dyn Agent>> + Sync + Send,
{
    lb_means(k, eps, 0)?;
    let runs = map_seeds(seeds, |seed| -> Result<(ArmIndex, ArmIndex)> {
        let rng = RngStream::new(seed);
        let j = rng.substream("instance").index(k);
        let mut env = StochasticEnv::bernoulli(&lb_means(k, eps, j)?)?;
        let mut agent = make_agent(k, horizon)?;
        let ep = run_episode(&mut env, &mut agent, horizon, &rng)?;
        Ok((j, most_pulled_arm(k, &ep.history.arms())))
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let errors: Vec<f64> = runs.iter().map(|(j, y)| f64::from(u8::from(j != y))).collect();
    let (error_rate, stderr) = mean_and_stderr(&errors);
    Ok(BestArmReport {
        seeds: seeds.to_vec(),
        planted: runs.iter().map(|r| r.0).collect(),
        predicted: runs.iter().map(|r| r.1).collect(),
        error_rate,
        stderr,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinReport {
    /// Empirical `Pr[HIGH | fair coin]`.
    pub high_given_fair: f64,
    /// Empirical `Pr[LOW | biased coin]`.
    pub low_given_biased: f64,
    pub stderr_fair: f64,
    pub stderr_biased: f64,
}

/// Says HIGH when the empirical mean of `T` flips is at least `(2+eps)/4`,
/// the midpoint between `1/2` and `(1+eps)/2`.
pub fn coin_decision(flips: &[bool], eps: f64) -> Result<bool> {
    if flips.is_empty() {
        return Err(config_err!("the decision rule needs at least one flip"));
    }
    let mean = flips.iter().filter(|f| **f).count() as f64 / flips.len() as f64;
    Ok(mean >= (2.0 + eps) / 4.0)
}

/// Per seed, flips a fair coin and a `(1+eps)/2` coin `T` times each (on the
/// `"fair"` and `"biased"` substreams) and applies [`coin_decision`].
pub fn coin_decision_experiment(horizon: usize, eps: f64, seeds: &[u64]) -> Result<CoinReport> {
    if horizon == 0 {
        return Err(config_err!("T must be positive"));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(domain_err!("eps must lie in [0,1), got {eps}"));
    }
    let flips = |rng: &mut RngStream, p: f64| (0..horizon).map(|_| rng.bernoulli(p)).collect::<Vec<_>>();
    let outcomes = map_seeds(seeds, |seed| {
        let rng = RngStream::new(seed);
        let fair = coin_decision(&flips(&mut rng.substream("fair"), 0.5), eps).expect("T > 0");
        let biased = coin_decision(&flips(&mut rng.substream("biased"), (1.0 + eps) / 2.0), eps).expect("T > 0");
        (fair, !biased)
    });
    let fair: Vec<f64> = outcomes.iter().map(|o| f64::from(u8::from(o.0))).collect();
    let biased: Vec<f64> = outcomes.iter().map(|o| f64::from(u8::from(o.1))).collect();
    let (high_given_fair, stderr_fair) = mean_and_stderr(&fair);
    let (low_given_biased, stderr_biased) = mean_and_stderr(&biased);
    Ok(CoinReport {
        high_given_fair,
        low_given_biased,
        stderr_fair,
        stderr_biased,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::par::seed_range;
    use crate::stochastic::Ucb1;

    #[test]
    fn lb_examples() {
        assert_eq!(lb_instance(2, 0.2, 0).unwrap(), vec![0.6, 0.5]);
        for (k, eps, j) in [(5, 0.1, 3), (3, 0.5, 0)] {
            let m = lb_instance(k, eps, j).unwrap();
            let best = m[j];
            for (i, mu) in m.iter().enumerate() {
                if i != j {
                    assert!((best - mu - eps / 2.0).abs() < 1e-15);
                }
            }
        }
        assert!(lb_instance(2, 0.0, 0).is_err());
        assert!(lb_instance(2, 1.0, 0).is_err());
        assert!(lb_instance(2, 0.2, 2).is_err());
        let (j, m) = random_lb_instance(4, 0.2, &mut RngStream::new(9)).unwrap();
        let (j2, m2) = random_lb_instance(4, 0.2, &mut RngStream::new(9)).unwrap();
        assert_eq!((j, &m), (j2, &m2));
        assert_eq!(m[j], 0.6);
    }

    #[test]
    fn most_pulled_ties_low() {
        assert_eq!(most_pulled_arm(3, &[2, 1, 2, 1]), 1);
        assert_eq!(most_pulled_arm(3, &[]), 0);
    }

    #[test]
    fn coin_rule() {
        assert!(coin_decision(&[], 0.4).is_err());
        assert!(coin_decision(&[true, true, true, false, false], 0.4).unwrap());
        assert!(!coin_decision(&[true, false], 0.4).unwrap());
        assert!(coin_decision_experiment(0, 0.4, &[0]).is_err());
    }

    #[test]
    fn coin_rates_fall_with_t() {
        let seeds = seed_range(300);
        let small = coin_decision_experiment(4, 0.4, &seeds).unwrap();
        let large = coin_decision_experiment(400, 0.4, &seeds).unwrap();
        assert!(small.high_given_fair > 0.2 && small.low_given_biased > 0.2, "{small:?}");
        assert!(large.high_given_fair < 0.01 && large.low_given_biased < 0.01, "{large:?}");
    }

    #[test]
    fn best_arm_report_reproducible() {
        let make = |k, t| -> Result<Box<dyn Agent>> { Ok(Box::new(Ucb1::new(k, t)?)) };
        let seeds = seed_range(20);
        let a = best_arm_id_experiment(make, 2, 0.3, 200, &seeds).unwrap();
        let b = best_arm_id_experiment(make, 2, 0.3, 200, &seeds).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.planted.len(), 20);
    }
}
