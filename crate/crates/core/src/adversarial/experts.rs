//! Binary prediction with expert advice.

use crate::error::{domain_err, Error, Result};

pub trait BinaryPredictor {
    fn predict(&self, advice: &[bool]) -> Result<bool>;
    fn update(&mut self, advice: &[bool], truth: bool) -> Result<()>;
}

/// Majority vote over the experts that have never erred.
#[derive(Debug, Clone)]
pub struct MajorityVote {
    alive: Vec<bool>,
}

impl MajorityVote {
    pub fn new(n: usize) -> Self {
        Self { alive: vec![true; n] }
    }

    pub fn survivors(&self) -> usize {
        self.alive.iter().filter(|a| **a).count()
    }
}

impl BinaryPredictor for MajorityVote {
    fn predict(&self, advice: &[bool]) -> Result<bool> {
        if advice.len() != self.alive.len() {
            return Err(domain_err!("expected {} predictions, got {}", self.alive.len(), advice.len()));
        }
        if self.survivors() == 0 {
            return Err(Error::Invariant("no expert is consistent with the history".into()));
        }
        let ones = advice.iter().zip(&self.alive).filter(|(p, a)| **a && **p).count();
        Ok(2 * ones > self.survivors())
    }

    fn update(&mut self, advice: &[bool], truth: bool) -> Result<()> {
        for (alive, p) in self.alive.iter_mut().zip(advice) {
            *alive &= *p == truth;
        }
        if self.survivors() == 0 {
            return Err(Error::Invariant("every expert has erred; no perfect expert exists".into()));
        }
        Ok(())
    }
}

/// Weighted majority: mistaken experts lose a `(1 - eps)` factor.
#[derive(Debug, Clone)]
pub struct Wma {
    weights: Vec<f64>,
    eps: f64,
}

impl Wma {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(domain_err!("WMA parameter must lie in (0,1), got {eps}"));
        }
        Ok(Self {
            weights: vec![1.0; n],
            eps,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl BinaryPredictor for Wma {
    fn predict(&self, advice: &[bool]) -> Result<bool> {
        if advice.len() != self.weights.len() {
            return Err(domain_err!("expected {} predictions, got {}", self.weights.len(), advice.len()));
        }
        let (mut one, mut zero) = (0.0, 0.0);
        for (w, p) in self.weights.iter().zip(advice) {
            if *p {
                one += w;
            } else {
                zero += w;
            }
        }
        Ok(one > zero)
    }

    fn update(&mut self, advice: &[bool], truth: bool) -> Result<()> {
        for (w, p) in self.weights.iter_mut().zip(advice) {
            if *p != truth {
                *w *= 1.0 - self.eps;
            }
        }
        Ok(())
    }
}

/// Run a predictor over `advice[t][e]` and `truth[t]`; returns the per-round mistake trace.
pub fn run_binary_prediction<P: BinaryPredictor>(p: &mut P, advice: &[Vec<bool>], truth: &[bool]) -> Result<Vec<bool>> {
    if advice.len() != truth.len() {
        return Err(domain_err!("advice covers {} rounds, truth {}", advice.len(), truth.len()));
    }
    let mut trace = Vec::with_capacity(truth.len());
    for (a, &y) in advice.iter().zip(truth) {
        trace.push(p.predict(a)? != y);
        p.update(a, y)?;
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use proptest::prelude::*;

    fn bits(x: usize, len: usize) -> Vec<bool> {
        (0..len).map(|i| x >> i & 1 == 1).collect()
    }

    #[test]
    fn single_perfect_expert() {
        let truth = [true, false, true];
        let advice: Vec<Vec<bool>> = truth.iter().map(|&y| vec![y]).collect();
        let m = run_binary_prediction(&mut MajorityVote::new(1), &advice, &truth).unwrap();
        assert!(m.iter().all(|x| !x));
    }

    #[test]
    fn adversary_forces_log2_k_mistakes() {
        // experts are all 2-round binary strings; the adversary reveals the opposite of each prediction
        let experts: Vec<Vec<bool>> = (0..4).map(|x| bits(x, 2)).collect();
        let mut mv = MajorityVote::new(4);
        let mut mistakes = 0;
        for t in 0..2 {
            let advice: Vec<bool> = experts.iter().map(|e| e[t]).collect();
            let y = !mv.predict(&advice).unwrap();
            mistakes += 1;
            mv.update(&advice, y).unwrap();
        }
        assert_eq!(mistakes, 2);
        assert_eq!(mv.survivors(), 1);
    }

    #[test]
    fn majority_vote_detects_missing_perfect_expert() {
        let mut mv = MajorityVote::new(2);
        assert!(matches!(mv.update(&[true, true], false), Err(Error::Invariant(_))));
    }

    #[test]
    fn wma_hand_trace() {
        // expert 0 always right, expert 1 always wrong, eps = 1/2
        let truth = [true, true, false, true, false];
        let advice: Vec<Vec<bool>> = truth.iter().map(|&y| vec![y, !y]).collect();
        let mut w = Wma::new(2, 0.5).unwrap();
        let trace = run_binary_prediction(&mut w, &advice, &truth).unwrap();
        // round 1 is a tie, predicted 0 while the truth is 1
        assert_eq!(trace, vec![true, false, false, false, false]);
        assert_eq!(w.weights(), &[1.0, 1.0 / 32.0]);
    }

    proptest! {
        #[test]
        fn majority_vote_log2_bound(seed in any::<u64>(), k in 1usize..=16) {
            let mut rng = RngStream::new(seed);
            let t = 40;
            let truth: Vec<bool> = (0..t).map(|_| rng.bernoulli(0.5)).collect();
            let perfect = rng.index(k);
            let advice: Vec<Vec<bool>> = truth.iter().map(|&y| (0..k).map(|e| if e == perfect { y } else { rng.bernoulli(0.5) }).collect()).collect();
            let m = run_binary_prediction(&mut MajorityVote::new(k), &advice, &truth).unwrap();
            let mistakes = m.iter().filter(|x| **x).count() as f64;
            prop_assert!(mistakes <= (k as f64).log2() + 1e-12);
        }

        #[test]
        fn wma_mistake_bound(seed in any::<u64>(), k in 2usize..10, eps in 0.05f64..0.95) {
            let mut rng = RngStream::new(seed);
            let t = 60;
            let truth: Vec<bool> = (0..t).map(|_| rng.bernoulli(0.5)).collect();
            let noise: Vec<f64> = (0..k).map(|_| rng.uniform() * 0.5).collect();
            let advice: Vec<Vec<bool>> = truth.iter().map(|&y| noise.iter().map(|&q| if rng.bernoulli(q) { !y } else { y }).collect()).collect();
            let best = (0..k).map(|e| advice.iter().zip(&truth).filter(|(a, y)| a[e] != **y).count()).min().unwrap() as f64;
            let m = run_binary_prediction(&mut Wma::new(k, eps).unwrap(), &advice, &truth).unwrap();
            let mistakes = m.iter().filter(|x| **x).count() as f64;
            prop_assert!(mistakes <= 2.0 / (1.0 - eps) * best + 2.0 / eps * (k as f64).ln() + 1e-9);
        }
    }
}
