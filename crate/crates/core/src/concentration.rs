//! Confidence radii and the KL-divergence toolkit on finite sample spaces.

use crate::error::{domain_err, Result};

/// Validate a probability vector: finite, nonnegative, summing to 1 within 1e-12.
pub fn check_prob_vector(p: &[f64]) -> Result<()> {
    if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(domain_err!("probability vector has negative or non-finite entries"));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-12 * (p.len().max(1) as f64) {
        return Err(domain_err!("probability vector sums to {s}, not 1"));
    }
    Ok(())
}

/// `sqrt(2 ln T / n)`.
pub fn hoeffding_radius(n: u64, horizon: u64) -> Result<f64> {
    if n == 0 {
        return Err(domain_err!("confidence radius needs at least one sample"));
    }
    if horizon < 2 {
        return Err(domain_err!("confidence radius needs horizon >= 2, got {horizon}"));
    }
    Ok((2.0 * (horizon as f64).ln() / n as f64).sqrt())
}

/// KL(p || q) in nats; `f64::INFINITY` when p is not absolutely continuous w.r.t. q.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(domain_err!("kl_divergence: lengths {} and {} differ", p.len(), q.len()));
    }
    let mut acc = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Ok(f64::INFINITY);
        }
        acc += pi * (pi / qi).ln();
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoinDirection {
    /// KL(RC_eps, RC_0)
    BiasedVsFair,
    /// KL(RC_0, RC_eps)
    FairVsBiased,
}

/// KL divergence between a fair coin and one with heads probability `(1+eps)/2`.
pub fn coin_kl(eps: f64, direction: CoinDirection) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(domain_err!("coin_kl needs eps in (0, 0.5), got {eps}"));
    }
    let one_minus_sq = (-eps * eps).ln_1p();
    Ok(match direction {
        CoinDirection::FairVsBiased => -0.5 * one_minus_sq,
        CoinDirection::BiasedVsFair => {
            0.5 * one_minus_sq + 0.5 * eps * ((1.0 + eps) / (1.0 - eps)).ln()
        }
    })
}

/// Total variation distance `max_A |p(A) - q(A)| = 0.5 * sum |p - q|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(domain_err!("tv_distance: lengths {} and {} differ", p.len(), q.len()));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Product distribution on the pair alphabet, row-major.
pub fn product_distribution(p: &[f64], q: &[f64]) -> Vec<f64> {
    p.iter().flat_map(|a| q.iter().map(move |b| a * b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn radius_examples() {
        assert_abs_diff_eq!(hoeffding_radius(32, 100).unwrap(), 0.536_491_5, epsilon = 1e-7);
        // n = 2 ln T is an integer for T = e^k only approximately; 2 ln 403 = 12.0 to 1e-3
        assert_abs_diff_eq!(hoeffding_radius(12, 403).unwrap(), 1.0, epsilon = 1e-4);
        let radii: Vec<f64> = (1..=100).map(|n| hoeffding_radius(n, 100).unwrap()).collect();
        assert!(radii.windows(2).all(|w| w[1] < w[0]));
        assert!(hoeffding_radius(0, 100).is_err());
        assert!(hoeffding_radius(1, 1).is_err());
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_divergence(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_abs_diff_eq!(kl_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap(), 2f64.ln(), epsilon = 1e-15);
        assert_eq!(kl_divergence(&[0.5, 0.5], &[0.0, 1.0]).unwrap(), f64::INFINITY);
        assert!(kl_divergence(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn coin_examples() {
        let v = coin_kl(0.2, CoinDirection::FairVsBiased).unwrap();
        assert_abs_diff_eq!(v, -0.5 * 0.96f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.020_411_0, epsilon = 1e-7);
        assert!(v <= 0.04);
        assert!(coin_kl(0.5, CoinDirection::FairVsBiased).is_err());
        assert!(coin_kl(0.0, CoinDirection::BiasedVsFair).is_err());
    }

    #[test]
    fn coin_matches_generic_kl() {
        for i in 1..50 {
            let eps = i as f64 / 100.0;
            let fair = [0.5, 0.5];
            let biased = [(1.0 + eps) / 2.0, (1.0 - eps) / 2.0];
            let fb = kl_divergence(&fair, &biased).unwrap();
            let bf = kl_divergence(&biased, &fair).unwrap();
            assert_abs_diff_eq!(coin_kl(eps, CoinDirection::FairVsBiased).unwrap(), fb, epsilon = 1e-12);
            assert_abs_diff_eq!(coin_kl(eps, CoinDirection::BiasedVsFair).unwrap(), bf, epsilon = 1e-12);
            assert!(bf <= 2.0 * eps * eps);
            assert!(fb <= eps * eps);
        }
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv_distance(&[0.2, 0.8], &[0.2, 0.8]).unwrap(), 0.0);
        assert_eq!(tv_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
    }

    fn dist(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.01f64..1.0, n).prop_map(|v| {
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        })
    }

    proptest! {
        #[test]
        fn gibbs(p in dist(5), q in dist(5)) {
            prop_assert!(kl_divergence(&p, &q).unwrap() >= -1e-15);
            prop_assert!(kl_divergence(&p, &p).unwrap().abs() < 1e-12);
        }

        #[test]
        fn chain_rule(p1 in dist(3), p2 in dist(4), q1 in dist(3), q2 in dist(4)) {
            let joint = kl_divergence(&product_distribution(&p1, &p2), &product_distribution(&q1, &q2)).unwrap();
            let split = kl_divergence(&p1, &q1).unwrap() + kl_divergence(&p2, &q2).unwrap();
            prop_assert!((joint - split).abs() < 1e-9);
        }

        #[test]
        fn pinsker_every_event(n in 2usize..=10, seed in any::<u64>()) {
            let mut rng = crate::RngStream::new(seed);
            let mk = |rng: &mut crate::RngStream| {
                let v: Vec<f64> = (0..n).map(|_| rng.uniform() + 1e-3).collect();
                let s: f64 = v.iter().sum();
                v.into_iter().map(|x| x / s).collect::<Vec<_>>()
            };
            let p = mk(&mut rng);
            let q = mk(&mut rng);
            let kl = kl_divergence(&p, &q).unwrap();
            let mut worst: f64 = 0.0;
            for mask in 0u32..(1 << n) {
                let (mut pa, mut qa) = (0.0, 0.0);
                for i in 0..n {
                    if mask >> i & 1 == 1 {
                        pa += p[i];
                        qa += q[i];
                    }
                }
                prop_assert!(2.0 * (pa - qa) * (pa - qa) <= kl + 1e-12);
                worst = worst.max((pa - qa).abs());
            }
            prop_assert!((worst - tv_distance(&p, &q).unwrap()).abs() < 1e-12);
        }
    }
}
