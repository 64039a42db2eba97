use nalgebra::{DMatrix, DVector};

use super::OutcomeMatrix;
use crate::error::{config_err, domain_err, Error, Result};

/// Optimal distribution over arms for the LP relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub dist: Vec<f64>,
    /// Per-round reward `r(D)`.
    pub value: f64,
    /// Resources with `T c_i(D) = B`.
    pub binding: Vec<usize>,
}

const MAX_ARMS: usize = 12;
const MAX_RESOURCES: usize = 4;

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

/// `max r(D)` over the simplex subject to `T c_i(D) <= B` for every resource,
/// by enumerating basic feasible solutions. Ties go to the lexicographically
/// smallest support.
pub fn solve_bwk_lp(m: &OutcomeMatrix, budget: f64, horizon: usize) -> Result<LpSolution> {
    let (k, d) = (m.num_arms(), m.num_resources());
    if k > MAX_ARMS || d > MAX_RESOURCES {
        return Err(config_err!("exact LP supports at most {MAX_ARMS} arms and {MAX_RESOURCES} resources"));
    }
    if !(budget > 0.0) || horizon == 0 {
        return Err(domain_err!("budget and horizon must be positive"));
    }
    let t = horizon as f64;
    let slack = 1e-9 * budget.max(1.0);
    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    for size in 1..=k.min(d + 1) {
        for support in combinations(k, size) {
            for tight in combinations(d, size - 1) {
                let mut a = DMatrix::zeros(size, size);
                let mut rhs = DVector::zeros(size);
                for (col, &arm) in support.iter().enumerate() {
                    a[(0, col)] = 1.0;
                    for (row, &i) in tight.iter().enumerate() {
                        a[(row + 1, col)] = t * m.consumption(arm, i);
                    }
                }
                rhs[0] = 1.0;
                for row in 1..size {
                    rhs[row] = budget;
                }
                let Some(x) = a.lu().solve(&rhs) else { continue };
                if x.iter().any(|v| !v.is_finite() || *v < -1e-12) {
                    continue;
                }
                let mut dist = vec![0.0; k];
                for (col, &arm) in support.iter().enumerate() {
                    dist[arm] = x[col].max(0.0);
                }
                let s: f64 = dist.iter().sum();
                if !(s > 0.0) {
                    continue;
                }
                dist.iter_mut().for_each(|v| *v /= s);
                if (0..d).any(|i| t * m.consumption_of(&dist, i) > budget + slack) {
                    continue;
                }
                let value = m.reward_of(&dist);
                let used: Vec<usize> = (0..k).filter(|a| dist[*a] > 1e-12).collect();
                let better = match &best {
                    None => true,
                    Some((bv, bs, _)) => {
                        let tol = 1e-12 * (1.0 + bv.abs());
                        value > bv + tol || (value >= bv - tol && used < *bs)
                    }
                };
                if better {
                    best = Some((value, used, dist));
                }
            }
        }
    }
    let (value, _, dist) = best.ok_or_else(|| Error::Invariant("BwK LP has no feasible basic solution".into()))?;
    let binding = (0..d).filter(|i| t * m.consumption_of(&dist, *i) >= budget - slack).collect();
    Ok(LpSolution { dist, value, binding })
}
