//! Seed sweeps. Each seed is an independent run with no shared mutable
//! state, so sweeps fan out over rayon when the `parallel` feature is on and
//! fall back to a plain loop otherwise. Results are always returned in seed
//! order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluate `run` for every seed, in parallel when enabled.
pub fn map_seeds<R, F>(seeds: &[u64], run: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        seeds.par_iter().map(|&s| run(s)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_seeds_sequential(seeds, run)
    }
}

/// Same as [`map_seeds`] but always on the calling thread.
pub fn map_seeds_sequential<R, F>(seeds: &[u64], run: F) -> Vec<R>
where
    F: Fn(u64) -> R,
{
    seeds.iter().map(|&s| run(s)).collect()
}

/// Seeds `0..n` as a vector.
pub fn seed_range(n: u64) -> Vec<u64> {
    (0..n).collect()
}

/// Sample mean and standard error of the mean.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
