//! Lipschitz bandits on [0,1]: metrics, uniform meshes, fixed discretization,
//! the zooming algorithm and bump instances.

use crate::episode::{argmax_lowest, Agent, Feedback, Round};
use crate::error::{config_err, domain_err, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interval1DMetric {
    /// `L |x - y|`
    Scaled(f64),
    /// `|x - y|^(1/d)`
    Power(f64),
}

impl Interval1DMetric {
    pub fn new_scaled(l: f64) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(domain_err!("Lipschitz constant must be positive, got {l}"));
        }
        Ok(Self::Scaled(l))
    }

    pub fn new_power(d: f64) -> Result<Self> {
        if !(d >= 1.0 && d.is_finite()) {
            return Err(domain_err!("power metric needs d >= 1, got {d}"));
        }
        Ok(Self::Power(d))
    }

    pub fn dist(&self, x: f64, y: f64) -> f64 {
        match *self {
            Self::Scaled(l) => l * (x - y).abs(),
            Self::Power(d) => (x - y).abs().powf(1.0 / d),
        }
    }

    /// Half-width on the line of a ball of metric radius `r`.
    pub fn half_width(&self, r: f64) -> f64 {
        match *self {
            Self::Scaled(l) => r / l,
            Self::Power(d) => r.powf(d),
        }
    }
}

/// Continuum-armed stochastic environment on [0,1].
pub trait ContinuumEnv {
    fn mean(&self, x: f64) -> f64;
    fn best_mean(&self) -> f64;
    fn sample(&mut self, x: f64, rng: &mut RngStream) -> f64 {
        if rng.bernoulli(self.mean(x)) {
            1.0
        } else {
            0.0
        }
    }
}

pub trait ContinuumAgent {
    fn act(&mut self, t: usize, rng: &mut RngStream) -> f64;
    fn observe(&mut self, t: usize, x: f64, reward: f64, rng: &mut RngStream) -> Result<()>;
}

#[derive(Debug, Clone)]
pub struct ContinuumEpisode {
    pub arms: Vec<f64>,
    pub rewards: Vec<f64>,
    /// Per-round `mu* - mu(x_t)`.
    pub gaps: Vec<f64>,
}

impl ContinuumEpisode {
    pub fn pseudo_regret(&self) -> f64 {
        self.gaps.iter().sum()
    }
}

/// Episode driver for continuum arms, with `"env"` / `"agent"` substreams
/// as in [`crate::episode::run_episode`].
pub fn run_continuum<E, A>(env: &mut E, agent: &mut A, horizon: usize, rng: &RngStream) -> Result<ContinuumEpisode>
where
    E: ContinuumEnv + ?Sized,
    A: ContinuumAgent + ?Sized,
{
    if horizon == 0 {
        return Err(config_err!("horizon must be at least 1"));
    }
    let mut env_rng = rng.substream("env");
    let mut agent_rng = rng.substream("agent");
    let best = env.best_mean();
    let mut ep = ContinuumEpisode {
        arms: Vec::with_capacity(horizon),
        rewards: Vec::with_capacity(horizon),
        gaps: Vec::with_capacity(horizon),
    };
    for t in 1..=horizon {
        let x = agent.act(t, &mut agent_rng);
        if !(0.0..=1.0).contains(&x) {
            return Err(domain_err!("agent chose arm {x} outside [0,1]"));
        }
        let r = env.sample(x, &mut env_rng);
        agent.observe(t, x, r, &mut agent_rng)?;
        ep.gaps.push(best - env.mean(x));
        ep.arms.push(x);
        ep.rewards.push(r);
    }
    Ok(ep)
}

/// `1/2 + max(0, eps - L |x - x*|)` with Bernoulli rewards.
#[derive(Debug, Clone, Copy)]
pub struct BumpEnv {
    x_star: f64,
    eps: f64,
    l: f64,
}

impl BumpEnv {
    pub fn new(x_star: f64, eps: f64, l: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x_star) || !(eps > 0.0 && eps <= 0.5) || !(l > 0.0) {
            return Err(domain_err!("bump needs x* in [0,1], eps in (0,1/2], L > 0"));
        }
        Ok(Self { x_star, eps, l })
    }
}

impl ContinuumEnv for BumpEnv {
    fn mean(&self, x: f64) -> f64 {
        0.5 + (self.eps - self.l * (x - self.x_star).abs()).max(0.0)
    }
    fn best_mean(&self) -> f64 {
        0.5 + self.eps
    }
}

/// `max(0, mu* - D(x, x*))` with Bernoulli rewards: a single-point target set.
#[derive(Debug, Clone, Copy)]
pub struct TargetEnv {
    x_star: f64,
    mu_star: f64,
    metric: Interval1DMetric,
}

impl TargetEnv {
    pub fn new(x_star: f64, mu_star: f64, metric: Interval1DMetric) -> Result<Self> {
        if !(0.0..=1.0).contains(&x_star) || !(0.0..=1.0).contains(&mu_star) {
            return Err(domain_err!("target instance needs x* and mu* in [0,1]"));
        }
        Ok(Self { x_star, mu_star, metric })
    }
}

impl ContinuumEnv for TargetEnv {
    fn mean(&self, x: f64) -> f64 {
        (self.mu_star - self.metric.dist(x, self.x_star)).max(0.0)
    }
    fn best_mean(&self) -> f64 {
        self.mu_star
    }
}

/// `{0, eps, 2 eps, ..., 1}`; 1 is always included.
pub fn uniform_mesh(eps: f64) -> Result<Vec<f64>> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(domain_err!("mesh step must lie in (0,1], got {eps}"));
    }
    let n = (1.0 / eps + 1e-9).floor() as usize;
    let mut mesh: Vec<f64> = (0..=n).map(|k| (k as f64 * eps).min(1.0)).collect();
    if *mesh.last().expect("non-empty") < 1.0 - 1e-12 {
        mesh.push(1.0);
    } else {
        *mesh.last_mut().expect("non-empty") = 1.0;
    }
    Ok(mesh)
}

/// `(T L^2 / ln T)^(-1/3)`, capped at 1.
pub fn default_mesh_eps(horizon: usize, l: f64) -> f64 {
    let t = horizon.max(2) as f64;
    (t * l * l / t.ln()).powf(-1.0 / 3.0).min(1.0)
}

/// `mu* - max_{x in S} mu(x)`.
pub fn discretization_error<E: ContinuumEnv + ?Sized>(env: &E, mesh: &[f64]) -> f64 {
    env.best_mean() - mesh.iter().map(|&x| env.mean(x)).fold(f64::NEG_INFINITY, f64::max)
}

/// Runs a finite-armed agent over the points of a mesh.
pub struct FixedDiscretization<A: Agent> {
    mesh: Vec<f64>,
    inner: A,
    last: usize,
}

impl<A: Agent> FixedDiscretization<A> {
    pub fn new(mesh: Vec<f64>, inner: A) -> Result<Self> {
        if mesh.is_empty() {
            return Err(config_err!("mesh must be non-empty"));
        }
        if inner.num_arms() != mesh.len() {
            return Err(config_err!("inner agent has {} arms for {} mesh points", inner.num_arms(), mesh.len()));
        }
        Ok(Self { mesh, inner, last: 0 })
    }

    pub fn mesh(&self) -> &[f64] {
        &self.mesh
    }
}

impl<A: Agent> ContinuumAgent for FixedDiscretization<A> {
    fn act(&mut self, t: usize, rng: &mut RngStream) -> f64 {
        self.last = self.inner.act(&Round::plain(t), rng);
        self.mesh[self.last]
    }

    fn observe(&mut self, t: usize, _: f64, reward: f64, rng: &mut RngStream) -> Result<()> {
        self.inner.observe(&Round::plain(t), self.last, &Feedback::BanditReward(reward), rng)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActiveArm {
    pub x: f64,
    pub n: u64,
    pub sum: f64,
}

impl ActiveArm {
    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }
}

/// Zooming: keep [0,1] covered by open confidence balls of radius
/// `sqrt(2 ln T / (n + 1))`, activating the leftmost uncovered point, and
/// play the active arm with the largest `mean + 2 radius`.
#[derive(Debug, Clone)]
pub struct Zooming {
    horizon: usize,
    metric: Interval1DMetric,
    active: Vec<ActiveArm>,
    last: usize,
}

impl Zooming {
    pub fn new(horizon: usize, metric: Interval1DMetric) -> Result<Self> {
        if horizon < 2 {
            return Err(config_err!("zooming needs T >= 2"));
        }
        Ok(Self {
            horizon,
            metric,
            active: Vec::new(),
            last: 0,
        })
    }

    pub fn active(&self) -> &[ActiveArm] {
        &self.active
    }

    pub fn radius(&self, n: u64) -> f64 {
        (2.0 * (self.horizon as f64).ln() / (n + 1) as f64).sqrt()
    }

    pub fn index(&self, arm: &ActiveArm) -> f64 {
        arm.mean() + 2.0 * self.radius(arm.n)
    }

    /// Open intervals `(x - w, x + w)` covered by the active confidence balls.
    pub fn balls(&self) -> Vec<(f64, f64)> {
        self.active
            .iter()
            .map(|a| {
                let w = self.metric.half_width(self.radius(a.n));
                (a.x - w, a.x + w)
            })
            .collect()
    }

    /// Leftmost point of [0,1] outside every ball, if any.
    pub fn uncovered_point(&self) -> Option<f64> {
        let mut balls = self.balls();
        balls.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut p = 0.0;
        loop {
            match balls.iter().filter(|(l, h)| *l < p && p < *h).map(|b| b.1).reduce(f64::max) {
                Some(h) => p = h,
                None => return (p <= 1.0).then_some(p),
            }
        }
    }

    fn activate(&mut self) {
        while let Some(x) = self.uncovered_point() {
            self.active.push(ActiveArm { x, n: 0, sum: 0.0 });
        }
    }
}

impl ContinuumAgent for Zooming {
    fn act(&mut self, _: usize, _: &mut RngStream) -> f64 {
        self.activate();
        let mut best = 0;
        let mut best_idx = self.index(&self.active[0]);
        for (i, a) in self.active.iter().enumerate().skip(1) {
            let v = self.index(a);
            if v > best_idx || (v == best_idx && a.x < self.active[best].x) {
                best = i;
                best_idx = v;
            }
        }
        self.last = best;
        self.active[best].x
    }

    fn observe(&mut self, _: usize, _: f64, reward: f64, _: &mut RngStream) -> Result<()> {
        let a = &mut self.active[self.last];
        a.n += 1;
        a.sum += reward;
        self.activate();
        Ok(())
    }
}

/// Mesh index nearest to `x`, ties to the smaller point.
pub fn nearest_mesh_index(mesh: &[f64], x: f64) -> usize {
    let d: Vec<f64> = mesh.iter().map(|m| -(m - x).abs()).collect();
    argmax_lowest(&d).0
}
