//! Follow the Perturbed Leader and its analysis companion, Be the Perturbed Leader.

use super::{atom_costs, ActionFamily};
use crate::episode::{Agent, ArmIndex, Feedback, FeedbackKind, Round};
use crate::error::{domain_err, Error, Result};
use crate::rng::RngStream;

/// `sqrt(d) / (U sqrt(T))`.
pub fn fpl_eps(d: usize, u: f64, horizon: usize) -> f64 {
    (d as f64).sqrt() / (u * (horizon as f64).sqrt())
}

fn draw_perturbation(d: usize, eps: f64, rng: &mut RngStream) -> Vec<f64> {
    (0..d).map(|_| (2.0 * rng.uniform() - 1.0) / eps).collect()
}

/// Plays `M(v_0 + v_1 + ... + v_{t-1})` with `v_0` uniform on `[-1/eps, 1/eps]^d`,
/// drawn once. Without a perturbation this is Follow the Leader.
#[derive(Debug, Clone)]
pub struct Fpl {
    family: ActionFamily,
    eps: Option<f64>,
    cap: Option<f64>,
    v0: Option<Vec<f64>>,
    total: Vec<f64>,
}

impl Fpl {
    /// Tuned for hidden vectors in `[0, U/d]^d` over `horizon` rounds.
    pub fn new(family: ActionFamily, u: f64, horizon: usize) -> Result<Self> {
        if !(u > 0.0) {
            return Err(domain_err!("FPL needs U > 0, got {u}"));
        }
        let eps = fpl_eps(family.num_atoms(), u, horizon);
        let mut f = Self::with_eps(family, eps)?;
        f.cap = Some(u / f.family.num_atoms() as f64);
        Ok(f)
    }

    pub fn with_eps(family: ActionFamily, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(domain_err!("FPL perturbation needs eps > 0, got {eps}"));
        }
        let d = family.num_atoms();
        Ok(Self {
            family,
            eps: Some(eps),
            cap: None,
            v0: None,
            total: vec![0.0; d],
        })
    }

    /// Follow the Leader (no perturbation).
    pub fn follow_the_leader(family: ActionFamily) -> Self {
        let d = family.num_atoms();
        Self {
            family,
            eps: None,
            cap: None,
            v0: Some(vec![0.0; d]),
            total: vec![0.0; d],
        }
    }

    pub fn eps(&self) -> Option<f64> {
        self.eps
    }

    pub fn perturbation(&self) -> Option<&[f64]> {
        self.v0.as_deref()
    }

    pub fn family(&self) -> &ActionFamily {
        &self.family
    }

    /// Current leader under the perturbed history.
    pub fn choose(&mut self, rng: &mut RngStream) -> Result<ArmIndex> {
        let d = self.family.num_atoms();
        let v0 = match (&self.v0, self.eps) {
            (Some(v0), _) => v0,
            (None, Some(eps)) => self.v0.insert(draw_perturbation(d, eps, rng)),
            (None, None) => unreachable!("FTL starts with a zero perturbation"),
        };
        let perturbed: Vec<f64> = v0.iter().zip(&self.total).map(|(a, b)| a + b).collect();
        self.family.oracle(&perturbed)
    }

    /// Add one round's hidden cost vector to the history.
    pub fn feed(&mut self, v: &[f64]) -> Result<()> {
        if v.len() != self.total.len() {
            return Err(domain_err!("FPL got {} coordinates for {} atoms", v.len(), self.total.len()));
        }
        if let Some(cap) = self.cap {
            if v.iter().any(|&x| !(0.0..=cap * (1.0 + 1e-12)).contains(&x)) {
                return Err(domain_err!("FPL hidden vector leaves [0, U/d] = [0, {cap}]"));
            }
        }
        for (t, x) in self.total.iter_mut().zip(v) {
            *t += x;
        }
        Ok(())
    }
}

impl Agent for Fpl {
    fn num_arms(&self) -> usize {
        self.family.len()
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::FullAtoms
    }

    fn act(&mut self, _: &Round, rng: &mut RngStream) -> ArmIndex {
        self.choose(rng).expect("finite perturbed history")
    }

    fn observe(&mut self, _: &Round, _: ArmIndex, feedback: &Feedback, _: &mut RngStream) -> Result<()> {
        let d = self.family.num_atoms();
        let mut v = vec![0.0; d];
        for (e, c) in atom_costs(feedback, d)? {
            v[e] = c;
        }
        self.feed(&v)
    }
}

/// Outcome of one Be-the-Perturbed-Leader run.
#[derive(Debug, Clone, PartialEq)]
pub struct BplTrace {
    pub v0: Vec<f64>,
    pub actions: Vec<ArmIndex>,
    pub cost: f64,
    pub opt: f64,
    /// `d / eps`
    pub slack: f64,
}

/// Play `M(v_{0:t})` on a known cost table and check `cost <= OPT + d/eps`.
/// A violation is reported as [`Error::Invariant`].
pub fn bpl_diagnostic(family: &ActionFamily, table: &[Vec<f64>], eps: f64, rng: &mut RngStream) -> Result<BplTrace> {
    if !(eps > 0.0) {
        return Err(domain_err!("BPL needs eps > 0"));
    }
    let d = family.num_atoms();
    let v0 = draw_perturbation(d, eps, rng);
    let mut running = v0.clone();
    let mut total = vec![0.0; d];
    let mut cost = 0.0;
    let mut actions = Vec::with_capacity(table.len());
    for v in table {
        for e in 0..d {
            running[e] += v[e];
            total[e] += v[e];
        }
        let a = family.oracle(&running)?;
        cost += family.cost(a, v);
        actions.push(a);
    }
    let opt = family.cost(family.oracle(&total)?, &total);
    let slack = d as f64 / eps;
    if cost > opt + slack + 1e-9 * (1.0 + opt.abs()) {
        return Err(Error::Invariant(format!("BPL cost {cost} exceeds OPT {opt} + d/eps {slack}")));
    }
    Ok(BplTrace {
        v0,
        actions,
        cost,
        opt,
        slack,
    })
}

/// Two disjoint single-atom actions, a priming round `(1/3, 2/3)`, then `T`
/// rounds alternating `(1,0)`, `(0,1)`. Follow the Leader pays 1 on every
/// round after the priming round.
pub fn ftl_instance(horizon: usize) -> (ActionFamily, Vec<Vec<f64>>) {
    let family = ActionFamily::explicit(2, vec![vec![0], vec![1]]).expect("valid family");
    let mut table = vec![vec![1.0 / 3.0, 2.0 / 3.0]];
    for t in 2..=horizon + 1 {
        table.push(if t % 2 == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] });
    }
    (family, table)
}
