//! Semi-bandit to full-feedback reduction: explore a uniformly random atom
//! through its cover action with probability gamma, otherwise follow the
//! inner full-feedback algorithm, and feed it importance-weighted atom costs.

use super::{atom_costs, ActionFamily, Fpl};
use crate::adversarial::{hedge_eps_bounded, WeightState};
use crate::episode::{Agent, ArmIndex, Feedback, FeedbackKind, Round};
use crate::error::{domain_err, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone)]
pub enum SbInner {
    /// Hedge over the enumerated action family.
    Hedge(WeightState),
    Fpl(Box<Fpl>),
}

#[derive(Debug, Clone)]
pub struct AlgSb {
    family: ActionFamily,
    gamma: f64,
    inner: SbInner,
    explored: Option<usize>,
    max_fake: f64,
}

impl AlgSb {
    pub fn new(family: ActionFamily, gamma: f64, inner: SbInner) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(domain_err!("AlgSB needs gamma in (0,1], got {gamma}"));
        }
        Ok(Self {
            family,
            gamma,
            inner,
            explored: None,
            max_fake: 0.0,
        })
    }

    /// Hedge over actions; an action's fake cost is at most `d / gamma`.
    pub fn with_hedge(family: ActionFamily, gamma: f64, horizon: usize) -> Result<Self> {
        let d = family.num_atoms() as f64;
        let eps = hedge_eps_bounded(family.len(), d / gamma, horizon);
        let w = WeightState::new(family.len(), eps)?;
        Self::new(family, gamma, SbInner::Hedge(w))
    }

    /// FPL with `U = d^2 / gamma`, so fake atom costs stay in `[0, U/d]`.
    pub fn with_fpl(family: ActionFamily, gamma: f64, horizon: usize) -> Result<Self> {
        let d = family.num_atoms() as f64;
        let fpl = Fpl::new(family.clone(), d * d / gamma, horizon)?;
        Self::new(family, gamma, SbInner::Fpl(Box::new(fpl)))
    }

    /// `Pr[atom e is explored this round] = gamma / d`.
    pub fn explore_probability(&self) -> f64 {
        self.gamma / self.family.num_atoms() as f64
    }

    pub fn max_fake_cost(&self) -> f64 {
        self.max_fake
    }

    /// Atom explored in the last round, if any.
    pub fn explored(&self) -> Option<usize> {
        self.explored
    }

    /// Fake atom costs: `c(e) d / gamma` for the explored atom, 0 elsewhere.
    pub fn fake_costs(&self, explored: Option<usize>, atoms: &[(usize, f64)]) -> Vec<f64> {
        let d = self.family.num_atoms();
        let mut fake = vec![0.0; d];
        if let Some(e) = explored {
            if let Some(&(_, c)) = atoms.iter().find(|(a, _)| *a == e) {
                fake[e] = c * d as f64 / self.gamma;
            }
        }
        fake
    }
}

impl Agent for AlgSb {
    fn num_arms(&self) -> usize {
        self.family.len()
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::SemiBandit
    }

    fn act(&mut self, _: &Round, rng: &mut RngStream) -> ArmIndex {
        if rng.bernoulli(self.gamma) {
            let e = rng.index(self.family.num_atoms());
            self.explored = Some(e);
            return self.family.cover(e);
        }
        self.explored = None;
        match &mut self.inner {
            SbInner::Hedge(w) => rng.categorical(&w.probs()),
            SbInner::Fpl(f) => f.choose(rng).expect("finite perturbed history"),
        }
    }

    fn observe(&mut self, _: &Round, _: ArmIndex, feedback: &Feedback, _: &mut RngStream) -> Result<()> {
        let atoms = atom_costs(feedback, self.family.num_atoms())?;
        let fake = self.fake_costs(self.explored, &atoms);
        self.max_fake = fake.iter().cloned().fold(self.max_fake, f64::max);
        match &mut self.inner {
            SbInner::Hedge(w) => {
                let per_action: Vec<f64> = (0..self.family.len()).map(|i| self.family.cost(i, &fake)).collect();
                w.update(&per_action)
            }
            SbInner::Fpl(f) => f.feed(&fake),
        }
    }
}
