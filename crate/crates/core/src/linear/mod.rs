//! Online linear optimization over combinatorial action families: exact
//! optimization oracles, Follow the Perturbed Leader, online routing on
//! DAGs and semi-bandit reductions.

mod algsb;
mod dag;
mod fpl;

pub use algsb::{AlgSb, SbInner};
pub use dag::{Dag, Edge};
pub use fpl::{bpl_diagnostic, fpl_eps, ftl_instance, BplTrace, Fpl};

use std::collections::HashMap;

use crate::episode::{ArmIndex, Environment, Feedback, FeedbackKind, Round, Step};
use crate::error::{config_err, domain_err, Result};
use crate::rng::RngStream;

/// Nonempty family of feasible actions, each a sorted set of atoms `0..d`.
///
/// Actions are enumerated once and kept in lexicographic order so that an
/// action can be addressed by its position (its arm index).
#[derive(Debug, Clone)]
pub struct ActionFamily {
    d: usize,
    actions: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    dag: Option<Dag>,
    covers: Vec<ArmIndex>,
}

fn tie_tol(x: f64) -> f64 {
    1e-12 * (1.0 + x.abs())
}

impl ActionFamily {
    pub fn explicit(d: usize, actions: Vec<Vec<usize>>) -> Result<Self> {
        let mut actions: Vec<Vec<usize>> = actions
            .into_iter()
            .map(|mut a| {
                a.sort_unstable();
                a.dedup();
                a
            })
            .collect();
        actions.sort();
        actions.dedup();
        if actions.is_empty() {
            return Err(domain_err!("action family is empty"));
        }
        if actions.iter().flatten().any(|&e| e >= d) {
            return Err(config_err!("action uses an atom outside 0..{d}"));
        }
        Self::build(d, actions, None)
    }

    pub fn from_dag(dag: Dag) -> Result<Self> {
        let actions = dag.paths();
        Self::build(dag.num_edges(), actions, Some(dag))
    }

    fn build(d: usize, actions: Vec<Vec<usize>>, dag: Option<Dag>) -> Result<Self> {
        let mut covers = Vec::with_capacity(d);
        for e in 0..d {
            // fewest atoms, then lexicographic (actions are already in lex order)
            let best = actions
                .iter()
                .enumerate()
                .filter(|(_, a)| a.binary_search(&e).is_ok())
                .min_by_key(|(i, a)| (a.len(), *i))
                .map(|(i, _)| i)
                .ok_or_else(|| config_err!("atom {e} is not covered by any action"))?;
            covers.push(best);
        }
        let index = actions.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        Ok(Self {
            d,
            actions,
            index,
            dag,
            covers,
        })
    }

    pub fn num_atoms(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn actions(&self) -> &[Vec<usize>] {
        &self.actions
    }

    pub fn action(&self, i: ArmIndex) -> &[usize] {
        &self.actions[i]
    }

    pub fn index_of(&self, action: &[usize]) -> Option<ArmIndex> {
        self.index.get(action).copied()
    }

    pub fn dag(&self) -> Option<&Dag> {
        self.dag.as_ref()
    }

    /// Precomputed action containing atom `e`.
    pub fn cover(&self, e: usize) -> ArmIndex {
        self.covers[e]
    }

    pub fn cost(&self, i: ArmIndex, v: &[f64]) -> f64 {
        self.actions[i].iter().map(|&e| v[e]).sum()
    }

    /// Index of a minimizer of `a . v`; ties go to the lexicographically smallest atom set.
    pub fn oracle(&self, v: &[f64]) -> Result<ArmIndex> {
        if v.len() != self.d {
            return Err(domain_err!("oracle got {} coordinates for {} atoms", v.len(), self.d));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(domain_err!("oracle needs a finite cost vector"));
        }
        match &self.dag {
            Some(dag) => {
                let best = dag_oracle(dag, v);
                Ok(self.index[&best])
            }
            None => Ok(self.scan(v)),
        }
    }

    /// Full scan over the enumerated family.
    pub fn scan(&self, v: &[f64]) -> ArmIndex {
        let mut best = 0;
        let mut best_cost = self.cost(0, v);
        for i in 1..self.actions.len() {
            let c = self.cost(i, v);
            if c < best_cost - tie_tol(best_cost) {
                best = i;
                best_cost = c;
            }
        }
        best
    }
}

/// Backward dynamic program over the topological order. Keeps every tied
/// optimal suffix so the lexicographic tie rule applies to whole paths.
fn dag_oracle(dag: &Dag, v: &[f64]) -> Vec<usize> {
    let out = dag.out_edges();
    let n = dag.num_nodes();
    let mut cost: Vec<Option<f64>> = vec![None; n];
    let mut sets: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
    cost[dag.sink()] = Some(0.0);
    sets[dag.sink()] = vec![Vec::new()];
    for &u in dag.topological_order().iter().rev() {
        if u == dag.sink() {
            continue;
        }
        let options: Vec<(usize, f64)> = out[u]
            .iter()
            .filter_map(|&e| cost[dag.edges()[e].to].map(|c| (e, v[e] + c)))
            .collect();
        let Some(min) = options.iter().map(|o| o.1).reduce(f64::min) else {
            continue;
        };
        let mut tied: Vec<Vec<usize>> = Vec::new();
        for &(e, c) in &options {
            if c <= min + tie_tol(min) {
                for s in &sets[dag.edges()[e].to] {
                    let mut p = s.clone();
                    p.push(e);
                    p.sort_unstable();
                    tied.push(p);
                }
            }
        }
        tied.sort();
        tied.dedup();
        cost[u] = Some(min);
        sets[u] = tied;
    }
    sets[dag.source()].first().cloned().expect("source reaches sink")
}

/// Oblivious adversary given by a `T x d` table of atom costs.
#[derive(Debug, Clone)]
pub struct AtomCostEnv {
    family: ActionFamily,
    table: Vec<Vec<f64>>,
    kind: FeedbackKind,
}

impl AtomCostEnv {
    pub fn new(family: ActionFamily, table: Vec<Vec<f64>>, kind: FeedbackKind) -> Result<Self> {
        if !matches!(kind, FeedbackKind::FullAtoms | FeedbackKind::SemiBandit) {
            return Err(config_err!("atom cost environments emit full-atom or semi-bandit feedback, not {kind:?}"));
        }
        if table.is_empty() || table.iter().any(|r| r.len() != family.num_atoms()) {
            return Err(config_err!("atom cost table must have {} columns", family.num_atoms()));
        }
        if table.iter().flatten().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(domain_err!("atom costs must be finite and nonnegative"));
        }
        Ok(Self { family, table, kind })
    }

    /// Uniform costs in `[0, hi]`.
    pub fn random_uniform(family: ActionFamily, rows: usize, hi: f64, kind: FeedbackKind, rng: &mut RngStream) -> Result<Self> {
        let d = family.num_atoms();
        let table = (0..rows).map(|_| (0..d).map(|_| hi * rng.uniform()).collect()).collect();
        Self::new(family, table, kind)
    }

    pub fn family(&self) -> &ActionFamily {
        &self.family
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.table
    }

    /// Smallest total cost of a fixed action over the first `rows` rounds.
    pub fn best_fixed_cost(&self, rows: usize) -> f64 {
        let mut total = vec![0.0; self.family.num_atoms()];
        for row in &self.table[..rows.min(self.table.len())] {
            for (t, c) in total.iter_mut().zip(row) {
                *t += c;
            }
        }
        let i = self.family.scan(&total);
        self.family.cost(i, &total)
    }
}

impl Environment for AtomCostEnv {
    fn num_arms(&self) -> usize {
        self.family.len()
    }

    fn feedback_kind(&self) -> FeedbackKind {
        self.kind
    }

    fn step(&mut self, round: &Round, arm: ArmIndex, _: &mut RngStream) -> Result<Step> {
        let v = self
            .table
            .get(round.t - 1)
            .ok_or_else(|| config_err!("atom cost table has only {} rows", self.table.len()))?;
        let atoms: Vec<(usize, f64)> = match self.kind {
            FeedbackKind::FullAtoms => v.iter().copied().enumerate().collect(),
            _ => self.family.action(arm).iter().map(|&e| (e, v[e])).collect(),
        };
        let cost = self.family.cost(arm, v);
        Ok(Step {
            feedback: Feedback::SemiBandit(atoms),
            reward: -cost,
            arm_rewards: (0..self.family.len()).map(|i| -self.family.cost(i, v)).collect(),
            stop: false,
        })
    }
}

pub(crate) fn atom_costs(feedback: &Feedback, d: usize) -> Result<Vec<(usize, f64)>> {
    match feedback {
        Feedback::SemiBandit(atoms) => {
            if atoms.iter().any(|&(e, _)| e >= d) {
                return Err(domain_err!("atom feedback references an atom outside 0..{d}"));
            }
            Ok(atoms.clone())
        }
        other => Err(config_err!("expected atom feedback, got {other:?}")),
    }
}
