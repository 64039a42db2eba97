//! Repeated zero-sum games between learning agents, self-play equilibrium
//! computation, and approximate Nash / coarse correlated equilibrium checks.

use std::path::Path;

use crate::adversarial::Hedge;
use crate::episode::{argmax_lowest, argmin_lowest, Agent, ArmIndex, Context, Feedback, FeedbackKind, Round};
use crate::error::{config_err, domain_err, Result};
use crate::rng::RngStream;

/// Row player's cost and column player's reward.
#[derive(Debug, Clone, PartialEq)]
pub struct GameMatrix {
    rows: Vec<Vec<f64>>,
    lo: f64,
    hi: f64,
}

impl GameMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.first().map(Vec::len).unwrap_or(0);
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(config_err!("game matrix must be non-empty and rectangular"));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(domain_err!("game matrix entries must be finite"));
        }
        let lo = rows.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
        let hi = rows.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { rows, lo, hi })
    }

    /// First line `m n`, then `m` rows of `n` numbers.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header: Vec<usize> = lines
            .next()
            .ok_or_else(|| config_err!("empty matrix file"))?
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| config_err!("bad matrix header token {s:?}")))
            .collect::<Result<_>>()?;
        let [m, n] = header[..] else {
            return Err(config_err!("matrix header must be `m n`"));
        };
        let rows: Vec<Vec<f64>> = lines
            .map(|l| {
                l.split_whitespace()
                    .map(|s| s.parse().map_err(|_| config_err!("bad matrix entry {s:?}")))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        if rows.len() != m || rows.iter().any(|r| r.len() != n) {
            return Err(config_err!("matrix body does not match header {m} x {n}"));
        }
        Self::new(rows)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.rows[0].len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// `M(p, q) = p^T M q`.
    pub fn value(&self, p: &[f64], q: &[f64]) -> f64 {
        self.rows.iter().zip(p).map(|(r, pi)| pi * r.iter().zip(q).map(|(m, qj)| m * qj).sum::<f64>()).sum()
    }

    /// `M(p, j)` for each column.
    pub fn column_values(&self, p: &[f64]) -> Vec<f64> {
        (0..self.num_cols()).map(|j| self.rows.iter().zip(p).map(|(r, pi)| pi * r[j]).sum()).collect()
    }

    /// `M(i, q)` for each row.
    pub fn row_values(&self, q: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().zip(q).map(|(m, qj)| m * qj).sum()).collect()
    }

    /// `f(p) = max_q M(p, q)`.
    pub fn f(&self, p: &[f64]) -> f64 {
        self.column_values(p).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `h(q) = min_p M(p, q)`.
    pub fn h(&self, q: &[f64]) -> f64 {
        self.row_values(q).into_iter().fold(f64::INFINITY, f64::min)
    }

    fn mean_of(ms: &[GameMatrix]) -> Result<Self> {
        let first = ms.first().ok_or_else(|| config_err!("need at least one matrix"))?;
        let (m, n) = (first.num_rows(), first.num_cols());
        if ms.iter().any(|g| g.num_rows() != m || g.num_cols() != n) {
            return Err(config_err!("stochastic game matrices must share dimensions"));
        }
        let rows = (0..m)
            .map(|i| (0..n).map(|j| ms.iter().map(|g| g.get(i, j)).sum::<f64>() / ms.len() as f64).collect())
            .collect();
        Self::new(rows)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameFeedback {
    Bandit,
    Full,
}

impl GameFeedback {
    pub fn kind(self) -> FeedbackKind {
        match self {
            GameFeedback::Bandit => FeedbackKind::Bandit,
            GameFeedback::Full => FeedbackKind::FullCosts,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameRound {
    pub i: usize,
    pub j: usize,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub p_bar: Vec<f64>,
    pub q_bar: Vec<f64>,
    pub value_estimate: f64,
    pub duality_gap: f64,
    pub certified_eps: f64,
}

impl EquilibriumReport {
    /// Report for a candidate pair: value estimate is the midpoint of `[h(q), f(p)]`
    /// and the certificate is the full duality gap.
    pub fn certify(m: &GameMatrix, p: Vec<f64>, q: Vec<f64>) -> Self {
        let (f, h) = (m.f(&p), m.h(&q));
        Self {
            value_estimate: 0.5 * (f + h),
            duality_gap: f - h,
            certified_eps: f - h,
            p_bar: p,
            q_bar: q,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameTrace {
    pub rounds: Vec<GameRound>,
    /// Matrix the report is computed against (the mean matrix for stochastic games).
    pub matrix: GameMatrix,
}

impl GameTrace {
    pub fn horizon(&self) -> usize {
        self.rounds.len()
    }

    pub fn total_cost(&self) -> f64 {
        self.rounds.iter().map(|r| r.cost).sum()
    }

    /// Empirical frequencies of the realized rows and columns.
    pub fn average_plays(&self) -> (Vec<f64>, Vec<f64>) {
        let m = &self.matrix;
        let w = 1.0 / self.rounds.len() as f64;
        let mut p = vec![0.0; m.num_rows()];
        let mut q = vec![0.0; m.num_cols()];
        for r in &self.rounds {
            p[r.i] += w;
            q[r.j] += w;
        }
        (p, q)
    }

    /// `sigma_bar = (1/T) sum_t p_t x q_t` as an `m x n` table.
    pub fn average_joint(&self) -> Vec<Vec<f64>> {
        let m = &self.matrix;
        let w = 1.0 / self.rounds.len() as f64;
        let mut s = vec![vec![0.0; m.num_cols()]; m.num_rows()];
        for r in &self.rounds {
            for (i, pi) in r.p.iter().enumerate() {
                for (j, qj) in r.q.iter().enumerate() {
                    s[i][j] += w * pi * qj;
                }
            }
        }
        s
    }

    /// Realized regret of the row player against the best fixed row.
    pub fn row_regret(&self) -> f64 {
        let (_, q) = self.average_plays();
        let best = self.matrix.h(&q) * self.horizon() as f64;
        self.total_cost() - best
    }

    /// Realized regret of the column player against the best fixed column.
    pub fn col_regret(&self) -> f64 {
        let (p, _) = self.average_plays();
        self.matrix.f(&p) * self.horizon() as f64 - self.total_cost()
    }

    /// Report on the realized average plays.
    pub fn report(&self) -> EquilibriumReport {
        let (p, q) = self.average_plays();
        EquilibriumReport::certify(&self.matrix, p, q)
    }
}

fn point_mass(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

/// Plays `T` rounds of the zero-sum game. The row agent sees costs and the
/// column agent rewards, both rescaled to [0,1]; bandit feedback carries
/// `1 - cost` to the row agent. The column agent's round context is
/// `Context::Vectors(vec![p_t])`, the row player's distribution this round.
pub fn repeated_game(
    row: &mut dyn Agent,
    col: &mut dyn Agent,
    m: &GameMatrix,
    horizon: usize,
    feedback: GameFeedback,
    rng: &RngStream,
) -> Result<GameTrace> {
    play(row, col, std::slice::from_ref(m), horizon, feedback, rng)
}

/// Like [`repeated_game`], with `M_t` drawn uniformly from `matrices` each round.
/// The trace's matrix is their mean.
pub fn repeated_stochastic_game(
    row: &mut dyn Agent,
    col: &mut dyn Agent,
    matrices: &[GameMatrix],
    horizon: usize,
    feedback: GameFeedback,
    rng: &RngStream,
) -> Result<GameTrace> {
    play(row, col, matrices, horizon, feedback, rng)
}

fn play(
    row: &mut dyn Agent,
    col: &mut dyn Agent,
    matrices: &[GameMatrix],
    horizon: usize,
    feedback: GameFeedback,
    rng: &RngStream,
) -> Result<GameTrace> {
    let mean = GameMatrix::mean_of(matrices)?;
    let (mr, nc) = (mean.num_rows(), mean.num_cols());
    if horizon == 0 {
        return Err(config_err!("horizon must be positive"));
    }
    if row.num_arms() != mr || col.num_arms() != nc {
        return Err(config_err!(
            "agents have {} and {} actions for a {mr} x {nc} matrix",
            row.num_arms(),
            col.num_arms()
        ));
    }
    if row.feedback_kind() != feedback.kind() || col.feedback_kind() != feedback.kind() {
        return Err(config_err!("agents must both accept {:?} feedback", feedback.kind()));
    }
    let lo = matrices.iter().map(|g| g.lo).fold(f64::INFINITY, f64::min);
    let hi = matrices.iter().map(|g| g.hi).fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let scale = |v: f64| (v - lo) / span;

    let mut row_rng = rng.substream("row");
    let mut col_rng = rng.substream("col");
    let mut nature = rng.substream("matrix");
    let mut rounds = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let g = if matrices.len() == 1 { &matrices[0] } else { &matrices[nature.index(matrices.len())] };
        let row_round = Round::plain(t);
        let p = row.action_distribution(&row_round);
        let col_round = Round {
            t,
            context: p.clone().map(|p| Context::Vectors(vec![p])).unwrap_or(Context::None),
        };
        let q = col.action_distribution(&col_round);
        let i = row.act(&row_round, &mut row_rng);
        let j = col.act(&col_round, &mut col_rng);
        let cost = g.get(i, j);
        let (row_fb, col_fb) = match feedback {
            GameFeedback::Bandit => (Feedback::BanditReward(1.0 - scale(cost)), Feedback::BanditReward(scale(cost))),
            GameFeedback::Full => (
                Feedback::FullCosts((0..mr).map(|a| scale(g.get(a, j))).collect()),
                Feedback::FullCosts((0..nc).map(|b| 1.0 - scale(g.get(i, b))).collect()),
            ),
        };
        row.observe(&row_round, i, &row_fb, &mut row_rng)?;
        col.observe(&col_round, j, &col_fb, &mut col_rng)?;
        rounds.push(GameRound {
            i,
            j,
            p: p.unwrap_or_else(|| point_mass(mr, i)),
            q: q.unwrap_or_else(|| point_mass(nc, j)),
            cost,
        });
    }
    Ok(GameTrace { rounds, matrix: mean })
}

/// Column player that best-responds to the row distribution it is handed:
/// `j_t = min argmax_j E_{i ~ p_t} M(i, j)`.
pub struct BestResponseAdversary {
    m: GameMatrix,
    feedback: FeedbackKind,
    missing: Option<usize>,
}

impl BestResponseAdversary {
    /// `feedback` is the kind the driver will send; the adversary ignores it.
    pub fn new(m: GameMatrix, feedback: GameFeedback) -> Self {
        Self {
            m,
            feedback: feedback.kind(),
            missing: None,
        }
    }

    pub fn respond(&self, p: &[f64]) -> usize {
        argmax_lowest(&self.m.column_values(p)).0
    }
}

impl Agent for BestResponseAdversary {
    fn num_arms(&self) -> usize {
        self.m.num_cols()
    }

    fn feedback_kind(&self) -> FeedbackKind {
        self.feedback
    }

    fn act(&mut self, round: &Round, _: &mut RngStream) -> ArmIndex {
        match &round.context {
            Context::Vectors(v) if v.len() == 1 && v[0].len() == self.m.num_rows() => self.respond(&v[0]),
            _ => {
                self.missing = Some(round.t);
                0
            }
        }
    }

    fn observe(&mut self, _: &Round, _: ArmIndex, _: &Feedback, _: &mut RngStream) -> Result<()> {
        match self.missing.take() {
            Some(t) => Err(config_err!("best-response adversary got no row distribution in round {t}")),
            None => Ok(()),
        }
    }
}

/// Hedge vs Hedge with full feedback, doubling `T` from 1024 until the duality
/// gap of the average plays is at most `tol` or `T` would exceed `2^max_log2`.
/// Returns the report with the smallest gap seen.
pub fn minimax_selfplay(m: &GameMatrix, tol: f64, max_log2: u32, rng: &RngStream) -> Result<EquilibriumReport> {
    if !(tol > 0.0) {
        return Err(domain_err!("tolerance must be positive"));
    }
    let mut best: Option<EquilibriumReport> = None;
    let mut t = 1usize << 10.min(max_log2);
    while t <= 1usize << max_log2 {
        let mut row = Hedge::for_horizon(m.num_rows(), t)?;
        let mut col = Hedge::for_horizon(m.num_cols(), t)?;
        let trace = repeated_game(&mut row, &mut col, m, t, GameFeedback::Full, &rng.substream(&format!("T-{t}")))?;
        let rep = trace.report();
        let done = rep.duality_gap <= tol;
        if best.as_ref().is_none_or(|b| rep.duality_gap < b.duality_gap) {
            best = Some(rep);
        }
        if done {
            break;
        }
        t *= 2;
    }
    Ok(best.expect("at least one scale runs"))
}

/// Exact solution of a 2 x 2 game: a pure saddle point if one exists,
/// otherwise the equalizing mixed strategies.
pub fn solve_2x2(m: &GameMatrix) -> Result<EquilibriumReport> {
    if m.num_rows() != 2 || m.num_cols() != 2 {
        return Err(config_err!("closed form needs a 2 x 2 matrix"));
    }
    for i in 0..2 {
        for j in 0..2 {
            let v = m.get(i, j);
            if v >= m.get(i, 1 - j) && v <= m.get(1 - i, j) {
                return Ok(EquilibriumReport::certify(m, point_mass(2, i), point_mass(2, j)));
            }
        }
    }
    let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    let den = a - b - c + d;
    let p0 = (d - c) / den;
    let q0 = (d - b) / den;
    Ok(EquilibriumReport::certify(m, vec![p0, 1.0 - p0], vec![q0, 1.0 - q0]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NashCheck {
    pub pass: bool,
    /// `max_j M(p, j) - v`.
    pub row_excess: f64,
    /// `v - min_i M(i, q)`.
    pub col_shortfall: f64,
}

const SLACK: f64 = 1e-12;

fn check_dist(v: &[f64], n: usize, what: &str) -> Result<()> {
    if v.len() != n {
        return Err(config_err!("{what} has {} entries, expected {n}", v.len()));
    }
    crate::concentration::check_prob_vector(v)
}

/// `max_j M(p, j) <= v + eps` and `min_i M(i, q) >= v - eps`.
pub fn approx_nash_check(p: &[f64], q: &[f64], m: &GameMatrix, value: f64, eps: f64) -> Result<NashCheck> {
    check_dist(p, m.num_rows(), "row strategy")?;
    check_dist(q, m.num_cols(), "column strategy")?;
    let row_excess = m.f(p) - value;
    let col_shortfall = value - m.h(q);
    Ok(NashCheck {
        pass: row_excess <= eps + SLACK && col_shortfall <= eps + SLACK,
        row_excess,
        col_shortfall,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CceCheck {
    pub pass: bool,
    /// Largest cost saving from a fixed row deviation, `max_i0 U - U(i0)`.
    pub row_gain: f64,
    /// Largest reward gain from a fixed column deviation, `max_j0 V(j0) - V`.
    pub col_gain: f64,
}

/// Approximate coarse correlated equilibrium check for a general pair of
/// payoff matrices: the row player minimizes `row_cost`, the column player
/// maximizes `col_reward`.
pub fn cce_check(sigma: &[Vec<f64>], row_cost: &GameMatrix, col_reward: &GameMatrix, eps: f64) -> Result<CceCheck> {
    let (mr, nc) = (row_cost.num_rows(), row_cost.num_cols());
    if col_reward.num_rows() != mr || col_reward.num_cols() != nc {
        return Err(config_err!("payoff matrices must share dimensions"));
    }
    if sigma.len() != mr || sigma.iter().any(|r| r.len() != nc) {
        return Err(config_err!("joint distribution must be {mr} x {nc}"));
    }
    let flat: Vec<f64> = sigma.iter().flatten().copied().collect();
    crate::concentration::check_prob_vector(&flat)?;
    let row_marg: Vec<f64> = sigma.iter().map(|r| r.iter().sum()).collect();
    let col_marg: Vec<f64> = (0..nc).map(|j| sigma.iter().map(|r| r[j]).sum()).collect();
    let joint = |g: &GameMatrix| -> f64 {
        sigma.iter().enumerate().map(|(i, r)| r.iter().enumerate().map(|(j, s)| s * g.get(i, j)).sum::<f64>()).sum()
    };
    let u = joint(row_cost);
    let v = joint(col_reward);
    let best_row = row_cost.row_values(&col_marg)[argmin_lowest(&row_cost.row_values(&col_marg)).0];
    let col_vals = col_reward.column_values(&row_marg);
    let best_col = col_vals[argmax_lowest(&col_vals).0];
    let row_gain = u - best_row;
    let col_gain = best_col - v;
    Ok(CceCheck {
        pass: row_gain <= eps + SLACK && col_gain <= eps + SLACK,
        row_gain,
        col_gain,
    })
}

impl From<GameMatrix> for Vec<Vec<f64>> {
    fn from(m: GameMatrix) -> Self {
        m.rows
    }
}
