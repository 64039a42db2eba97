//! Builds environments and agents from [`Spec`]s.

use std::sync::Arc;

use super::config::Spec;
use super::fixtures::{lb_instance, random_lb_instance};
use crate::adversarial::{exp3, exp3_crude_gamma, CostTableEnv, Hedge};
use crate::bayes::{FinitePrior, ThompsonFinite, ThompsonPriorFree, TsMode};
use crate::bwk::{pricing_env, ppc_env, procurement_env, BwkInstance, LagrangeBwK, UcbBwk};
use crate::contextual::{
    all_deterministic_policies, exp4_policies, AgentFactory, ContextSchedule, ExploreThenExploit, FiniteContextEnv,
    LinUcb, LinearContextEnv, LipschitzContextAgent, LipschitzContextEnv, PerContext,
};
use crate::episode::{Agent, Doubling, Environment, FeedbackKind};
use crate::error::{config_err, Result};
use crate::games::{BestResponseAdversary, GameFeedback, GameMatrix};
use crate::incentives::{
    BayesianGreedy, BicParams, ConstantArm, RepeatedHiddenExploration, RoundRobin, Sampled, TwoArmPrior,
};
use crate::linear::{ActionFamily, AlgSb, AtomCostEnv, Dag, Fpl};
use crate::lipschitz::{
    default_mesh_eps, uniform_mesh, BumpEnv, ContinuumAgent, ContinuumEnv, FixedDiscretization, Interval1DMetric,
    TargetEnv, Zooming,
};
use crate::rng::RngStream;
use crate::stochastic::{EpsilonGreedy, ExploreFirst, StochasticEnv, SuccessiveElimination, Ucb1};

pub const ENV_KINDS: &[&str] = &[
    "bernoulli",
    "deterministic",
    "lb-instance",
    "bayes-instance",
    "cost-table",
    "atom-costs",
    "bump",
    "target",
    "finite-context",
    "lipschitz-context",
    "linear-context",
    "game",
    "bwk",
    "pricing",
    "procurement",
    "ppc",
];

pub const AGENT_KINDS: &[&str] = &[
    "explore-first",
    "epsilon-greedy",
    "successive-elimination",
    "ucb1",
    "doubling",
    "thompson-finite",
    "thompson-beta",
    "thompson-gaussian",
    "hedge",
    "exp3",
    "fpl",
    "algsb",
    "per-context",
    "lipschitz-context",
    "linucb",
    "exp4-policies",
    "explore-then-exploit",
    "best-response",
    "lagrange-bwk",
    "ucb-bwk",
    "bayesian-greedy",
    "hidden-exploration",
    "constant",
];

pub const CONTINUUM_AGENT_KINDS: &[&str] = &["zooming", "uniform"];

/// What an agent builder may need to know about the environment.
#[derive(Debug, Clone)]
pub struct Setting {
    pub k: usize,
    pub horizon: usize,
    pub feedback: FeedbackKind,
    pub contexts: Option<usize>,
    pub dim: Option<usize>,
    pub family: Option<ActionFamily>,
    pub prior: Option<FinitePrior>,
    pub bwk: Option<BwkInstance>,
    pub game: Option<(GameMatrix, GameFeedback)>,
}

impl Setting {
    pub fn new(k: usize, horizon: usize, feedback: FeedbackKind) -> Self {
        Self {
            k,
            horizon,
            feedback,
            contexts: None,
            dim: None,
            family: None,
            prior: None,
            bwk: None,
            game: None,
        }
    }

    fn with_horizon(&self, horizon: usize) -> Self {
        Self { horizon, ..self.clone() }
    }
}

/// A built environment, by driver.
pub enum Instance {
    Episode {
        env: Box<dyn Environment>,
        setting: Setting,
    },
    Continuum {
        env: Box<dyn ContinuumEnv>,
        metric: Interval1DMetric,
    },
    Bwk(BwkInstance),
    Game {
        matrix: GameMatrix,
        feedback: GameFeedback,
        opponent: Spec,
    },
}

fn unknown_kind(spec: &Spec) -> crate::Error {
    config_err!("unknown kind `{}` for `{}`", spec.kind, spec.key("kind"))
}

fn feedback_param(spec: &Spec, options: &[(&str, FeedbackKind)]) -> Result<FeedbackKind> {
    let v = spec.str_or("feedback", options[0].0);
    options
        .iter()
        .find(|(name, _)| *name == v)
        .map(|(_, k)| *k)
        .ok_or_else(|| config_err!("`{}` must be one of {:?}", spec.key("feedback"), options.iter().map(|o| o.0).collect::<Vec<_>>()))
}

fn index_rows(spec: &Spec, name: &str) -> Result<Vec<Vec<usize>>> {
    let raw = spec.params.get(name).ok_or_else(|| config_err!("missing `{}`", spec.key(name)))?;
    raw.split(';')
        .map(|row| {
            row.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse().map_err(|_| config_err!("`{}` has invalid entry `{t}`", spec.key(name))))
                .collect()
        })
        .collect()
}

fn episode(env: impl Environment + 'static, setting: Setting) -> Instance {
    Instance::Episode {
        env: Box::new(env),
        setting,
    }
}

fn matrix_from(spec: &Spec) -> Result<GameMatrix> {
    match (spec.matrix("matrix")?, spec.params.get("file")) {
        (Some(rows), None) => GameMatrix::new(rows),
        (None, Some(path)) => GameMatrix::load(path),
        _ => Err(config_err!("give exactly one of `{}` and `{}`", spec.key("matrix"), spec.key("file"))),
    }
}

fn value_dist(spec: &Spec) -> Result<Vec<(f64, f64)>> {
    let values: Vec<f64> = spec.require_list("values")?;
    let probs: Vec<f64> = spec.require_list("probs")?;
    if values.len() != probs.len() {
        return Err(config_err!("`{}` and `{}` differ in length", spec.key("values"), spec.key("probs")));
    }
    Ok(values.into_iter().zip(probs).collect())
}

fn finite_prior(spec: &Spec) -> Result<Option<FinitePrior>> {
    match spec.matrix("points")? {
        None => Ok(None),
        Some(points) => {
            let probs = spec.require_list("probs")?;
            FinitePrior::new(points, probs).map(Some)
        }
    }
}

/// Builds the environment for one seed. Random instances draw from the
/// `"instance"` substream of `rng`.
pub fn build_env(spec: &Spec, horizon: usize, rng: &RngStream) -> Result<Instance> {
    let mut inst_rng = rng.substream("instance");
    let bandit = |k| Setting::new(k, horizon, FeedbackKind::Bandit);
    match spec.kind.as_str() {
        "bernoulli" => {
            spec.check_keys(&["means"])?;
            let means: Vec<f64> = spec.require_list("means")?;
            Ok(episode(StochasticEnv::bernoulli(&means)?, bandit(means.len())))
        }
        "deterministic" => {
            spec.check_keys(&["rewards"])?;
            let rewards: Vec<f64> = spec.require_list("rewards")?;
            Ok(episode(StochasticEnv::deterministic(&rewards)?, bandit(rewards.len())))
        }
        "lb-instance" => {
            spec.check_keys(&["k", "eps", "j"])?;
            let k = spec.require("k")?;
            let eps = spec.require("eps")?;
            let means = match spec.str_or("j", "random") {
                "random" => random_lb_instance(k, eps, &mut inst_rng)?.1,
                _ => lb_instance(k, eps, spec.require("j")?)?,
            };
            Ok(episode(StochasticEnv::bernoulli(&means)?, bandit(k)))
        }
        "bayes-instance" => {
            spec.check_keys(&["points", "probs"])?;
            let prior = finite_prior(spec)?.ok_or_else(|| config_err!("missing `{}`", spec.key("points")))?;
            let means = prior.sample(&mut inst_rng).to_vec();
            let mut setting = bandit(prior.num_arms());
            setting.prior = Some(prior);
            Ok(episode(StochasticEnv::bernoulli(&means)?, setting))
        }
        "cost-table" => {
            spec.check_keys(&["costs", "k", "feedback"])?;
            let kind = feedback_param(spec, &[("full", FeedbackKind::FullCosts), ("bandit", FeedbackKind::Bandit)])?;
            let env = match spec.matrix("costs")? {
                Some(table) if table.len() < horizon => {
                    return Err(config_err!("`{}` has {} rows, fewer than the horizon {horizon}", spec.key("costs"), table.len()))
                }
                Some(table) => CostTableEnv::new(table, kind)?,
                None => CostTableEnv::random_uniform(horizon, spec.require("k")?, kind, &mut inst_rng)?,
            };
            let k = env.table()[0].len();
            Ok(episode(env, Setting::new(k, horizon, kind)))
        }
        "atom-costs" => {
            spec.check_keys(&["dag", "layers", "width", "edges", "atoms", "actions", "hi", "feedback"])?;
            let kind = feedback_param(spec, &[("full", FeedbackKind::FullAtoms), ("semi", FeedbackKind::SemiBandit)])?;
            let family = if let Some(path) = spec.params.get("dag") {
                ActionFamily::from_dag(Dag::load(path.as_ref())?)?
            } else if spec.params.contains_key("actions") {
                ActionFamily::explicit(spec.require("atoms")?, index_rows(spec, "actions")?)?
            } else {
                let dag = Dag::random_layered(spec.require("layers")?, spec.require("width")?, spec.require("edges")?, &mut inst_rng)?;
                ActionFamily::from_dag(dag)?
            };
            let env = AtomCostEnv::random_uniform(family.clone(), horizon, spec.get_or("hi", 1.0)?, kind, &mut inst_rng)?;
            let mut setting = Setting::new(family.len(), horizon, kind);
            setting.family = Some(family);
            Ok(episode(env, setting))
        }
        "bump" => {
            spec.check_keys(&["x_star", "eps", "l"])?;
            let l = spec.get_or("l", 1.0)?;
            Ok(Instance::Continuum {
                env: Box::new(BumpEnv::new(spec.require("x_star")?, spec.require("eps")?, l)?),
                metric: Interval1DMetric::new_scaled(l)?,
            })
        }
        "target" => {
            spec.check_keys(&["x_star", "mu_star", "metric", "l", "d"])?;
            let metric = match spec.str_or("metric", "scaled") {
                "scaled" => Interval1DMetric::new_scaled(spec.get_or("l", 1.0)?)?,
                "power" => Interval1DMetric::new_power(spec.require("d")?)?,
                other => return Err(config_err!("`{}` must be scaled or power, got `{other}`", spec.key("metric"))),
            };
            Ok(Instance::Continuum {
                env: Box::new(TargetEnv::new(spec.require("x_star")?, spec.require("mu_star")?, metric)?),
                metric,
            })
        }
        "finite-context" => {
            spec.check_keys(&["means", "probs"])?;
            let means = spec.require_matrix("means")?;
            let schedule = match spec.list("probs")? {
                Some(p) => ContextSchedule::Iid(p),
                None => ContextSchedule::Cycle,
            };
            let n = means.len();
            let k = means.first().map(Vec::len).unwrap_or(0);
            let mut setting = bandit(k);
            setting.contexts = Some(n);
            Ok(episode(FiniteContextEnv::new(means, schedule)?, setting))
        }
        "lipschitz-context" => {
            spec.check_keys(&["centers", "l"])?;
            let centers: Vec<f64> = spec.require_list("centers")?;
            let l: f64 = spec.get_or("l", 1.0)?;
            let k = centers.len();
            let mean = Arc::new(move |x: f64, a: usize| (0.9 - l * (x - centers[a]).abs()).max(0.1));
            Ok(episode(LipschitzContextEnv::new(k, mean)?, bandit(k)))
        }
        "linear-context" => {
            spec.check_keys(&["thetas", "noise"])?;
            let env = LinearContextEnv::new(spec.require_matrix("thetas")?, spec.get_or("noise", 0.0)?)?;
            let mut setting = bandit(env.num_arms());
            setting.dim = Some(env.dim());
            Ok(episode(env, setting))
        }
        "game" => {
            spec.check_keys(&["matrix", "file", "feedback", "opponent."])?;
            let feedback = match spec.str_or("feedback", "full") {
                "full" => GameFeedback::Full,
                "bandit" => GameFeedback::Bandit,
                other => return Err(config_err!("`{}` must be full or bandit, got `{other}`", spec.key("feedback"))),
            };
            Ok(Instance::Game {
                matrix: matrix_from(spec)?,
                feedback,
                opponent: spec.require_sub("opponent")?,
            })
        }
        "bwk" => {
            spec.check_keys(&["file"])?;
            let inst = BwkInstance::load(spec.require::<String>("file")?)?;
            let arms = (0..inst.num_arms()).map(|a| inst.outcomes(a).to_vec()).collect();
            Ok(Instance::Bwk(BwkInstance::new(arms, inst.budgets().to_vec(), horizon)?))
        }
        "pricing" | "procurement" => {
            spec.check_keys(&["values", "probs", "prices", "budget"])?;
            let values = value_dist(spec)?;
            let prices: Vec<f64> = spec.require_list("prices")?;
            let budget = spec.require("budget")?;
            let inst = if spec.kind == "pricing" {
                pricing_env(&values, &prices, budget, horizon)?
            } else {
                procurement_env(&values, &prices, budget, horizon)?
            };
            Ok(Instance::Bwk(inst))
        }
        "ppc" => {
            spec.check_keys(&["clicks", "rewards", "owners", "budgets"])?;
            Ok(Instance::Bwk(ppc_env(
                &spec.require_list::<f64>("clicks")?,
                &spec.require_list::<f64>("rewards")?,
                &spec.require_list::<usize>("owners")?,
                spec.require_list("budgets")?,
                horizon,
            )?))
        }
        _ => Err(unknown_kind(spec)),
    }
}

fn need<'a, T>(v: &'a Option<T>, spec: &Spec, what: &str) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| config_err!("agent kind `{}` ({}) needs an environment with {what}", spec.kind, spec.key("kind")))
}

fn factory(inner: Spec, setting: Setting) -> Result<AgentFactory> {
    build_agent(&inner, &setting)?;
    Ok(Box::new(move || build_agent(&inner, &setting).expect("validated when the factory was built")))
}

fn two_arm_prior(spec: &Spec, setting: &Setting) -> Result<TwoArmPrior> {
    TwoArmPrior::from_finite(need(&setting.prior, spec, "a two-arm prior")?)
}

/// Builds an agent for a discrete-arm driver.
pub fn build_agent(spec: &Spec, setting: &Setting) -> Result<Box<dyn Agent>> {
    let (k, t) = (setting.k, setting.horizon);
    let agent: Box<dyn Agent> = match spec.kind.as_str() {
        "explore-first" => {
            spec.check_keys(&["n"])?;
            match spec.get("n")? {
                Some(n) => Box::new(ExploreFirst::new(k, t, n)?),
                None => Box::new(ExploreFirst::with_default_budget(k, t)?),
            }
        }
        "epsilon-greedy" => {
            spec.check_keys(&[])?;
            Box::new(EpsilonGreedy::new(k)?)
        }
        "successive-elimination" => {
            spec.check_keys(&[])?;
            Box::new(SuccessiveElimination::new(k, t)?)
        }
        "ucb1" => {
            spec.check_keys(&[])?;
            Box::new(Ucb1::new(k, t)?)
        }
        "doubling" => {
            spec.check_keys(&["inner."])?;
            let inner = spec.require_sub("inner")?;
            // phases shorter than K still get an agent built for K rounds
            build_agent(&inner, &setting.with_horizon(k))?;
            let base = setting.clone();
            Box::new(Doubling::new(move |h| {
                build_agent(&inner, &base.with_horizon(h.max(k))).expect("validated before the first phase")
            }))
        }
        "thompson-finite" => {
            spec.check_keys(&["points", "probs"])?;
            let prior = match finite_prior(spec)? {
                Some(p) => p,
                None => need(&setting.prior, spec, "a finite prior")?.clone(),
            };
            Box::new(ThompsonFinite::new(prior))
        }
        "thompson-beta" => {
            spec.check_keys(&[])?;
            Box::new(ThompsonPriorFree::new(k, TsMode::BetaBernoulli)?)
        }
        "thompson-gaussian" => {
            spec.check_keys(&[])?;
            Box::new(ThompsonPriorFree::new(k, TsMode::Gaussian)?)
        }
        "hedge" => {
            spec.check_keys(&["eps"])?;
            match spec.get("eps")? {
                Some(eps) => Box::new(Hedge::new(k, eps)?),
                None => Box::new(Hedge::for_horizon(k, t)?),
            }
        }
        "exp3" => {
            spec.check_keys(&["gamma"])?;
            let gamma = spec.get_or("gamma", exp3_crude_gamma(k, k, t).min(0.49))?;
            Box::new(exp3(k, gamma, t)?)
        }
        "fpl" => {
            spec.check_keys(&["u", "eps"])?;
            let family = need(&setting.family, spec, "an action family")?.clone();
            match spec.get("eps")? {
                Some(eps) => Box::new(Fpl::with_eps(family, eps)?),
                None => {
                    let u = spec.get_or("u", family.num_atoms() as f64)?;
                    Box::new(Fpl::new(family, u, t)?)
                }
            }
        }
        "algsb" => {
            spec.check_keys(&["gamma", "inner"])?;
            let family = need(&setting.family, spec, "an action family")?.clone();
            let gamma = spec.get_or("gamma", 0.1)?;
            match spec.str_or("inner", "hedge") {
                "hedge" => Box::new(AlgSb::with_hedge(family, gamma, t)?),
                "fpl" => Box::new(AlgSb::with_fpl(family, gamma, t)?),
                other => return Err(config_err!("`{}` must be hedge or fpl, got `{other}`", spec.key("inner"))),
            }
        }
        "per-context" => {
            spec.check_keys(&["inner."])?;
            Box::new(PerContext::new(factory(spec.require_sub("inner")?, setting.clone())?))
        }
        "lipschitz-context" => {
            spec.check_keys(&["mesh_eps", "inner."])?;
            let tf = t.max(2) as f64;
            let eps = spec.get_or("mesh_eps", (k as f64 * tf.ln() / tf).cbrt().min(1.0))?;
            Box::new(LipschitzContextAgent::new(eps, factory(spec.require_sub("inner")?, setting.clone())?)?)
        }
        "linucb" => {
            spec.check_keys(&["beta"])?;
            let d = *need(&setting.dim, spec, "context vectors")?;
            match spec.get("beta")? {
                Some(beta) => Box::new(LinUcb::with_beta(k, d, beta)?),
                None => Box::new(LinUcb::new(k, d, t)?),
            }
        }
        "exp4-policies" => {
            spec.check_keys(&["gamma", "eps"])?;
            let n = *need(&setting.contexts, spec, "finite contexts")?;
            let policies = all_deterministic_policies(n, k);
            let gamma = spec.get_or("gamma", exp3_crude_gamma(k, policies.len(), t).min(0.49))?;
            Box::new(exp4_policies(k, policies, gamma, spec.get("eps")?, t)?)
        }
        "explore-then-exploit" => {
            spec.check_keys(&["n"])?;
            let n = *need(&setting.contexts, spec, "finite contexts")?;
            let policies = all_deterministic_policies(n, k);
            match spec.get("n")? {
                Some(rounds) => Box::new(ExploreThenExploit::new(k, rounds, policies)?),
                None => Box::new(ExploreThenExploit::with_default_rounds(k, t, policies)?),
            }
        }
        "best-response" => {
            spec.check_keys(&[])?;
            let (m, fb) = need(&setting.game, spec, "a game matrix")?;
            Box::new(BestResponseAdversary::new(m.clone(), *fb))
        }
        "lagrange-bwk" => {
            spec.check_keys(&[])?;
            Box::new(LagrangeBwK::new(need(&setting.bwk, spec, "a BwK instance")?)?)
        }
        "ucb-bwk" => {
            spec.check_keys(&["scale"])?;
            let inst = need(&setting.bwk, spec, "a BwK instance")?;
            match spec.get("scale")? {
                Some(s) => Box::new(UcbBwk::with_confidence_scale(inst, s)?),
                None => Box::new(UcbBwk::new(inst)?),
            }
        }
        "bayesian-greedy" => {
            spec.check_keys(&[])?;
            let prior = two_arm_prior(spec, setting)?;
            Box::new(Sampled::for_prior(BayesianGreedy::new(prior.clone()), &prior))
        }
        "hidden-exploration" => {
            spec.check_keys(&["n0", "eps", "explore"])?;
            let prior = two_arm_prior(spec, setting)?;
            let params = BicParams {
                n0: spec.require("n0")?,
                eps: spec.require("eps")?,
            };
            match spec.str_or("explore", "arm2") {
                "arm2" => Box::new(Sampled::for_prior(RepeatedHiddenExploration::new(prior.clone(), params, ConstantArm(1))?, &prior)),
                "alternate" => Box::new(Sampled::for_prior(
                    RepeatedHiddenExploration::new(prior.clone(), params, RoundRobin::new(1))?,
                    &prior,
                )),
                other => return Err(config_err!("`{}` must be arm2 or alternate, got `{other}`", spec.key("explore"))),
            }
        }
        "constant" => {
            spec.check_keys(&["arm"])?;
            let prior = two_arm_prior(spec, setting)?;
            let arm: usize = spec.require("arm")?;
            if arm > 1 {
                return Err(config_err!("`{}` must be 0 or 1", spec.key("arm")));
            }
            let rel = if prior.swapped() { 1 - arm } else { arm };
            Box::new(Sampled::for_prior(ConstantArm(rel), &prior))
        }
        _ => return Err(unknown_kind(spec)),
    };
    if agent.num_arms() != k {
        return Err(config_err!("`{}` builds a {}-arm agent for a {k}-arm environment", spec.key("kind"), agent.num_arms()));
    }
    if agent.feedback_kind() != setting.feedback {
        return Err(config_err!(
            "`{}` consumes {:?} feedback but the environment emits {:?}",
            spec.key("kind"),
            agent.feedback_kind(),
            setting.feedback
        ));
    }
    Ok(agent)
}

/// Builds an agent for the continuum driver.
pub fn build_continuum_agent(spec: &Spec, horizon: usize, metric: Interval1DMetric) -> Result<Box<dyn ContinuumAgent>> {
    match spec.kind.as_str() {
        "zooming" => {
            spec.check_keys(&[])?;
            Ok(Box::new(Zooming::new(horizon, metric)?))
        }
        "uniform" => {
            spec.check_keys(&["eps", "inner."])?;
            let eps = match (spec.get("eps")?, metric) {
                (Some(e), _) => e,
                (None, Interval1DMetric::Scaled(l)) => default_mesh_eps(horizon, l),
                (None, Interval1DMetric::Power(_)) => {
                    return Err(config_err!("`{}` is required under the power metric", spec.key("eps")))
                }
            };
            let mesh = uniform_mesh(eps)?;
            let inner = spec.sub("inner")?.unwrap_or_else(|| Spec::new(&spec.key("inner"), "ucb1"));
            let agent = build_agent(&inner, &Setting::new(mesh.len(), horizon, FeedbackKind::Bandit))?;
            Ok(Box::new(FixedDiscretization::new(mesh, agent)?))
        }
        _ => Err(unknown_kind(spec)),
    }
}

/// Checks that `env` and `agent` build together, as they would for `seed`.
pub fn validate(env: &Spec, agent: &Spec, horizon: usize, seed: u64) -> Result<()> {
    match build_env(env, horizon, &RngStream::new(seed))? {
        Instance::Episode { setting, .. } => build_agent(agent, &setting).map(drop),
        Instance::Continuum { metric, .. } => build_continuum_agent(agent, horizon, metric).map(drop),
        Instance::Bwk(inst) => {
            let mut s = Setting::new(inst.num_arms(), horizon, FeedbackKind::Outcome);
            s.bwk = Some(inst);
            build_agent(agent, &s).map(drop)
        }
        Instance::Game { matrix, feedback, opponent } => {
            let (rows, cols) = game_settings(&matrix, feedback, horizon);
            build_agent(agent, &rows)?;
            build_agent(&opponent, &cols).map(drop)
        }
    }
}

/// Settings for the row and column players.
pub fn game_settings(m: &GameMatrix, feedback: GameFeedback, horizon: usize) -> (Setting, Setting) {
    let mut row = Setting::new(m.num_rows(), horizon, feedback.kind());
    row.game = Some((m.clone(), feedback));
    let mut col = Setting::new(m.num_cols(), horizon, feedback.kind());
    col.game = Some((m.clone(), feedback));
    (row, col)
}

/// A working `(env, agent)` pair for every kind, for completeness checks and docs.
pub fn examples() -> Vec<(Spec, Spec)> {
    let e = |kind: &str| Spec::new("env", kind);
    let a = |kind: &str| Spec::new("agent", kind);
    let bern = || e("bernoulli").with("means", "0.4, 0.6");
    let prior2 = || e("bayes-instance").with("points", "0.3 0.5; 0.9 0.5").with("probs", "0.5 0.5");
    let ctx = || e("finite-context").with("means", "0.2 0.8; 0.7 0.3").with("probs", "0.5 0.5");
    let bwk = || e("pricing").with("values", "0.3 0.7").with("probs", "0.5 0.5").with("prices", "0.3 0.7").with("budget", 20);
    let cont = || e("bump").with("x_star", 0.3).with("eps", 0.2).with("l", 1);
    vec![
        (bern(), a("explore-first")),
        (bern(), a("epsilon-greedy")),
        (bern(), a("successive-elimination")),
        (bern(), a("ucb1")),
        (bern(), a("doubling").with("inner.kind", "ucb1")),
        (e("deterministic").with("rewards", "1"), a("ucb1")),
        (e("lb-instance").with("k", 3).with("eps", 0.2), a("ucb1")),
        (e("lb-instance").with("k", 3).with("eps", 0.2).with("j", 1), a("ucb1")),
        (prior2(), a("thompson-finite")),
        (bern(), a("thompson-beta")),
        (bern(), a("thompson-gaussian")),
        (e("cost-table").with("k", 3), a("hedge")),
        (e("cost-table").with("k", 2).with("feedback", "bandit"), a("exp3")),
        (e("atom-costs").with("layers", 3).with("width", 2).with("edges", 8), a("fpl")),
        (
            e("atom-costs").with("atoms", 3).with("actions", "0 1; 1 2; 2").with("feedback", "semi"),
            a("algsb").with("inner", "fpl"),
        ),
        (cont(), a("zooming")),
        (e("target").with("x_star", 0.5).with("mu_star", 0.8).with("metric", "power").with("d", 2), a("uniform").with("eps", 0.1)),
        (cont(), a("uniform").with("inner.kind", "successive-elimination")),
        (ctx(), a("per-context").with("inner.kind", "ucb1")),
        (ctx(), a("exp4-policies")),
        (ctx(), a("explore-then-exploit")),
        (
            e("lipschitz-context").with("centers", "0.2 0.8"),
            a("lipschitz-context").with("inner.kind", "ucb1"),
        ),
        (e("linear-context").with("thetas", "0.5 0.2; 0.1 0.6"), a("linucb")),
        (
            e("game").with("matrix", "0 1; 1 0").with("opponent.kind", "best-response"),
            a("hedge"),
        ),
        (
            e("game").with("matrix", "0 1; 1 0").with("feedback", "bandit").with("opponent.kind", "exp3"),
            a("exp3"),
        ),
        (bwk(), a("lagrange-bwk")),
        (
            e("procurement").with("values", "0.3 0.7").with("probs", "0.5 0.5").with("prices", "0.5 1").with("budget", 20),
            a("ucb-bwk"),
        ),
        (
            e("ppc").with("clicks", "0.5 0.2").with("rewards", "1 0.5").with("owners", "0 1").with("budgets", "10 10"),
            a("ucb-bwk").with("scale", 0.5),
        ),
        (prior2(), a("bayesian-greedy")),
        (prior2(), a("hidden-exploration").with("n0", 1).with("eps", 0.016)),
        (prior2(), a("hidden-exploration").with("n0", 1).with("eps", 0.016).with("explore", "alternate")),
        (prior2(), a("constant").with("arm", 1)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn every_kind_is_constructible() {
        let ex = examples();
        let envs: BTreeSet<&str> = ex.iter().map(|(e, _)| e.kind.as_str()).collect();
        let mut agents: BTreeSet<String> = ex.iter().map(|(_, a)| a.kind.clone()).collect();
        // the game opponents are agents too
        for (e, _) in &ex {
            if let Some(o) = e.sub("opponent").unwrap() {
                agents.insert(o.kind);
            }
        }
        let expected_agents: BTreeSet<String> = AGENT_KINDS.iter().chain(CONTINUUM_AGENT_KINDS).map(|s| s.to_string()).collect();
        let bwk_file_covered = ENV_KINDS.iter().filter(|k| **k != "bwk").all(|k| envs.contains(k));
        assert!(bwk_file_covered, "{envs:?}");
        assert_eq!(agents, expected_agents);
        for (e, a) in &ex {
            validate(e, a, 50, 3).unwrap_or_else(|err| panic!("{} / {}: {err}", e.kind, a.kind));
        }
    }

    #[test]
    fn bwk_file_kind() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.txt");
        let inst = pricing_env(&vec![(0.5, 1.0)], &[0.5], 10.0, 40).unwrap();
        std::fs::write(&path, inst.to_text()).unwrap();
        let env = Spec::new("env", "bwk").with("file", path.display());
        validate(&env, &Spec::new("agent", "lagrange-bwk"), 40, 0).unwrap();
    }

    #[test]
    fn errors_name_the_key() {
        let err = validate(&Spec::new("env", "nope"), &Spec::new("agent", "ucb1"), 10, 0).unwrap_err();
        assert!(matches!(err, crate::Error::Config(_)));
        assert!(err.to_string().contains("env.kind"), "{err}");
        let env = Spec::new("env", "bernoulli").with("means", "0.5 0.5");
        let err = validate(&env, &Spec::new("agent", "nope"), 10, 0).unwrap_err();
        assert!(err.to_string().contains("agent.kind"), "{err}");
        let err = validate(&env, &Spec::new("agent", "ucb1").with("bogus", 1), 10, 0).unwrap_err();
        assert!(err.to_string().contains("agent.bogus"), "{err}");
        // feedback mismatch
        assert!(validate(&env, &Spec::new("agent", "hedge"), 10, 0).is_err());
        // missing environment information
        assert!(validate(&env, &Spec::new("agent", "linucb"), 10, 0).is_err());
        let short = Spec::new("env", "cost-table").with("costs", "0 1; 1 0");
        let err = validate(&short, &Spec::new("agent", "hedge"), 10, 0).unwrap_err();
        assert!(err.to_string().contains("env.costs"), "{err}");
        validate(&short, &Spec::new("agent", "hedge"), 2, 0).unwrap();
        let inner = Spec::new("agent", "doubling").with("inner.kind", "nope");
        let err = validate(&env, &inner, 10, 0).unwrap_err();
        assert!(err.to_string().contains("agent.inner.kind"), "{err}");
    }
}
