//! Seeded online-learning laboratory: stochastic, Bayesian, adversarial,
//! combinatorial, Lipschitz and contextual bandits, repeated games, bandits
//! with knapsacks and incentivized exploration, plus an experiment harness.

pub mod adversarial;
pub mod bwk;
pub mod bayes;
pub mod concentration;
pub mod contextual;
pub mod episode;
pub mod error;
pub mod games;
pub mod harness;
pub mod incentives;
pub mod linear;
pub mod lipschitz;
pub mod par;
pub mod rng;
pub mod stochastic;

pub use episode::{
    run_episode, Agent, ArmIndex, Context, Environment, Episode, Feedback, FeedbackKind, History, RegretReport,
    Round, Step,
};
pub use error::{Error, Result};
pub use rng::RngStream;
