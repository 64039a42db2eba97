use nalgebra::{DMatrix, DVector};

use crate::episode::{argmax_lowest, Agent, ArmIndex, Context, Feedback, FeedbackKind, Round};
use crate::error::{config_err, domain_err, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone)]
struct ArmModel {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl ArmModel {
    fn inverse(&self) -> DMatrix<f64> {
        // A = I + sum x x^T is positive definite
        self.a.clone().cholesky().expect("A stays positive definite").inverse()
    }
}

/// LinUCB with one ridge-regression ellipsoid per arm.
///
/// `A_a = I + sum x x^T`, `b_a = sum r x` over rounds where `a` was played;
/// plays `argmax_a x_a . theta_a + beta * sqrt(x_a^T A_a^-1 x_a)`.
pub struct LinUcb {
    d: usize,
    beta: f64,
    arms: Vec<ArmModel>,
    last: Option<Vec<Vec<f64>>>,
    pending_error: Option<String>,
}

impl LinUcb {
    /// `beta = sqrt(d ln T)`.
    pub fn new(k: usize, d: usize, horizon: usize) -> Result<Self> {
        Self::with_beta(k, d, ((d as f64) * (horizon.max(2) as f64).ln()).sqrt())
    }

    pub fn with_beta(k: usize, d: usize, beta: f64) -> Result<Self> {
        if k == 0 || d == 0 {
            return Err(config_err!("LinUCB needs k >= 1 and d >= 1"));
        }
        if !(beta >= 0.0) {
            return Err(domain_err!("beta must be nonnegative"));
        }
        let model = ArmModel {
            a: DMatrix::identity(d, d),
            b: DVector::zeros(d),
        };
        Ok(Self {
            d,
            beta,
            arms: vec![model; k],
            last: None,
            pending_error: None,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn theta_hat(&self, arm: ArmIndex) -> DVector<f64> {
        let m = &self.arms[arm];
        m.inverse() * &m.b
    }

    pub fn gram(&self, arm: ArmIndex) -> &DMatrix<f64> {
        &self.arms[arm].a
    }

    /// UCB index of each arm given its feature vector.
    pub fn indices(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        if xs.len() != self.arms.len() || xs.iter().any(|x| x.len() != self.d) {
            return Err(domain_err!(
                "LinUCB expects {} vectors of dimension {}",
                self.arms.len(),
                self.d
            ));
        }
        Ok(xs
            .iter()
            .zip(&self.arms)
            .map(|(x, m)| {
                let v = DVector::from_column_slice(x);
                let inv = m.inverse();
                let theta = &inv * &m.b;
                theta.dot(&v) + self.beta * v.dot(&(&inv * &v)).max(0.0).sqrt()
            })
            .collect())
    }
}

impl Agent for LinUcb {
    fn num_arms(&self) -> usize {
        self.arms.len()
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Bandit
    }

    fn act(&mut self, round: &Round, _: &mut RngStream) -> ArmIndex {
        let indices = match &round.context {
            Context::Vectors(xs) => self.indices(xs).map(|ix| (ix, xs.clone())),
            other => Err(domain_err!("LinUCB expects per-arm vectors, got {other:?}")),
        };
        match indices {
            Ok((ix, xs)) => {
                self.last = Some(xs);
                argmax_lowest(&ix).0
            }
            Err(e) => {
                self.pending_error = Some(e.to_string());
                self.last = None;
                0
            }
        }
    }

    fn observe(&mut self, _: &Round, arm: ArmIndex, feedback: &Feedback, _: &mut RngStream) -> Result<()> {
        if let Some(msg) = self.pending_error.take() {
            return Err(domain_err!("{msg}"));
        }
        let xs = self.last.take().ok_or_else(|| config_err!("observe before act"))?;
        let Feedback::BanditReward(r) = feedback else {
            return Err(config_err!("LinUCB expects bandit feedback"));
        };
        let x = DVector::from_column_slice(&xs[arm]);
        let m = &mut self.arms[arm];
        m.a += &x * x.transpose();
        m.b += &x * *r;
        Ok(())
    }
}
