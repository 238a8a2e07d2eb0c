//! First-order optimizers over a flat parameter vector.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum OptimizerKind {
    Sgd,
    Adam,
    #[default]
    Adamax,
}

impl OptimizerKind {
    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
            OptimizerKind::Adamax => "adamax",
        }
    }
}

impl core::str::FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(OptimizerKind::Sgd),
            "adam" => Ok(OptimizerKind::Adam),
            "adamax" => Ok(OptimizerKind::Adamax),
            _ => Err(Error::UnknownName { what: "optimizer", valid: "sgd, adam, adamax" }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Denominator guard for Adam. Adamax skips elements whose `u` is zero instead.
    pub epsilon: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { kind: OptimizerKind::Adamax, learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

impl OptimizerConfig {
    pub fn new(kind: OptimizerKind) -> Self {
        Self { kind, ..Default::default() }
    }

    pub fn with_learning_rate(mut self, learning_rate: f64) -> Self {
        self.learning_rate = learning_rate;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidConfig("learning_rate must be positive".into()));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::InvalidConfig(alloc::format!("{name} must lie in [0, 1)")));
            }
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidConfig("epsilon must be non-negative".into()));
        }
        Ok(())
    }
}

/// Per-parameter optimizer memory.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState {
    pub step_count: u64,
    /// First moment.
    pub m: Vec<f64>,
    /// Second moment (Adam) or exponentially weighted infinity norm (Adamax).
    pub u: Vec<f64>,
}

impl OptimizerState {
    pub fn new(n_params: usize) -> Self {
        Self { step_count: 0, m: vec![0.0; n_params], u: vec![0.0; n_params] }
    }
}

/// Anything that turns a gradient into an in-place parameter update.
pub trait Stepper {
    fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct Optimizer {
    config: OptimizerConfig,
    state: OptimizerState,
}

fn check_inputs(n: usize, params: &[f64], grads: &[f64]) -> Result<()> {
    if params.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: params.len() });
    }
    if grads.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: grads.len() });
    }
    if let Some((index, &value)) = grads.iter().enumerate().find(|(_, g)| !g.is_finite()) {
        return Err(Error::NonFiniteGradient { index, value });
    }
    Ok(())
}

impl Optimizer {
    pub fn new(config: OptimizerConfig, n_params: usize) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, state: OptimizerState::new(n_params) })
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    pub fn state(&self) -> &OptimizerState {
        &self.state
    }
}

impl Stepper for Optimizer {
    fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        check_inputs(self.state.m.len(), params, grads)?;
        let OptimizerConfig { kind, learning_rate: lr, beta1, beta2, epsilon } = self.config;
        let st = &mut self.state;
        st.step_count += 1;
        let t = st.step_count as i32;
        match kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.iter_mut().zip(grads) {
                    *p -= lr * g;
                }
            }
            OptimizerKind::Adam => {
                let c1 = 1.0 - libm::pow(beta1, t as f64);
                let c2 = 1.0 - libm::pow(beta2, t as f64);
                for i in 0..params.len() {
                    let g = grads[i];
                    st.m[i] = beta1 * st.m[i] + (1.0 - beta1) * g;
                    st.u[i] = beta2 * st.u[i] + (1.0 - beta2) * g * g;
                    let m_hat = st.m[i] / c1;
                    let v_hat = st.u[i] / c2;
                    params[i] -= lr * m_hat / (libm::sqrt(v_hat) + epsilon);
                }
            }
            OptimizerKind::Adamax => {
                let rate = lr / (1.0 - libm::pow(beta1, t as f64));
                for i in 0..params.len() {
                    let g = grads[i];
                    st.m[i] = beta1 * st.m[i] + (1.0 - beta1) * g;
                    st.u[i] = f64::max(beta2 * st.u[i], libm::fabs(g));
                    if st.u[i] > 0.0 {
                        params[i] -= rate * st.m[i] / st.u[i];
                    }
                }
            }
        }
        Ok(())
    }
}

/// Limited-memory BFGS direction with a fixed step length.
///
/// Gradient-only: there is no line search, so the step length plays the role
/// of a learning rate. Curvature pairs with `sᵀy <= 0` are dropped.
#[derive(Clone, Debug)]
pub struct Lbfgs {
    step_length: f64,
    memory: usize,
    pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)>,
    last: Option<(Vec<f64>, Vec<f64>)>,
}

impl Lbfgs {
    pub fn new(step_length: f64, memory: usize) -> Result<Self> {
        if !(step_length > 0.0) || memory == 0 {
            return Err(Error::InvalidConfig("L-BFGS needs a positive step length and memory".into()));
        }
        Ok(Self { step_length, memory, pairs: VecDeque::with_capacity(memory), last: None })
    }

    fn direction(&self, grads: &[f64]) -> Vec<f64> {
        let mut q = grads.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = self.pairs.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|qi| *qi *= gamma);
        }
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        q
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Stepper for Lbfgs {
    fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        check_inputs(params.len(), params, grads)?;
        if let Some((p_prev, g_prev)) = self.last.take() {
            let s: Vec<f64> = params.iter().zip(&p_prev).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = grads.iter().zip(&g_prev).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 1e-12 {
                if self.pairs.len() == self.memory {
                    self.pairs.pop_front();
                }
                self.pairs.push_back((s, y, 1.0 / sy));
            }
        }
        let dir = self.direction(grads);
        self.last = Some((params.to_vec(), grads.to_vec()));
        params.iter_mut().zip(&dir).for_each(|(p, d)| *p -= self.step_length * d);
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmokeReport {
    pub steps: usize,
    pub final_params: Vec<f64>,
    pub max_error: f64,
    pub converged: bool,
}

/// Minimizes `f(p) = Σ (p_i − 3)²` from `p = 0` and reports whether every
/// coordinate ends within `1e-2` of 3.
pub fn minimize_quadratic_smoke<S: Stepper>(stepper: &mut S, dim: usize, steps: usize) -> Result<SmokeReport> {
    let mut p = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    for _ in 0..steps {
        for (gi, pi) in g.iter_mut().zip(&p) {
            *gi = 2.0 * (pi - 3.0);
        }
        stepper.step(&mut p, &g)?;
    }
    let max_error = p.iter().map(|v| libm::fabs(v - 3.0)).fold(0.0, f64::max);
    Ok(SmokeReport { steps, final_params: p, max_error, converged: max_error <= 1e-2 })
}
