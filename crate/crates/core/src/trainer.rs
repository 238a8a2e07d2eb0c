//! End-to-end solver loop: initialize, then repeat loss → gradient → update
//! until the epoch budget runs out or the loss drops below a threshold.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::error::{Error, Result};
use crate::loss::{collocation_grid, loss_and_gradient_with, CombineMode, LossBreakdown, PointExecutor, Serial};
use crate::network::{Approximant, MlpParams, NetworkConfig};
use crate::optim::{Optimizer, OptimizerConfig, Stepper};
use crate::problem::BvpProblem;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub problem_name: String,
    /// Layout and init scheme. Its `seed` is overridden by [`TrainConfig::seed`].
    pub network: NetworkConfig,
    pub optimizer: OptimizerConfig,
    pub epochs: usize,
    pub grid_points: usize,
    pub combine_mode: CombineMode,
    pub stop_epsilon: Option<f64>,
    pub log_every: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            problem_name: "example1".into(),
            network: NetworkConfig::default(),
            optimizer: OptimizerConfig::default(),
            epochs: 13_000,
            grid_points: 21,
            combine_mode: CombineMode::Sum,
            stop_epsilon: None,
            log_every: 100,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn for_problem(name: &str) -> Self {
        Self { problem_name: name.into(), ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        self.optimizer.validate()?;
        if self.grid_points < 2 {
            return Err(Error::InvalidConfig("grid_points must be at least 2".into()));
        }
        if self.log_every == 0 {
            return Err(Error::InvalidConfig("log_every must be at least 1".into()));
        }
        if let Some(eps) = self.stop_epsilon {
            if !(eps > 0.0) {
                return Err(Error::InvalidConfig("stop_epsilon must be positive".into()));
            }
        }
        Ok(())
    }

    /// Network config with the training seed applied.
    pub fn network_config(&self) -> NetworkConfig {
        NetworkConfig { seed: self.seed, ..self.network.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainRecord {
    pub epoch: usize,
    pub interior: f64,
    pub boundary: f64,
    pub total: f64,
}

impl TrainRecord {
    fn new(epoch: usize, loss: &LossBreakdown) -> Self {
        Self { epoch, interior: loss.interior, boundary: loss.boundary, total: loss.total }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub params: MlpParams,
    pub history: Vec<TrainRecord>,
    pub final_loss: LossBreakdown,
    /// Number of optimizer updates applied.
    pub epochs_run: usize,
    pub stopped_early: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error(transparent)]
    Config(#[from] Error),

    /// Loss or gradient stopped being finite. `last_good` holds the parameters
    /// of the previous epoch.
    #[error("non-finite loss or gradient at epoch {epoch}")]
    NonFinite { epoch: usize, last_good: MlpParams, history: Vec<TrainRecord> },
}

/// Trains on the builtin problem named in the config.
pub fn train(config: &TrainConfig) -> core::result::Result<TrainOutcome, TrainError> {
    let problem = BvpProblem::builtin(&config.problem_name)?;
    train_problem(config, &problem, &Serial)
}

/// Trains on an arbitrary problem. Full-batch: every epoch uses every
/// collocation point and every boundary condition.
pub fn train_problem<E: PointExecutor + ?Sized>(
    config: &TrainConfig,
    problem: &BvpProblem,
    executor: &E,
) -> core::result::Result<TrainOutcome, TrainError> {
    config.validate()?;
    let (a, b) = problem.domain();
    let points = collocation_grid(a, b, config.grid_points)?;
    let mut params = MlpParams::init(&config.network_config())?;
    let mut flat = params.to_flat();
    let mut optimizer = Optimizer::new(config.optimizer, flat.len())?;
    let mut history = Vec::new();
    let mut last_good = params.clone();

    let mut epoch = 0;
    loop {
        let (loss, grad) = loss_and_gradient_with(executor, &params, problem, &points, config.combine_mode)?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(TrainError::NonFinite { epoch, last_good, history });
        }

        let stop = config.stop_epsilon.is_some_and(|eps| loss.total <= eps);
        let last = stop || epoch == config.epochs;
        if epoch % config.log_every == 0 || last {
            history.push(TrainRecord::new(epoch, &loss));
        }
        if last {
            return Ok(TrainOutcome {
                params,
                history,
                final_loss: loss,
                epochs_run: epoch,
                stopped_early: stop && epoch < config.epochs,
            });
        }

        last_good.set_flat(&flat)?;
        optimizer.step(&mut flat, &grad)?;
        params.set_flat(&flat)?;
        epoch += 1;
    }
}

/// One row of a solution evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalRow {
    pub x: f64,
    pub numerical: f64,
    pub exact: Option<f64>,
    pub abs_error: Option<f64>,
}

/// Evaluates a candidate solution on `grid`, rows in ascending `x`.
pub fn evaluate<A: Approximant + ?Sized>(approx: &A, problem: &BvpProblem, grid: &[f64]) -> Vec<EvalRow> {
    let mut xs = grid.to_vec();
    xs.sort_by(f64::total_cmp);
    xs.into_iter()
        .map(|x| {
            let numerical = approx.value(x);
            let exact = problem.exact_solution(x).ok();
            EvalRow { x, numerical, exact, abs_error: exact.map(|e| libm::fabs(numerical - e)) }
        })
        .collect()
}
