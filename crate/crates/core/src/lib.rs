//! Neural-network solver for sixth-order ODE boundary value problems.
//!
//! A small feedforward network `ŷ(x)` is trained so that the ODE residual
//! vanishes on a collocation grid and the boundary conditions hold at the
//! endpoints. Input derivatives up to sixth order are computed exactly with
//! truncated Taylor series, and their parameter gradients with a reverse
//! sweep over the same series, so no finite differences enter training.
//!
//! The crate is `no_std` (it needs `alloc`); file formats and the command
//! line live in the `sextic-pinn` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod loss;
pub mod network;
pub mod optim;
pub mod problem;
pub mod report;
pub mod taylor;
pub mod trainer;

pub use error::{Error, Result};
pub use loss::{CombineMode, LossBreakdown};
pub use network::{Approximant, InitScheme, Jacobian, Layer, MlpParams, NetworkConfig};
pub use optim::{Optimizer, OptimizerConfig, OptimizerKind, Stepper};
pub use problem::{BoundaryCondition, BvpProblem};
pub use report::ErrorTable;
pub use taylor::{ActivationKind, TaylorJet};
pub use trainer::{TrainConfig, TrainError, TrainOutcome, TrainRecord};
