//! Physics-informed loss: mean squared residual over collocation points plus
//! squared boundary-condition violations, and its exact parameter gradient.
//!
//! All reductions run in ascending point order (then boundary-condition
//! order), so loss values are bit-reproducible regardless of how per-point
//! work is scheduled.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::network::{Approximant, MlpParams};
use crate::problem::{BvpProblem, DerivStack, STACK_LEN};

const RESIDUAL_ORDER: usize = STACK_LEN - 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum CombineMode {
    /// `L = L_d + L_bc`
    #[default]
    Sum,
    /// `L = L_d² + L_bc²`
    SumOfSquares,
}

impl CombineMode {
    pub fn name(self) -> &'static str {
        match self {
            CombineMode::Sum => "sum",
            CombineMode::SumOfSquares => "sum_of_squares",
        }
    }

    pub fn combine(self, interior: f64, boundary: f64) -> f64 {
        match self {
            CombineMode::Sum => interior + boundary,
            CombineMode::SumOfSquares => interior * interior + boundary * boundary,
        }
    }
}

impl core::str::FromStr for CombineMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "sum" => Ok(CombineMode::Sum),
            "sum_of_squares" | "sumofsquares" => Ok(CombineMode::SumOfSquares),
            _ => Err(Error::UnknownName { what: "combine mode", valid: "sum, sum_of_squares" }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossBreakdown {
    pub interior: f64,
    pub boundary: f64,
    pub total: f64,
    pub mode: CombineMode,
}

impl LossBreakdown {
    pub fn new(interior: f64, boundary: f64, mode: CombineMode) -> Self {
        Self { interior, boundary, total: mode.combine(interior, boundary), mode }
    }

    pub fn is_finite(&self) -> bool {
        self.interior.is_finite() && self.boundary.is_finite() && self.total.is_finite()
    }
}

/// `n` uniformly spaced points on `[a, b]`, both endpoints included.
pub fn collocation_grid(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidConfig("a collocation grid needs at least 2 points".into()));
    }
    if !(a < b) {
        return Err(Error::InvalidConfig("grid interval must satisfy a < b".into()));
    }
    let step = (b - a) / (n - 1) as f64;
    let mut grid: Vec<f64> = (0..n).map(|i| a + i as f64 * step).collect();
    grid[n - 1] = b;
    Ok(grid)
}

/// Indices of `points` in ascending `x` (ties keep input order), so sums
/// do not depend on how the caller ordered the grid.
fn ascending(points: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| points[a].total_cmp(&points[b]));
    idx
}

fn stack_of(derivs: &[f64]) -> DerivStack {
    let mut s = [0.0; STACK_LEN];
    s.copy_from_slice(&derivs[..STACK_LEN]);
    s
}

/// `(1/N) Σ R(x_i, ŷ(x_i), ..., ŷ⁽⁶⁾(x_i))²`
pub fn interior_loss<A: Approximant + ?Sized>(approx: &A, problem: &BvpProblem, points: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyInput("collocation point list"));
    }
    let mut acc = 0.0;
    for i in ascending(points) {
        let x = points[i];
        let r = problem.residual(x, &stack_of(&approx.derivatives(x, RESIDUAL_ORDER)?));
        acc += r * r;
    }
    Ok(acc / points.len() as f64)
}

/// Unweighted sum of squared boundary violations.
pub fn boundary_loss<A: Approximant + ?Sized>(approx: &A, problem: &BvpProblem) -> Result<f64> {
    let mut acc = 0.0;
    for bc in problem.boundary_conditions() {
        let d = approx.derivatives(bc.location, bc.derivative_order)?;
        let diff = d[bc.derivative_order] - bc.target;
        acc += diff * diff;
    }
    Ok(acc)
}

pub fn total_loss<A: Approximant + ?Sized>(
    approx: &A,
    problem: &BvpProblem,
    points: &[f64],
    mode: CombineMode,
) -> Result<LossBreakdown> {
    let interior = interior_loss(approx, problem, points)?;
    let boundary = boundary_loss(approx, problem)?;
    Ok(LossBreakdown::new(interior, boundary, mode))
}

/// Residual at one collocation point and its gradient over the flattened
/// parameters, `∂R/∂p = Σ_k ∂R/∂y_k · ∂ŷ⁽ᵏ⁾/∂p`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointTerm {
    pub residual: f64,
    pub grad: Vec<f64>,
}

pub fn point_term(params: &MlpParams, problem: &BvpProblem, x: f64) -> Result<PointTerm> {
    let jac = params.derivative_param_jacobian(x, RESIDUAL_ORDER)?;
    let stack = stack_of(jac.values());
    let residual = problem.residual(x, &stack);
    let partials = problem.residual_partials(x, &stack);
    let mut grad = vec![0.0; params.num_params()];
    for (k, &dk) in partials.iter().enumerate() {
        if dk == 0.0 {
            continue;
        }
        for (g, j) in grad.iter_mut().zip(jac.row(k)) {
            *g += dk * j;
        }
    }
    Ok(PointTerm { residual, grad })
}

/// Strategy for evaluating per-point terms. Implementations may run points
/// concurrently but must return the terms in input order.
pub trait PointExecutor {
    fn map_points(&self, points: &[f64], term: &(dyn Fn(f64) -> Result<PointTerm> + Sync)) -> Result<Vec<PointTerm>>;
}

/// Evaluates points one after another on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Serial;

impl PointExecutor for Serial {
    fn map_points(&self, points: &[f64], term: &(dyn Fn(f64) -> Result<PointTerm> + Sync)) -> Result<Vec<PointTerm>> {
        points.iter().map(|&x| term(x)).collect()
    }
}

pub fn loss_gradient(params: &MlpParams, problem: &BvpProblem, points: &[f64], mode: CombineMode) -> Result<Vec<f64>> {
    Ok(loss_and_gradient(params, problem, points, mode)?.1)
}

pub fn loss_and_gradient(
    params: &MlpParams,
    problem: &BvpProblem,
    points: &[f64],
    mode: CombineMode,
) -> Result<(LossBreakdown, Vec<f64>)> {
    loss_and_gradient_with(&Serial, params, problem, points, mode)
}

/// Loss breakdown and exact gradient of the total loss.
pub fn loss_and_gradient_with<E: PointExecutor + ?Sized>(
    executor: &E,
    params: &MlpParams,
    problem: &BvpProblem,
    points: &[f64],
    mode: CombineMode,
) -> Result<(LossBreakdown, Vec<f64>)> {
    if points.is_empty() {
        return Err(Error::EmptyInput("collocation point list"));
    }
    let n_params = params.num_params();
    let terms = executor.map_points(points, &|x| point_term(params, problem, x))?;

    let n = points.len() as f64;
    let mut interior = 0.0;
    let mut grad_interior = vec![0.0; n_params];
    for term in ascending(points).into_iter().map(|i| &terms[i]) {
        interior += term.residual * term.residual;
        let scale = 2.0 * term.residual / n;
        for (g, t) in grad_interior.iter_mut().zip(&term.grad) {
            *g += scale * t;
        }
    }
    interior /= n;

    let mut boundary = 0.0;
    let mut grad_boundary = vec![0.0; n_params];
    for bc in problem.boundary_conditions() {
        let k = bc.derivative_order;
        let jac = params.derivative_param_jacobian(bc.location, k)?;
        let diff = jac.values()[k] - bc.target;
        boundary += diff * diff;
        for (g, j) in grad_boundary.iter_mut().zip(jac.row(k)) {
            *g += 2.0 * diff * j;
        }
    }

    let breakdown = LossBreakdown::new(interior, boundary, mode);
    let (wd, wb) = match mode {
        CombineMode::Sum => (1.0, 1.0),
        CombineMode::SumOfSquares => (2.0 * interior, 2.0 * boundary),
    };
    let grad = grad_interior.iter().zip(&grad_boundary).map(|(gd, gb)| wd * gd + wb * gb).collect();
    Ok((breakdown, grad))
}
