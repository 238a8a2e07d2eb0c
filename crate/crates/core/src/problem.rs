//! Sixth-order boundary value problems in residual form `R(x, y, y', ..., y⁽⁶⁾) = 0`.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Number of derivative slots the residual sees: `y, y', ..., y⁽⁶⁾`.
pub const STACK_LEN: usize = 7;

/// `[y, y', ..., y⁽⁶⁾]` at one point.
pub type DerivStack = [f64; STACK_LEN];

pub type ResidualFn = dyn Fn(f64, &DerivStack) -> f64 + Send + Sync;
pub type PartialsFn = dyn Fn(f64, &DerivStack) -> DerivStack + Send + Sync;
/// Analytic derivatives `[y, y', ..., y^(order)]` at `x`.
pub type ExactFn = dyn Fn(f64, usize) -> Vec<f64> + Send + Sync;

pub const BUILTIN_NAMES: &str = "example1, example2";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryCondition {
    pub location: f64,
    pub derivative_order: usize,
    pub target: f64,
}

impl BoundaryCondition {
    pub fn new(location: f64, derivative_order: usize, target: f64) -> Self {
        Self { location, derivative_order, target }
    }
}

#[derive(Clone)]
pub struct BvpProblem {
    name: String,
    domain: (f64, f64),
    residual: Arc<ResidualFn>,
    partials: Arc<PartialsFn>,
    boundary_conditions: Vec<BoundaryCondition>,
    exact: Option<Arc<ExactFn>>,
}

impl fmt::Debug for BvpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BvpProblem")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("boundary_conditions", &self.boundary_conditions)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl BvpProblem {
    /// Builds a problem from a residual and its hand-derived partials.
    ///
    /// The partials are cross-checked against central differences of the
    /// residual at a handful of deterministic probe points; a mismatch beyond
    /// `1e-6` relative error is rejected.
    pub fn new(
        name: impl Into<String>,
        domain: (f64, f64),
        residual: Arc<ResidualFn>,
        partials: Arc<PartialsFn>,
        boundary_conditions: Vec<BoundaryCondition>,
        exact: Option<Arc<ExactFn>>,
    ) -> Result<Self> {
        let (a, b) = domain;
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidConfig("domain must be a finite interval with a < b".into()));
        }
        for bc in &boundary_conditions {
            if bc.location != a && bc.location != b {
                return Err(Error::InvalidConfig("boundary conditions must sit at a domain endpoint".into()));
            }
            if bc.derivative_order > 5 {
                return Err(Error::InvalidConfig("boundary derivative order must be at most 5".into()));
            }
        }
        let problem = Self { name: name.into(), domain, residual, partials, boundary_conditions, exact };
        problem.validate_partials()?;
        Ok(problem)
    }

    /// Compares `residual_partials` with central differences at fixed probe inputs.
    pub fn validate_partials(&self) -> Result<()> {
        let (a, b) = self.domain;
        for probe in 0..5 {
            let t = (probe as f64 + 0.5) / 5.0;
            let x = a + t * (b - a);
            let mut stack = [0.0; STACK_LEN];
            for (k, s) in stack.iter_mut().enumerate() {
                *s = 0.5 + 0.37 * (((probe * 7 + k * 3) % 11) as f64 - 5.0) / 5.0;
            }
            let analytic = self.residual_partials(x, &stack);
            for slot in 0..STACK_LEN {
                let h = 1e-6 * stack[slot].abs().max(1.0);
                let mut up = stack;
                let mut down = stack;
                up[slot] += h;
                down[slot] -= h;
                let numeric = (self.residual(x, &up) - self.residual(x, &down)) / (2.0 * h);
                let scale = analytic[slot].abs().max(numeric.abs()).max(1.0);
                if (analytic[slot] - numeric).abs() > 1e-6 * scale {
                    return Err(Error::InconsistentPartials { slot, analytic: analytic[slot], numeric });
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn boundary_conditions(&self) -> &[BoundaryCondition] {
        &self.boundary_conditions
    }

    #[inline]
    pub fn residual(&self, x: f64, derivs: &DerivStack) -> f64 {
        (self.residual)(x, derivs)
    }

    /// `[∂R/∂y₀, ..., ∂R/∂y₆]`
    #[inline]
    pub fn residual_partials(&self, x: f64, derivs: &DerivStack) -> DerivStack {
        (self.partials)(x, derivs)
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn exact_solution(&self, x: f64) -> Result<f64> {
        Ok(self.exact_derivatives(x, 0)?[0])
    }

    /// Analytic `[y, y', ..., y^(order)]` at `x`.
    pub fn exact_derivatives(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        match &self.exact {
            Some(f) => Ok(f(x, order)),
            None => Err(Error::NoExactSolution(self.name.clone())),
        }
    }

    /// One of the shipped benchmarks, by name.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "example1" => Ok(example1()),
            "example2" => Ok(example2()),
            _ => Err(Error::UnknownProblem { name: name.to_string(), valid: BUILTIN_NAMES }),
        }
    }
}

/// `y⁽⁶⁾ − y = −6eˣ` on `[0, 1]`, exact solution `(1 − x)eˣ`.
///
/// Boundary targets are the exact solution's values: `y(0) = 1`, `y''(0) = −1`,
/// `y⁽⁴⁾(0) = −3`, `y(1) = 0`, `y''(1) = −2e`, `y⁽⁴⁾(1) = −4e`.
pub fn example1() -> BvpProblem {
    let e = core::f64::consts::E;
    BvpProblem::new(
        "example1",
        (0.0, 1.0),
        Arc::new(|x, y: &DerivStack| y[6] - y[0] + 6.0 * libm::exp(x)),
        Arc::new(|_, _: &DerivStack| [-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
        alloc::vec![
            BoundaryCondition::new(0.0, 0, 1.0),
            BoundaryCondition::new(0.0, 2, -1.0),
            BoundaryCondition::new(0.0, 4, -3.0),
            BoundaryCondition::new(1.0, 0, 0.0),
            BoundaryCondition::new(1.0, 2, -2.0 * e),
            BoundaryCondition::new(1.0, 4, -4.0 * e),
        ],
        Some(Arc::new(|x, order| {
            // y⁽ᵏ⁾ = (1 − k − x)eˣ, written so that y(1) is +0
            let ex = libm::exp(x);
            (0..=order).map(|k| (1.0 - k as f64 - x) * ex).collect()
        })),
    )
    .expect("builtin problem is consistent")
}

/// `y⁽⁶⁾ − e⁻ˣy² = 0` on `[0, 1]`, exact solution `eˣ`.
pub fn example2() -> BvpProblem {
    let e = core::f64::consts::E;
    BvpProblem::new(
        "example2",
        (0.0, 1.0),
        Arc::new(|x, y: &DerivStack| y[6] - libm::exp(-x) * y[0] * y[0]),
        Arc::new(|x, y: &DerivStack| [-2.0 * libm::exp(-x) * y[0], 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
        alloc::vec![
            BoundaryCondition::new(0.0, 0, 1.0),
            BoundaryCondition::new(0.0, 2, 1.0),
            BoundaryCondition::new(0.0, 4, 1.0),
            BoundaryCondition::new(1.0, 0, e),
            BoundaryCondition::new(1.0, 2, e),
            BoundaryCondition::new(1.0, 4, e),
        ],
        Some(Arc::new(|x, order| alloc::vec![libm::exp(x); order + 1])),
    )
    .expect("builtin problem is consistent")
}
