//! Error tables and finite-difference verification of the derivative and
//! gradient machinery.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Uniform};

use crate::error::{Error, Result};
use crate::loss::{total_loss, CombineMode};
use crate::network::{Approximant, MlpParams, NetworkConfig};
use crate::problem::BvpProblem;
use crate::trainer::evaluate;

/// Step used by the derivative oracle.
pub const FD_STEP: f64 = 1e-5;
/// Denominators below this switch the oracle to absolute comparison.
pub const FD_DENOM_FLOOR: f64 = 1e-8;

/// Seeded default-layout network with Glorot weights and biases drawn
/// uniformly from `[-0.5, 0.5]`, so that every parameter column of a
/// verification run is exercised.
pub fn probe_network(seed: u64) -> Result<MlpParams> {
    let mut params = MlpParams::init(&NetworkConfig { seed, ..Default::default() })?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let dist = Uniform::new_inclusive(-0.5, 0.5).expect("finite range");
    for layer in params.layers_mut() {
        layer.bias_mut().iter_mut().for_each(|b| *b = dist.sample(&mut rng));
    }
    Ok(params)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableRow {
    pub x: f64,
    pub analytical: f64,
    pub numerical: f64,
    pub abs_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorTable {
    pub rows: Vec<TableRow>,
    pub max_abs_error: f64,
    pub mean_squared_error: f64,
}

impl ErrorTable {
    pub fn from_rows(rows: Vec<TableRow>) -> Self {
        let max_abs_error = rows.iter().map(|r| r.abs_error).fold(0.0, f64::max);
        let mean_squared_error = if rows.is_empty() {
            0.0
        } else {
            rows.iter().map(|r| r.abs_error * r.abs_error).sum::<f64>() / rows.len() as f64
        };
        Self { rows, max_abs_error, mean_squared_error }
    }

    pub fn row_at(&self, x: f64) -> Option<&TableRow> {
        self.rows.iter().find(|r| libm::fabs(r.x - x) < 1e-12)
    }
}

/// Analytical vs numerical comparison on `grid`, rows ascending in `x`.
pub fn build_table<A: Approximant + ?Sized>(approx: &A, problem: &BvpProblem, grid: &[f64]) -> Result<ErrorTable> {
    if !problem.has_exact() {
        return Err(Error::NoExactSolution(problem.name().into()));
    }
    let rows = evaluate(approx, problem, grid)
        .into_iter()
        .map(|r| {
            let analytical = r.exact.expect("problem has an exact solution");
            TableRow { x: r.x, analytical, numerical: r.numerical, abs_error: libm::fabs(analytical - r.numerical) }
        })
        .collect();
    Ok(ErrorTable::from_rows(rows))
}

/// `|a − b| / |b|`, or `|a − b|` when `|b|` is below the floor.
pub fn guarded_relative_error(a: f64, b: f64, floor: f64) -> f64 {
    let diff = libm::fabs(a - b);
    let denom = libm::fabs(b);
    if denom < floor {
        diff
    } else {
        diff / denom
    }
}

/// For `k = 1..=max_order`, the worst guarded relative error between
/// `ŷ⁽ᵏ⁾(x)` and the central difference of `ŷ⁽ᵏ⁻¹⁾` at step `1e-5`, over all `xs`.
/// Entry `k − 1` of the result belongs to order `k`.
pub fn fd_check_derivatives<A: Approximant + ?Sized>(approx: &A, xs: &[f64], max_order: usize) -> Result<Vec<f64>> {
    if max_order > 6 {
        return Err(Error::OrderTooHigh { requested: max_order, max: 6 });
    }
    let mut worst = vec![0.0f64; max_order];
    for &x in xs {
        let center = approx.derivatives(x, max_order)?;
        let up = approx.derivatives(x + FD_STEP, max_order)?;
        let down = approx.derivatives(x - FD_STEP, max_order)?;
        for k in 1..=max_order {
            let numeric = (up[k - 1] - down[k - 1]) / (2.0 * FD_STEP);
            let err = guarded_relative_error(numeric, center[k], FD_DENOM_FLOOR);
            worst[k - 1] = worst[k - 1].max(err);
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradientCheck {
    /// Worst guarded relative error over all parameters.
    pub worst_relative_error: f64,
    pub worst_index: usize,
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
}

/// Central finite differences of the total loss for every parameter, with
/// step `1e-6 · max(1, |p|)`.
pub fn fd_loss_gradient(
    params: &MlpParams,
    problem: &BvpProblem,
    points: &[f64],
    mode: CombineMode,
) -> Result<Vec<f64>> {
    let flat = params.to_flat();
    let mut probe = params.clone();
    let mut numeric = Vec::with_capacity(flat.len());
    let mut shifted = flat.clone();
    for i in 0..flat.len() {
        let h = 1e-6 * libm::fabs(flat[i]).max(1.0);
        shifted[i] = flat[i] + h;
        probe.set_flat(&shifted)?;
        let up = total_loss(&probe, problem, points, mode)?.total;
        shifted[i] = flat[i] - h;
        probe.set_flat(&shifted)?;
        let down = total_loss(&probe, problem, points, mode)?.total;
        shifted[i] = flat[i];
        numeric.push((up - down) / (2.0 * h));
    }
    Ok(numeric)
}

/// Compares a gradient against [`fd_loss_gradient`]; relative error with an
/// absolute floor of `1e-8` on the denominator scale.
pub fn check_gradient(analytic: Vec<f64>, numeric: Vec<f64>) -> GradientCheck {
    let mut worst = 0.0;
    let mut worst_index = 0;
    for (i, (a, n)) in analytic.iter().zip(&numeric).enumerate() {
        let scale = libm::fabs(*a).max(libm::fabs(*n)).max(1e-8);
        let err = libm::fabs(a - n) / scale;
        if err > worst {
            worst = err;
            worst_index = i;
        }
    }
    GradientCheck { worst_relative_error: worst, worst_index, analytic, numeric }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Layer;
    use crate::problem::example1;
    use crate::taylor::ActivationKind;

    #[test]
    fn guarded_error() {
        assert_eq!(guarded_relative_error(1.1, 1.0, 1e-8), 0.10000000000000009);
        assert_eq!(guarded_relative_error(1e-10, 0.0, 1e-8), 1e-10);
    }

    #[test]
    fn derivative_oracle_on_random_network() {
        let p = MlpParams::init(&NetworkConfig { seed: 11, ..Default::default() }).unwrap();
        let xs: Vec<f64> = (0..10).map(|i| i as f64 / 9.0).collect();
        let worst = fd_check_derivatives(&p, &xs, 6).unwrap();
        assert_eq!(worst.len(), 6);
        assert!(worst.iter().all(|&e| e <= 1e-6), "{worst:?}");
        assert!(fd_check_derivatives(&p, &xs, 7).is_err());
    }

    #[test]
    fn derivative_oracle_linear_and_zero() {
        let lin = MlpParams::from_layers(
            vec![
                Layer::from_parts(1, 2, vec![3.0, -1.0], vec![0.5, 0.0]).unwrap(),
                Layer::from_parts(2, 1, vec![1.0, 2.0], vec![1.0]).unwrap(),
            ],
            ActivationKind::Linear,
        )
        .unwrap();
        let xs = [0.0, 0.25, 0.5, 1.0];
        assert!(fd_check_derivatives(&lin, &xs, 6).unwrap().iter().all(|&e| e <= 1e-10));
        let zero = MlpParams::zeros(&[16], ActivationKind::Tanh).unwrap();
        assert!(fd_check_derivatives(&zero, &xs, 6).unwrap().iter().all(|&e| e <= 1e-12));
    }

    #[test]
    fn table_requires_exact_solution() {
        use alloc::sync::Arc;
        let p = BvpProblem::new(
            "plain",
            (0.0, 1.0),
            Arc::new(|_, y: &crate::problem::DerivStack| y[6]),
            Arc::new(|_, _: &crate::problem::DerivStack| [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
            Vec::new(),
            None,
        )
        .unwrap();
        let zero = MlpParams::zeros(&[2], ActivationKind::Tanh).unwrap();
        assert!(matches!(build_table(&zero, &p, &[0.0]), Err(Error::NoExactSolution(_))));
        let t = build_table(&zero, &example1(), &[1.0, 0.0, 0.5]).unwrap();
        assert_eq!(t.rows.iter().map(|r| r.x).collect::<Vec<_>>(), [0.0, 0.5, 1.0]);
        assert_eq!(t.max_abs_error, 1.0);
    }
}
