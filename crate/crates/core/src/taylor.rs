//! Truncated univariate Taylor series ("jets") and scalar activations.
//!
//! A [`TaylorJet`] of order `K` stores the normalized coefficients
//! `f(x0), f'(x0), f''(x0)/2!, ..., f^(K)(x0)/K!` of some function of a single
//! input coordinate. Pushing [`TaylorJet::variable`] through sums, products
//! and activation compositions yields exact input derivatives of the composed
//! expression up to order `K`.
//!
//! Storage is a fixed inline array so that jet arithmetic never allocates.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Largest supported jet order.
pub const MAX_ORDER: usize = 7;

/// Default jet order: one above the sixth derivative the loss needs.
pub const DEFAULT_ORDER: usize = 7;

const FACTORIAL: [f64; MAX_ORDER + 2] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0, 5040.0, 40320.0];

/// `k!` as a float, for `k <= 8`.
#[inline]
pub fn factorial(k: usize) -> f64 {
    FACTORIAL[k]
}

#[derive(Clone, Copy, PartialEq)]
pub struct TaylorJet {
    coeffs: [f64; MAX_ORDER + 1],
    order: usize,
}

impl fmt::Debug for TaylorJet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("TaylorJet").field(&self.coeffs()).finish()
    }
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::OrderTooHigh { requested: order, max: MAX_ORDER });
    }
    Ok(())
}

impl TaylorJet {
    /// Jet of the constant function `c`.
    pub fn constant(c: f64, order: usize) -> Result<Self> {
        check_order(order)?;
        Ok(Self::constant_unchecked(c, order))
    }

    /// Seed jet for the input coordinate: `[x0, 1, 0, ..., 0]`.
    pub fn variable(x0: f64, order: usize) -> Result<Self> {
        check_order(order)?;
        Ok(Self::variable_unchecked(x0, order))
    }

    /// Builds a jet from normalized coefficients; the order is `coeffs.len() - 1`.
    pub fn from_coeffs(coeffs: &[f64]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyInput("jet coefficients"));
        }
        let order = coeffs.len() - 1;
        check_order(order)?;
        let mut jet = Self::zero_unchecked(order);
        jet.coeffs[..=order].copy_from_slice(coeffs);
        Ok(jet)
    }

    pub(crate) fn zero_unchecked(order: usize) -> Self {
        debug_assert!(order <= MAX_ORDER);
        Self { coeffs: [0.0; MAX_ORDER + 1], order }
    }

    pub(crate) fn constant_unchecked(c: f64, order: usize) -> Self {
        let mut jet = Self::zero_unchecked(order);
        jet.coeffs[0] = c;
        jet
    }

    pub(crate) fn variable_unchecked(x0: f64, order: usize) -> Self {
        let mut jet = Self::constant_unchecked(x0, order);
        if order >= 1 {
            jet.coeffs[1] = 1.0;
        }
        jet
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs[..=self.order]
    }

    /// Value at the expansion point.
    #[inline]
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// `k`-th derivative at the expansion point, `coeffs[k] * k!`.
    pub fn derivative(&self, k: usize) -> Result<f64> {
        if k > self.order {
            return Err(Error::DerivativeOutOfRange { k, order: self.order });
        }
        Ok(self.coeffs[k] * factorial(k))
    }

    /// All derivatives `0..=order`.
    pub fn derivatives(&self) -> Vec<f64> {
        (0..=self.order).map(|k| self.coeffs[k] * factorial(k)).collect()
    }

    fn same_order(&self, other: &Self) -> Result<()> {
        if self.order != other.order {
            return Err(Error::OrderMismatch { left: self.order, right: other.order });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_order(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.same_order(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        for c in &mut out.coeffs[..=self.order] {
            *c *= s;
        }
        out
    }

    #[inline]
    pub(crate) fn add_unchecked(&self, other: &Self) -> Self {
        let mut out = *self;
        for k in 0..=self.order {
            out.coeffs[k] += other.coeffs[k];
        }
        out
    }

    /// `self += s * other`
    #[inline]
    pub(crate) fn add_scaled(&mut self, s: f64, other: &Self) {
        for k in 0..=self.order {
            self.coeffs[k] += s * other.coeffs[k];
        }
    }

    /// Truncated Cauchy product.
    #[inline]
    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let mut out = Self::zero_unchecked(self.order);
        for k in 0..=self.order {
            let mut acc = 0.0;
            for j in 0..=k {
                acc += self.coeffs[j] * other.coeffs[k - j];
            }
            out.coeffs[k] = acc;
        }
        out
    }

    /// Composes an outer function, given by its derivatives at `self.value()`,
    /// with this jet. `outer_derivs` must hold at least `order + 1` entries.
    pub(crate) fn compose_derivs(&self, outer_derivs: &[f64]) -> Self {
        let order = self.order;
        let mut h = *self;
        h.coeffs[0] = 0.0;
        // Horner in the shifted series: sum_j d_j/j! h^j
        let mut out = Self::constant_unchecked(outer_derivs[order] / factorial(order), order);
        for j in (0..order).rev() {
            out = out.mul_unchecked(&h);
            out.coeffs[0] += outer_derivs[j] / factorial(j);
        }
        out
    }
}

impl core::ops::Add for TaylorJet {
    type Output = TaylorJet;

    /// Panics on order mismatch; use [`TaylorJet::try_add`] for a checked sum.
    fn add(self, rhs: Self) -> Self {
        self.try_add(&rhs).expect("jet order mismatch")
    }
}

impl core::ops::Mul for TaylorJet {
    type Output = TaylorJet;

    fn mul(self, rhs: Self) -> Self {
        self.try_mul(&rhs).expect("jet order mismatch")
    }
}

impl core::ops::Mul<f64> for TaylorJet {
    type Output = TaylorJet;

    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

/// Activation functions available to the network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ActivationKind {
    Tanh,
    Sigmoid,
    Linear,
    /// Vector-valued; forward evaluation only.
    Softmax,
}

impl ActivationKind {
    pub fn supports_derivatives(self) -> bool {
        !matches!(self, ActivationKind::Softmax)
    }

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Tanh => "tanh",
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Linear => "linear",
            ActivationKind::Softmax => "softmax",
        }
    }

    /// Scalar forward value. Softmax has no scalar form and is rejected.
    pub fn apply(self, z: f64) -> Result<f64> {
        match self {
            ActivationKind::Tanh => Ok(libm::tanh(z)),
            ActivationKind::Sigmoid => Ok(sigmoid(z)),
            ActivationKind::Linear => Ok(z),
            ActivationKind::Softmax => Err(Error::UnsupportedActivation(self)),
        }
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tanh" => Ok(ActivationKind::Tanh),
            "sigmoid" => Ok(ActivationKind::Sigmoid),
            "linear" => Ok(ActivationKind::Linear),
            "softmax" => Ok(ActivationKind::Softmax),
            _ => Err(Error::UnknownName { what: "activation", valid: "tanh, sigmoid, linear, softmax" }),
        }
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// Numerically stable softmax over a vector of pre-activations.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|&v| libm::exp(v - max)).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

// Coefficients (ascending powers) of the polynomial P_n with
// d^n/dz^n f(z) = P_n(f(z)), for f' = q(f) with q quadratic.
// P_{n+1}(u) = P_n'(u) * q(u).
const POLY_LEN: usize = MAX_ORDER + 3;

type Poly = [f64; POLY_LEN];

const fn derivative_polys(q: [f64; 3]) -> [Poly; MAX_ORDER + 2] {
    let mut polys = [[0.0; POLY_LEN]; MAX_ORDER + 2];
    polys[0][1] = 1.0;
    let mut n = 0;
    while n < MAX_ORDER + 1 {
        // derivative of P_n
        let mut dp = [0.0; POLY_LEN];
        let mut i = 1;
        while i < POLY_LEN {
            dp[i - 1] = polys[n][i] * i as f64;
            i += 1;
        }
        let mut next = [0.0; POLY_LEN];
        let mut a = 0;
        while a < POLY_LEN {
            let mut b = 0;
            while b < 3 {
                if a + b < POLY_LEN {
                    next[a + b] += dp[a] * q[b];
                }
                b += 1;
            }
            a += 1;
        }
        polys[n + 1] = next;
        n += 1;
    }
    polys
}

// tanh' = 1 - t^2
static TANH_POLYS: [Poly; MAX_ORDER + 2] = derivative_polys([1.0, 0.0, -1.0]);
// sigmoid' = s - s^2
static SIGMOID_POLYS: [Poly; MAX_ORDER + 2] = derivative_polys([0.0, 1.0, -1.0]);

fn horner(poly: &Poly, u: f64) -> f64 {
    poly.iter().rev().fold(0.0, |acc, &c| acc * u + c)
}

/// Writes `[f(z), f'(z), ..., f^(n)(z)]` into `out` where `n = out.len() - 1 <= 8`.
pub(crate) fn fill_activation_derivs(kind: ActivationKind, z: f64, out: &mut [f64]) -> Result<()> {
    debug_assert!(out.len() <= MAX_ORDER + 2);
    match kind {
        ActivationKind::Tanh | ActivationKind::Sigmoid => {
            let (u, polys) =
                if kind == ActivationKind::Tanh { (libm::tanh(z), &TANH_POLYS) } else { (sigmoid(z), &SIGMOID_POLYS) };
            for (n, slot) in out.iter_mut().enumerate() {
                *slot = horner(&polys[n], u);
            }
            Ok(())
        }
        ActivationKind::Linear => {
            out.fill(0.0);
            out[0] = z;
            if out.len() > 1 {
                out[1] = 1.0;
            }
            Ok(())
        }
        ActivationKind::Softmax => Err(Error::UnsupportedActivation(kind)),
    }
}

/// Derivatives `[σ(z), σ'(z), ..., σ^(order)(z)]` of a scalar activation.
pub fn activation_derivs(kind: ActivationKind, z: f64, order: usize) -> Result<Vec<f64>> {
    check_order(order)?;
    let mut out = alloc::vec![0.0; order + 1];
    fill_activation_derivs(kind, z, &mut out)?;
    Ok(out)
}

/// Taylor coefficients of `σ ∘ f` given the jet of `f`.
pub fn compose_activation(kind: ActivationKind, jet: &TaylorJet) -> Result<TaylorJet> {
    let mut d = [0.0; MAX_ORDER + 1];
    fill_activation_derivs(kind, jet.value(), &mut d[..=jet.order()])?;
    Ok(jet.compose_derivs(&d))
}
