//! Scalar-in, scalar-out feedforward network.
//!
//! Parameters are stored per layer as a row-major weight matrix of shape
//! `(fan_out, fan_in)` plus a bias vector. The flattened parameter order used
//! by optimizers, gradients and checkpoints is: layer by layer, all weights
//! row-major, then that layer's biases.
//!
//! Input derivatives `ŷ, ŷ', ..., ŷ^(K)` come from pushing a Taylor jet of the
//! input through every layer. Their parameter gradients come from a reverse
//! sweep over jets: since every layer is either a scalar-weighted sum or a
//! multiplication by the jet `σ'∘z`, the sensitivity of the output jet to a
//! pre-activation jet is itself a jet.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::error::{Error, Result};
use crate::taylor::{factorial, fill_activation_derivs, softmax, ActivationKind, TaylorJet, MAX_ORDER};

/// Highest input-derivative order whose parameter gradient is available.
pub const MAX_JACOBIAN_ORDER: usize = MAX_ORDER - 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum InitScheme {
    GlorotUniform,
    #[default]
    GlorotNormal,
}

impl InitScheme {
    pub fn name(self) -> &'static str {
        match self {
            InitScheme::GlorotUniform => "glorot_uniform",
            InitScheme::GlorotNormal => "glorot_normal",
        }
    }

    /// Standard deviation for the normal scheme, half-width for the uniform one.
    pub fn scale(self, fan_in: usize, fan_out: usize) -> f64 {
        let fans = (fan_in + fan_out) as f64;
        match self {
            InitScheme::GlorotUniform => libm::sqrt(6.0 / fans),
            InitScheme::GlorotNormal => libm::sqrt(2.0 / fans),
        }
    }
}

impl core::str::FromStr for InitScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "glorot_uniform" | "glorotuniform" => Ok(InitScheme::GlorotUniform),
            "glorot_normal" | "glorotnormal" => Ok(InitScheme::GlorotNormal),
            _ => Err(Error::UnknownName { what: "init scheme", valid: "glorot_uniform, glorot_normal" }),
        }
    }
}

/// Network layout. Input and output are always one-dimensional and the
/// output layer is always linear.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkConfig {
    pub hidden_sizes: Vec<usize>,
    pub hidden_activation: ActivationKind,
    pub init_scheme: InitScheme,
    pub seed: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            hidden_sizes: vec![16],
            hidden_activation: ActivationKind::Tanh,
            init_scheme: InitScheme::GlorotNormal,
            seed: 42,
        }
    }
}

impl NetworkConfig {
    pub const INPUT_DIM: usize = 1;
    pub const OUTPUT_DIM: usize = 1;
    pub const OUTPUT_ACTIVATION: ActivationKind = ActivationKind::Linear;

    pub fn validate(&self) -> Result<()> {
        if self.hidden_sizes.is_empty() {
            return Err(Error::InvalidConfig("hidden_sizes must not be empty".into()));
        }
        if self.hidden_sizes.contains(&0) {
            return Err(Error::InvalidConfig("every hidden layer needs at least one neuron".into()));
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` for every layer, hidden layers first.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut fan_in = Self::INPUT_DIM;
        let mut shapes = Vec::with_capacity(self.hidden_sizes.len() + 1);
        for &h in &self.hidden_sizes {
            shapes.push((fan_in, h));
            fan_in = h;
        }
        shapes.push((fan_in, Self::OUTPUT_DIM));
        shapes
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    fan_in: usize,
    fan_out: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self { fan_in, fan_out, weights: vec![0.0; fan_in * fan_out], bias: vec![0.0; fan_out] }
    }

    pub fn from_parts(fan_in: usize, fan_out: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if weights.len() != fan_in * fan_out {
            return Err(Error::LengthMismatch { expected: fan_in * fan_out, actual: weights.len() });
        }
        if bias.len() != fan_out {
            return Err(Error::LengthMismatch { expected: fan_out, actual: bias.len() });
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("layer parameters must be finite".into()));
        }
        Ok(Self { fan_in, fan_out, weights, bias })
    }

    pub fn fan_in(&self) -> usize {
        self.fan_in
    }

    pub fn fan_out(&self) -> usize {
        self.fan_out
    }

    /// Row-major `(fan_out, fan_in)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    #[inline]
    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.fan_in + col]
    }

    pub fn weight_mut(&mut self, row: usize, col: usize) -> &mut f64 {
        &mut self.weights[row * self.fan_in + col]
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    fn num_params(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

/// Anything that can be evaluated as a candidate solution: a trained network,
/// or an analytic stand-in in tests.
pub trait Approximant {
    fn value(&self, x: f64) -> f64;

    /// `[ŷ(x), ŷ'(x), ..., ŷ^(order)(x)]`
    fn derivatives(&self, x: f64, order: usize) -> Result<Vec<f64>>;
}

/// All weights and biases of the network.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpParams {
    layers: Vec<Layer>,
    hidden_activation: ActivationKind,
}

impl MlpParams {
    /// Glorot-initialized weights and zero biases. The generator is ChaCha20
    /// seeded from `config.seed`; weights are drawn layer by layer in
    /// row-major order.
    pub fn init(config: &NetworkConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
        let layers = config
            .layer_shapes()
            .into_iter()
            .map(|(fan_in, fan_out)| {
                let mut layer = Layer::zeros(fan_in, fan_out);
                let scale = config.init_scheme.scale(fan_in, fan_out);
                match config.init_scheme {
                    InitScheme::GlorotNormal => {
                        let dist = Normal::new(0.0, scale).expect("finite positive std");
                        layer.weights.iter_mut().for_each(|w| *w = dist.sample(&mut rng));
                    }
                    InitScheme::GlorotUniform => {
                        let dist = Uniform::new_inclusive(-scale, scale).expect("finite range");
                        layer.weights.iter_mut().for_each(|w| *w = dist.sample(&mut rng));
                    }
                }
                layer
            })
            .collect();
        Ok(Self { layers, hidden_activation: config.hidden_activation })
    }

    /// All-zero parameters with the given layout.
    pub fn zeros(hidden_sizes: &[usize], hidden_activation: ActivationKind) -> Result<Self> {
        let config = NetworkConfig { hidden_sizes: hidden_sizes.to_vec(), hidden_activation, ..Default::default() };
        config.validate()?;
        let layers = config.layer_shapes().into_iter().map(|(i, o)| Layer::zeros(i, o)).collect();
        Ok(Self { layers, hidden_activation })
    }

    /// Assembles parameters from explicit layers, checking that shapes chain
    /// from a scalar input to a scalar output.
    pub fn from_layers(layers: Vec<Layer>, hidden_activation: ActivationKind) -> Result<Self> {
        if layers.len() < 2 {
            return Err(Error::InvalidConfig("need at least one hidden layer and an output layer".into()));
        }
        let mut fan_in = NetworkConfig::INPUT_DIM;
        for layer in &layers {
            if layer.fan_in != fan_in {
                return Err(Error::LengthMismatch { expected: fan_in, actual: layer.fan_in });
            }
            fan_in = layer.fan_out;
        }
        if fan_in != NetworkConfig::OUTPUT_DIM {
            return Err(Error::LengthMismatch { expected: NetworkConfig::OUTPUT_DIM, actual: fan_in });
        }
        Ok(Self { layers, hidden_activation })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn hidden_activation(&self) -> ActivationKind {
        self.hidden_activation
    }

    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1].iter().map(|l| l.fan_out).collect()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(Layer::num_params).sum()
    }

    /// Index of the output bias in the flattened vector (always the last entry).
    pub fn output_bias_index(&self) -> usize {
        self.num_params() - 1
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for layer in &self.layers {
            out.extend_from_slice(&layer.weights);
            out.extend_from_slice(&layer.bias);
        }
        out
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::LengthMismatch { expected: self.num_params(), actual: flat.len() });
        }
        let mut rest = flat;
        for layer in &mut self.layers {
            let (w, tail) = rest.split_at(layer.weights.len());
            let (b, tail) = tail.split_at(layer.bias.len());
            layer.weights.copy_from_slice(w);
            layer.bias.copy_from_slice(b);
            rest = tail;
        }
        Ok(())
    }

    fn is_single_hidden(&self) -> bool {
        self.layers.len() == 2
    }

    pub fn forward(&self, x: f64) -> f64 {
        let mut a = vec![x];
        let (output, hidden) = self.layers.split_last().expect("at least two layers");
        for layer in hidden {
            let z = affine(layer, &a);
            a = match self.hidden_activation {
                ActivationKind::Softmax => softmax(&z),
                kind => z.into_iter().map(|v| kind.apply(v).expect("scalar activation")).collect(),
            };
        }
        affine(output, &a)[0]
    }

    fn check_derivative_support(&self) -> Result<()> {
        if !self.hidden_activation.supports_derivatives() {
            return Err(Error::UnsupportedActivation(self.hidden_activation));
        }
        Ok(())
    }

    /// Output jet at `x` truncated at `order`.
    pub fn output_jet(&self, x: f64, order: usize) -> Result<TaylorJet> {
        self.check_derivative_support()?;
        let mut a = vec![TaylorJet::variable(x, order)?];
        let (output, hidden) = self.layers.split_last().expect("at least two layers");
        let mut d = [0.0; MAX_ORDER + 1];
        for layer in hidden {
            a = affine_jets(layer, &a, order)
                .into_iter()
                .map(|z| {
                    fill_activation_derivs(self.hidden_activation, z.value(), &mut d[..=order]).expect("checked above");
                    z.compose_derivs(&d)
                })
                .collect();
        }
        Ok(affine_jets(output, &a, order)[0])
    }

    /// `[ŷ(x), ŷ'(x), ..., ŷ^(order)(x)]`, `order <= 7`.
    pub fn derivatives(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        Ok(self.output_jet(x, order)?.derivatives())
    }

    /// Exact `∂ŷ^(k)(x)/∂p` for `k = 0..=order` and every flattened parameter
    /// `p`. Uses the closed form when the network has a single hidden layer,
    /// otherwise [`Self::jacobian_jet`].
    pub fn derivative_param_jacobian(&self, x: f64, order: usize) -> Result<Jacobian> {
        if self.is_single_hidden() {
            self.jacobian_closed_form(x, order)
        } else {
            self.jacobian_jet(x, order)
        }
    }

    /// Jacobian by a reverse sweep over jets; valid for any depth.
    pub fn jacobian_jet(&self, x: f64, order: usize) -> Result<Jacobian> {
        self.check_jacobian_order(order)?;
        self.check_derivative_support()?;

        let n_layers = self.layers.len();
        let act = self.hidden_activation;
        // inputs[l] holds the activation jets feeding layer l
        let mut inputs: Vec<Vec<TaylorJet>> = Vec::with_capacity(n_layers);
        // slopes[l][r] = σ'∘z for hidden layer l
        let mut slopes: Vec<Vec<TaylorJet>> = Vec::with_capacity(n_layers - 1);
        inputs.push(vec![TaylorJet::variable_unchecked(x, order)]);

        let mut d = [0.0; MAX_ORDER + 2];
        for layer in &self.layers[..n_layers - 1] {
            let z = affine_jets(layer, inputs.last().expect("seeded"), order);
            let mut a = Vec::with_capacity(z.len());
            let mut s = Vec::with_capacity(z.len());
            for zj in z {
                fill_activation_derivs(act, zj.value(), &mut d[..=order + 1]).expect("checked above");
                a.push(zj.compose_derivs(&d[..=order]));
                s.push(zj.compose_derivs(&d[1..=order + 1]));
            }
            inputs.push(a);
            slopes.push(s);
        }

        // sens[r] = ∂(output jet)/∂(z_r of the current layer), as a jet
        let mut sens = vec![TaylorJet::constant_unchecked(1.0, order)];
        let mut jac = Jacobian::zeros(order, self.num_params());
        let out = affine_jets(&self.layers[n_layers - 1], inputs.last().expect("seeded"), order)[0];
        jac.values = out.derivatives();
        let mut offset = self.num_params();
        for l in (0..n_layers).rev() {
            let layer = &self.layers[l];
            offset -= layer.num_params();
            let a_in = &inputs[l];
            for r in 0..layer.fan_out {
                for c in 0..layer.fan_in {
                    let g = sens[r].mul_unchecked(&a_in[c]);
                    jac.set_from_jet(offset + r * layer.fan_in + c, &g);
                }
                jac.set_from_jet(offset + layer.weights.len() + r, &sens[r]);
            }
            if l > 0 {
                let s = &slopes[l - 1];
                sens = (0..layer.fan_in)
                    .map(|c| {
                        let mut acc = TaylorJet::zero_unchecked(order);
                        for (r, sr) in sens.iter().enumerate() {
                            acc.add_scaled(layer.weight(r, c), sr);
                        }
                        acc.mul_unchecked(&s[c])
                    })
                    .collect();
            }
        }
        Ok(jac)
    }

    /// Closed-form Jacobian for a single hidden layer `ŷ = Σ v_i σ(w_i x + b_i) + c`:
    /// `∂ŷ⁽ᵏ⁾/∂v_i = w_iᵏ σ⁽ᵏ⁾(z_i)`, `∂ŷ⁽ᵏ⁾/∂b_i = v_i w_iᵏ σ⁽ᵏ⁺¹⁾(z_i)`,
    /// `∂ŷ⁽ᵏ⁾/∂w_i = v_i (k w_iᵏ⁻¹ σ⁽ᵏ⁾(z_i) + w_iᵏ x σ⁽ᵏ⁺¹⁾(z_i))`, `∂ŷ⁽ᵏ⁾/∂c = [k = 0]`.
    pub fn jacobian_closed_form(&self, x: f64, order: usize) -> Result<Jacobian> {
        self.check_jacobian_order(order)?;
        self.check_derivative_support()?;
        if !self.is_single_hidden() {
            return Err(Error::InvalidConfig("closed-form Jacobian needs exactly one hidden layer".into()));
        }
        let hidden = &self.layers[0];
        let output = &self.layers[1];
        let h = hidden.fan_out;
        let n = self.num_params();
        // offsets: w (h), b (h), v (h), c (1)
        let (w_off, b_off, v_off) = (0, h, 2 * h);
        let mut jac = Jacobian::zeros(order, n);
        let mut d = [0.0; MAX_ORDER + 2];
        for i in 0..h {
            let w = hidden.weights[i];
            let v = output.weights[i];
            let z = w * x + hidden.bias[i];
            fill_activation_derivs(self.hidden_activation, z, &mut d[..=order + 1]).expect("checked above");
            let mut w_pow = 1.0; // w^k
            let mut w_pow_prev = 0.0; // k * w^(k-1)
            for k in 0..=order {
                let row = jac.row_mut(k);
                row[v_off + i] = w_pow * d[k];
                row[b_off + i] = v * w_pow * d[k + 1];
                row[w_off + i] = v * (w_pow_prev * d[k] + w_pow * x * d[k + 1]);
                w_pow_prev = (k + 1) as f64 * w_pow;
                w_pow *= w;
            }
        }
        jac.row_mut(0)[n - 1] = 1.0;
        for k in 0..=order {
            let row = &jac.data[k * n..(k + 1) * n];
            jac.values[k] = output.weights.iter().zip(&row[v_off..v_off + h]).fold(0.0, |acc, (v, d)| acc + v * d);
        }
        jac.values[0] += output.bias[0];
        Ok(jac)
    }

    fn check_jacobian_order(&self, order: usize) -> Result<()> {
        if order > MAX_JACOBIAN_ORDER {
            return Err(Error::OrderTooHigh { requested: order, max: MAX_JACOBIAN_ORDER });
        }
        Ok(())
    }
}

impl Approximant for MlpParams {
    fn value(&self, x: f64) -> f64 {
        self.forward(x)
    }

    fn derivatives(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        MlpParams::derivatives(self, x, order)
    }
}

fn affine(layer: &Layer, input: &[f64]) -> Vec<f64> {
    (0..layer.fan_out)
        .map(|r| {
            let row = &layer.weights[r * layer.fan_in..(r + 1) * layer.fan_in];
            row.iter().zip(input).fold(layer.bias[r], |acc, (w, a)| acc + w * a)
        })
        .collect()
}

fn affine_jets(layer: &Layer, input: &[TaylorJet], order: usize) -> Vec<TaylorJet> {
    (0..layer.fan_out)
        .map(|r| {
            let mut z = TaylorJet::constant_unchecked(layer.bias[r], order);
            for (c, a) in input.iter().enumerate() {
                z.add_scaled(layer.weight(r, c), a);
            }
            z
        })
        .collect()
}

/// Dense `(order + 1) × n_params` matrix; row `k` holds `∂ŷ⁽ᵏ⁾/∂p`.
/// Also carries the derivatives `ŷ⁽ᵏ⁾` themselves, which fall out of the
/// same sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Jacobian {
    order: usize,
    n_params: usize,
    data: Vec<f64>,
    values: Vec<f64>,
}

impl Jacobian {
    fn zeros(order: usize, n_params: usize) -> Self {
        Self { order, n_params, data: vec![0.0; (order + 1) * n_params], values: vec![0.0; order + 1] }
    }

    /// `[ŷ, ŷ', ..., ŷ^(order)]` at the evaluation point.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.n_params..(k + 1) * self.n_params]
    }

    fn row_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.data[k * self.n_params..(k + 1) * self.n_params]
    }

    pub fn get(&self, k: usize, p: usize) -> f64 {
        self.data[k * self.n_params + p]
    }

    fn set_from_jet(&mut self, p: usize, jet: &TaylorJet) {
        for (k, c) in jet.coeffs().iter().enumerate() {
            self.data[k * self.n_params + p] = c * factorial(k);
        }
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Jacobian) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| libm::fabs(a - b)).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single_neuron(w: f64, b: f64, v: f64, c: f64) -> MlpParams {
        MlpParams::from_layers(
            vec![
                Layer::from_parts(1, 1, vec![w], vec![b]).unwrap(),
                Layer::from_parts(1, 1, vec![v], vec![c]).unwrap(),
            ],
            ActivationKind::Tanh,
        )
        .unwrap()
    }

    fn seeded(seed: u64, hidden: &[usize]) -> MlpParams {
        let mut p =
            MlpParams::init(&NetworkConfig { hidden_sizes: hidden.to_vec(), seed, ..Default::default() }).unwrap();
        // nonzero biases so every Jacobian column is exercised
        let mut flat = p.to_flat();
        for (i, v) in flat.iter_mut().enumerate() {
            if *v == 0.0 {
                *v = 0.1 * ((i % 7) as f64 - 3.0);
            }
        }
        p.set_flat(&flat).unwrap();
        p
    }

    #[test]
    fn glorot_scales() {
        assert_relative_eq!(InitScheme::GlorotNormal.scale(1, 16), 0.34299717028501764, epsilon = 1e-15);
        assert_relative_eq!(InitScheme::GlorotUniform.scale(1, 16), 0.5940885257860046, epsilon = 1e-15);
    }

    #[test]
    fn init_zero_biases_and_shapes() {
        let p = MlpParams::init(&NetworkConfig { hidden_sizes: vec![16, 8], ..Default::default() }).unwrap();
        assert_eq!(p.num_params(), 16 + 16 + 16 * 8 + 8 + 8 + 1);
        assert!(p.layers().iter().all(|l| l.bias().iter().all(|&b| b == 0.0)));
        assert_eq!(p.layers()[1].fan_in(), p.layers()[0].fan_out());
        let u =
            MlpParams::init(&NetworkConfig { init_scheme: InitScheme::GlorotUniform, ..Default::default() }).unwrap();
        let lim = InitScheme::GlorotUniform.scale(1, 16);
        assert!(u.layers()[0].weights().iter().all(|w| w.abs() <= lim));
    }

    #[test]
    fn init_is_seed_deterministic() {
        let a = MlpParams::init(&NetworkConfig::default()).unwrap();
        let b = MlpParams::init(&NetworkConfig::default()).unwrap();
        assert_eq!(a.to_flat(), b.to_flat());
        let c = MlpParams::init(&NetworkConfig { seed: 43, ..Default::default() }).unwrap();
        assert_ne!(a.to_flat(), c.to_flat());
    }

    #[test]
    fn invalid_configs() {
        let empty = NetworkConfig { hidden_sizes: vec![], ..Default::default() };
        assert!(MlpParams::init(&empty).is_err());
        let zero = NetworkConfig { hidden_sizes: vec![4, 0], ..Default::default() };
        assert!(MlpParams::init(&zero).is_err());
    }

    #[test]
    fn forward_examples() {
        let zero = MlpParams::zeros(&[16], ActivationKind::Tanh).unwrap();
        assert_eq!(zero.forward(0.7), 0.0);
        let p = single_neuron(1.0, 0.0, 1.0, 0.0);
        assert_eq!(p.forward(0.0), 0.0);
        assert_relative_eq!(p.forward(1.0), 0.7615941559557649, epsilon = 1e-15);
    }

    #[test]
    fn softmax_hidden_layer_is_forward_only() {
        let mut p = MlpParams::init(&NetworkConfig {
            hidden_sizes: vec![3],
            hidden_activation: ActivationKind::Softmax,
            ..Default::default()
        })
        .unwrap();
        // ones on the output: softmax sums to one
        let out = &mut p.layers_mut()[1];
        for i in 0..3 {
            *out.weight_mut(0, i) = 1.0;
        }
        assert_relative_eq!(p.forward(0.4), 1.0, epsilon = 1e-15);
        assert_eq!(p.derivatives(0.4, 2), Err(Error::UnsupportedActivation(ActivationKind::Softmax)));
        assert!(p.derivative_param_jacobian(0.4, 2).is_err());
    }

    #[test]
    fn derivative_examples() {
        let p = single_neuron(2.0, 0.0, 1.0, 0.0);
        let d = p.derivatives(0.0, 6).unwrap();
        let expected = [0.0, 2.0, 0.0, -16.0, 0.0, 512.0, 0.0];
        for (a, b) in d.iter().zip(expected) {
            assert!((a - b).abs() <= 1e-9, "{d:?}");
        }

        // ŷ = 3x + 1 through a linear hidden layer
        let lin = MlpParams::from_layers(
            vec![
                Layer::from_parts(1, 1, vec![3.0], vec![0.0]).unwrap(),
                Layer::from_parts(1, 1, vec![1.0], vec![1.0]).unwrap(),
            ],
            ActivationKind::Linear,
        )
        .unwrap();
        assert_eq!(lin.derivatives(0.0, 6).unwrap(), [1.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0]);

        let zero = MlpParams::zeros(&[16], ActivationKind::Tanh).unwrap();
        assert!(zero.derivatives(0.3, 6).unwrap().iter().all(|&v| v == 0.0));
        assert!(zero.derivatives(0.3, 8).is_err());
    }

    #[test]
    fn output_bias_column() {
        let p = seeded(3, &[16]);
        let jac = p.derivative_param_jacobian(0.8, 6).unwrap();
        let c = p.output_bias_index();
        assert_eq!(jac.get(0, c), 1.0);
        for k in 1..=6 {
            assert_eq!(jac.get(k, c), 0.0);
        }
    }

    #[test]
    fn jacobian_order_limit() {
        let p = seeded(3, &[4]);
        assert!(matches!(p.derivative_param_jacobian(0.1, 7), Err(Error::OrderTooHigh { .. })));
        assert!(matches!(p.jacobian_jet(0.1, 7), Err(Error::OrderTooHigh { .. })));
    }

    #[test]
    fn closed_form_matches_jet_sweep() {
        for seed in 0..5 {
            let p = seeded(seed, &[16]);
            for &x in &[0.0, 0.3, 1.0] {
                let a = p.jacobian_closed_form(x, 6).unwrap();
                let b = p.jacobian_jet(x, 6).unwrap();
                assert!(a.max_abs_diff(&b) <= 1e-10, "seed {seed} x {x}: {}", a.max_abs_diff(&b));
            }
        }
        assert!(seeded(0, &[3, 3]).jacobian_closed_form(0.1, 2).is_err());
    }

    #[test]
    fn flat_round_trip() {
        let p = seeded(9, &[5, 4]);
        let mut q = MlpParams::zeros(&[5, 4], ActivationKind::Tanh).unwrap();
        q.set_flat(&p.to_flat()).unwrap();
        assert_eq!(p, q);
        assert!(q.set_flat(&[0.0; 3]).is_err());
    }
}
