//! `model.ckpt`: a TOML document holding the network layout and every
//! weight and bias, written with 17 significant digits so that loading
//! reproduces the parameters bit for bit.
//!
//! ```toml
//! format = "sextic-pinn-checkpoint"
//! version = 1
//! problem = "example1"
//!
//! [network]
//! hidden_sizes = [16]
//! hidden_activation = "tanh"
//! output_activation = "linear"
//! init_scheme = "glorot_normal"
//! seed = 42
//!
//! [[layers]]
//! fan_in = 1
//! fan_out = 16
//! weights = [...]   # row-major (fan_out, fan_in)
//! bias = [...]
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;
use sextic_pinn_core::{ActivationKind, Layer, MlpParams, NetworkConfig};

use crate::error::{Error, Result};

pub const FORMAT: &str = "sextic-pinn-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    /// Builtin problem the parameters were trained on, if any.
    pub problem: Option<String>,
    pub network: NetworkConfig,
    pub params: MlpParams,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCheckpoint {
    format: String,
    version: u32,
    problem: Option<String>,
    network: RawNetwork,
    layers: Vec<RawLayer>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    hidden_sizes: Vec<usize>,
    hidden_activation: String,
    output_activation: String,
    init_scheme: String,
    seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayer {
    fan_in: usize,
    fan_out: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

fn write_array(out: &mut String, key: &str, values: &[f64]) {
    let _ = write!(out, "{key} = [");
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{v:.16e}");
    }
    out.push_str("]\n");
}

impl Checkpoint {
    pub fn new(problem: Option<&str>, network: NetworkConfig, params: MlpParams) -> Self {
        Self { problem: problem.map(str::to_owned), network, params }
    }

    pub fn to_toml_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "format = \"{FORMAT}\"");
        let _ = writeln!(out, "version = {VERSION}");
        if let Some(p) = &self.problem {
            let _ = writeln!(out, "problem = \"{p}\"");
        }
        let sizes: Vec<String> = self.params.hidden_sizes().iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "\n[network]");
        let _ = writeln!(out, "hidden_sizes = [{}]", sizes.join(", "));
        let _ = writeln!(out, "hidden_activation = \"{}\"", self.params.hidden_activation());
        let _ = writeln!(out, "output_activation = \"{}\"", NetworkConfig::OUTPUT_ACTIVATION);
        let _ = writeln!(out, "init_scheme = \"{}\"", self.network.init_scheme.name());
        let _ = writeln!(out, "seed = {}", self.network.seed);
        for layer in self.params.layers() {
            let _ = writeln!(out, "\n[[layers]]");
            let _ = writeln!(out, "fan_in = {}", layer.fan_in());
            let _ = writeln!(out, "fan_out = {}", layer.fan_out());
            write_array(&mut out, "weights", layer.weights());
            write_array(&mut out, "bias", layer.bias());
        }
        out
    }

    pub fn from_toml_str(text: &str) -> std::result::Result<Self, String> {
        let raw: RawCheckpoint = toml::from_str(text).map_err(|e| e.to_string())?;
        if raw.format != FORMAT {
            return Err(format!("unexpected format `{}`", raw.format));
        }
        if raw.version != VERSION {
            return Err(format!("unsupported version {}", raw.version));
        }
        let output: ActivationKind = raw.network.output_activation.parse().map_err(|e| format!("{e}"))?;
        if output != NetworkConfig::OUTPUT_ACTIVATION {
            return Err(format!("output activation must be linear, found `{output}`"));
        }
        let network = NetworkConfig {
            hidden_sizes: raw.network.hidden_sizes,
            hidden_activation: raw.network.hidden_activation.parse().map_err(|e| format!("{e}"))?,
            init_scheme: raw.network.init_scheme.parse().map_err(|e| format!("{e}"))?,
            seed: raw.network.seed,
        };
        network.validate().map_err(|e| e.to_string())?;
        let layers = raw
            .layers
            .into_iter()
            .map(|l| Layer::from_parts(l.fan_in, l.fan_out, l.weights, l.bias))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let params = MlpParams::from_layers(layers, network.hidden_activation).map_err(|e| e.to_string())?;
        if params.hidden_sizes() != network.hidden_sizes {
            return Err("layer shapes disagree with network.hidden_sizes".into());
        }
        Ok(Self { problem: raw.problem, network, params })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_toml_string()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|message| Error::Checkpoint { path: path.into(), message })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        let network = NetworkConfig { hidden_sizes: vec![4, 3], seed: 7, ..Default::default() };
        let params = MlpParams::init(&network).unwrap();
        Checkpoint::new(Some("example2"), network, params)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let ck = sample();
        let back = Checkpoint::from_toml_str(&ck.to_toml_string()).unwrap();
        assert_eq!(back, ck);
        for x in [0.0, 0.31, 1.0] {
            assert_eq!(back.params.forward(x).to_bits(), ck.params.forward(x).to_bits());
        }
    }

    #[test]
    fn seventeen_significant_digits() {
        let text = sample().to_toml_string();
        let line = text.lines().find(|l| l.starts_with("weights")).unwrap();
        let first = line.trim_start_matches("weights = [").split(',').next().unwrap();
        let mantissa = first.trim().trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.replace('.', "").len(), 17, "{first}");
    }

    proptest::proptest! {
        #[test]
        fn any_finite_params_round_trip(
            values in proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO, 25),
            seed in proptest::prelude::any::<u64>(),
        ) {
            // Layout [6]: 6 + 6 + 6 + 1 = 19 parameters; the tail is unused.
            let network = NetworkConfig { hidden_sizes: vec![6], seed, ..Default::default() };
            let mut params = MlpParams::zeros(&[6], network.hidden_activation).unwrap();
            params.set_flat(&values[..params.num_params()]).unwrap();
            let ck = Checkpoint::new(None, network, params);
            let back = Checkpoint::from_toml_str(&ck.to_toml_string()).unwrap();
            let bits = |c: &Checkpoint| c.params.to_flat().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            proptest::prop_assert_eq!(bits(&back), bits(&ck));
            proptest::prop_assert_eq!(back.network.seed, seed);
        }
    }

    #[test]
    fn rejects_corrupt_documents() {
        let text = sample().to_toml_string();
        assert!(Checkpoint::from_toml_str("not toml [").is_err());
        assert!(Checkpoint::from_toml_str(&text.replace(FORMAT, "other")).is_err());
        assert!(Checkpoint::from_toml_str(&text.replace("fan_out = 3", "fan_out = 2")).is_err());
        assert!(Checkpoint::from_toml_str(&text.replace("\"linear\"", "\"tanh\"")).is_err());
        assert!(Checkpoint::from_toml_str(&format!("{text}\nextra = 1\n")).is_err());
    }
}
