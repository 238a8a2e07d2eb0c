//! Flat TOML run configuration. Every key is optional; absent keys take the
//! training defaults, and command-line flags override the file.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sextic_pinn_core::{ActivationKind, CombineMode, InitScheme, OptimizerKind, TrainConfig};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfigFile {
    pub problem: Option<String>,
    pub hidden_sizes: Option<Vec<usize>>,
    pub activation: Option<String>,
    pub init_scheme: Option<String>,
    pub optimizer: Option<String>,
    pub learning_rate: Option<f64>,
    pub epochs: Option<usize>,
    pub grid_points: Option<usize>,
    pub combine_mode: Option<String>,
    pub stop_epsilon: Option<f64>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

impl CliConfigFile {
    pub fn from_toml_str(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|message| Error::Config { path: path.into(), message })
    }

    /// Keys set in `other` replace the ones here.
    pub fn overlay(mut self, other: CliConfigFile) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            problem,
            hidden_sizes,
            activation,
            init_scheme,
            optimizer,
            learning_rate,
            epochs,
            grid_points,
            combine_mode,
            stop_epsilon,
            seed,
            output_dir
        );
        self
    }

    /// Resolves into a validated training configuration and output directory.
    pub fn resolve(&self) -> std::result::Result<RunConfig, String> {
        let mut train = TrainConfig::default();
        if let Some(p) = &self.problem {
            train.problem_name = p.clone();
        }
        if let Some(h) = &self.hidden_sizes {
            train.network.hidden_sizes = h.clone();
        }
        if let Some(a) = &self.activation {
            train.network.hidden_activation = a.parse::<ActivationKind>().map_err(|e| e.to_string())?;
        }
        if let Some(s) = &self.init_scheme {
            train.network.init_scheme = s.parse::<InitScheme>().map_err(|e| e.to_string())?;
        }
        if let Some(o) = &self.optimizer {
            train.optimizer.kind = o.parse::<OptimizerKind>().map_err(|e| e.to_string())?;
        }
        if let Some(lr) = self.learning_rate {
            train.optimizer.learning_rate = lr;
        }
        if let Some(e) = self.epochs {
            train.epochs = e;
        }
        if let Some(g) = self.grid_points {
            train.grid_points = g;
        }
        if let Some(m) = &self.combine_mode {
            train.combine_mode = m.parse::<CombineMode>().map_err(|e| e.to_string())?;
        }
        train.stop_epsilon = self.stop_epsilon;
        if let Some(s) = self.seed {
            train.seed = s;
        }
        train.network.seed = train.seed;
        train.validate().map_err(|e| e.to_string())?;
        Ok(RunConfig { train, output_dir: self.output_dir.clone().unwrap_or_else(|| PathBuf::from(".")) })
    }
}

/// Fully resolved `train` invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub output_dir: PathBuf,
}

impl fmt::Display for RunConfig {
    /// Echoes the effective configuration in the config-file syntax.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = &self.train;
        let sizes: Vec<String> = t.network.hidden_sizes.iter().map(ToString::to_string).collect();
        writeln!(f, "problem = \"{}\"", t.problem_name)?;
        writeln!(f, "hidden_sizes = [{}]", sizes.join(", "))?;
        writeln!(f, "activation = \"{}\"", t.network.hidden_activation)?;
        writeln!(f, "init_scheme = \"{}\"", t.network.init_scheme.name())?;
        writeln!(f, "optimizer = \"{}\"", t.optimizer.kind.name())?;
        writeln!(f, "learning_rate = {:e}", t.optimizer.learning_rate)?;
        writeln!(f, "epochs = {}", t.epochs)?;
        writeln!(f, "grid_points = {}", t.grid_points)?;
        writeln!(f, "combine_mode = \"{}\"", t.combine_mode.name())?;
        match t.stop_epsilon {
            Some(eps) => writeln!(f, "stop_epsilon = {eps:e}")?,
            None => writeln!(f, "# stop_epsilon unset")?,
        }
        writeln!(f, "seed = {}", t.seed)?;
        write!(f, "output_dir = \"{}\"", self.output_dir.display())
    }
}
