use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use percspec::LatticeSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Experiment parameters. JSON config files use exactly these field names;
/// missing fields take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dims: Vec<usize>,
    pub probs: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub grid_points: usize,
    pub margin: f64,
    /// `None` means twice the grid spacing.
    pub epsilon: Option<f64>,
    pub normalized: bool,
    pub output_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dims: Vec::new(),
            probs: Vec::new(),
            trials: 50,
            seed: 42,
            grid_points: 2000,
            margin: 0.1,
            epsilon: None,
            normalized: false,
            output_path: None,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("bad config {}: {e}", path.display())))
    }

    /// File values (if `--config` is given) overridden by explicit flags.
    pub fn resolve(args: &RunArgs) -> Result<Self, CliError> {
        let mut cfg = match &args.config {
            Some(path) => Self::from_json_file(path)?,
            None => Self::default(),
        };
        if let Some(dims) = &args.dims {
            cfg.dims = dims.clone();
        }
        if let Some(probs) = &args.probs {
            cfg.probs = probs.clone();
        }
        if let Some(trials) = args.trials {
            cfg.trials = trials;
        }
        if let Some(seed) = args.seed {
            cfg.seed = seed;
        }
        if let Some(points) = args.grid_points {
            cfg.grid_points = points;
        }
        if let Some(margin) = args.margin {
            cfg.margin = margin;
        }
        if let Some(eps) = &args.epsilon {
            cfg.epsilon = eps.0;
        }
        if args.normalized {
            cfg.normalized = true;
        }
        if let Some(out) = &args.output {
            cfg.output_path = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.dims.is_empty() {
            return Err(CliError::config("--dims is required (or `dims` in the config file)"));
        }
        self.spec()?;
        if self.trials == 0 {
            return Err(CliError::config("trials must be at least 1"));
        }
        if self.grid_points < 16 {
            return Err(CliError::config("grid_points must be at least 16"));
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return Err(CliError::config("margin must be a nonnegative number"));
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(CliError::config("epsilon must be positive"));
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<LatticeSpec, CliError> {
        LatticeSpec::new(self.dims.clone(), self.probs.clone()).map_err(|e| CliError::config(e.to_string()))
    }
}

/// `auto` or a positive number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonArg(pub Option<f64>);

impl std::str::FromStr for EpsilonArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Self(None));
        }
        s.parse::<f64>()
            .map(|v| Self(Some(v)))
            .map_err(|_| format!("expected `auto` or a number, got `{s}`"))
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Lattice sizes, e.g. `30,50`.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Link probabilities per dimension, e.g. `0.7,0.5`.
    #[arg(long, value_delimiter = ',')]
    pub probs: Option<Vec<f64>>,
    /// Monte Carlo trials [default: 50].
    #[arg(long)]
    pub trials: Option<usize>,
    /// Master seed [default: 42].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Grid points [default: 2000].
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Grid margin beyond the spectrum [default: 0.1].
    #[arg(long)]
    pub margin: Option<f64>,
    /// Smoothing width, or `auto` for twice the grid spacing.
    #[arg(long)]
    pub epsilon: Option<EpsilonArg>,
    /// Compare √γ·Δ⁻¹A against √γ·W instead of the scaled adjacency.
    #[arg(long)]
    pub normalized: bool,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// JSON config file; explicit flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
}
