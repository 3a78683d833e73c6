//! Flat `key = value` run configuration.
//!
//! Values resolve in order: scenario preset, config file, `--set` flags.
//! Lines starting with `#` and blank lines are ignored.

use std::fmt;
use std::path::{Path, PathBuf};

use levarray_core::entanglement::Arity;
use levarray_core::optimizer::{RefineSettings, SymmetryMode};
use levarray_core::sweep::Axis;
use levarray_core::system::{DEFAULT_G_MAX, DEFAULT_KAPPA, DEFAULT_NBAR, DEFAULT_QUALITY_FACTOR};
use thiserror::Error;

use crate::scenario::ScenarioId;

/// Where a setting came from, for error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    File { path: PathBuf, line: usize },
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::File { path, line } => write!(f, "{}:{line}", path.display()),
            Origin::Flag => f.write_str("--set"),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{origin}: unknown key `{key}`")]
    UnknownKey { key: String, origin: Origin },

    #[error("{origin}: expected `key = value`, got `{text}`")]
    Malformed { text: String, origin: Origin },

    #[error("{origin}: bad value `{value}` for `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String, origin: Origin },

    #[error("invalid configuration: {0}")]
    Invalid(String),

    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Every accepted key, in documentation order.
pub const KEYS: &[&str] = &[
    "params.kappa",
    "params.quality_factor",
    "params.nbar",
    "params.g_max",
    "objective.arity",
    "objective.count",
    "objective.symmetry",
    "grid.landscape",
    "grid.two_particle",
    "grid.lambda1.start",
    "grid.lambda1.stop",
    "grid.lambda1.step",
    "grid.lambda2.start",
    "grid.lambda2.stop",
    "grid.lambda2.step",
    "cuts.lambda2",
    "cuts.lambda1.start",
    "cuts.lambda1.stop",
    "cuts.lambda1.step",
    "cuts.reference_nbar",
    "refine.seeds_per_axis",
    "refine.starts",
    "refine.max_iter",
    "refine.tol",
    "run.workers",
    "run.out",
    "run.oracle",
    "run.squeezing",
    "oracle.step",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    pub kappa: f64,
    pub quality_factor: f64,
    pub nbar: f64,
    pub g_max: f64,
    pub arity: Arity,
    pub count: u8,
    pub symmetry: SymmetryMode,
    /// Compute the full `(lambda1, lambda2)` landscape.
    pub landscape: bool,
    /// Two-particle modes (`lambda3 = 0`); the grid is then one-dimensional in lambda1.
    pub two_particle: bool,
    pub lambda1: Axis,
    pub lambda2: Axis,
    /// Fixed-lambda2 lines scanned along `cut_lambda1`.
    pub cut_lambda2: Vec<f64>,
    pub cut_lambda1: Axis,
    /// Repeats the landscape grid at a second occupation, e.g. `nbar = 0`.
    pub reference_nbar: Option<f64>,
    pub refine: RefineSettings,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub oracle: bool,
    pub oracle_step: f64,
    pub squeezing: bool,
}

impl ScenarioConfig {
    /// Reference physical parameters with a 0.02 landscape over `[0, 1.5]^2`
    /// and 0.01 steps along cut lines.
    pub fn base(scenario: ScenarioId) -> Self {
        Self {
            scenario,
            kappa: DEFAULT_KAPPA,
            quality_factor: DEFAULT_QUALITY_FACTOR,
            nbar: DEFAULT_NBAR,
            g_max: DEFAULT_G_MAX,
            arity: Arity::Dyadic,
            count: 3,
            symmetry: SymmetryMode::Free,
            landscape: true,
            two_particle: false,
            lambda1: Axis { start: 0.0, stop: 1.5, step: 0.02 },
            lambda2: Axis { start: 0.0, stop: 1.5, step: 0.02 },
            cut_lambda2: Vec::new(),
            cut_lambda1: Axis { start: 0.0, stop: 1.5, step: 0.01 },
            reference_nbar: None,
            refine: RefineSettings::default(),
            workers: None,
            out: None,
            oracle: false,
            oracle_step: 0.05,
            squeezing: false,
        }
    }

    /// Mechanical damping from `Q = omega_m / gamma` with `omega_m = 1`.
    pub fn gamma(&self) -> f64 {
        1.0 / self.quality_factor
    }

    /// Applies every `key = value` line of `text`.
    pub fn apply_text(&mut self, text: &str, path: &Path) -> Result<(), ConfigError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let origin = Origin::File { path: path.to_path_buf(), line: n + 1 };
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Malformed { text: line.to_string(), origin });
            };
            self.set(key.trim(), value.trim(), origin)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        self.apply_text(&text, path)
    }

    /// Applies one `key=value` flag.
    pub fn apply_flag(&mut self, flag: &str) -> Result<(), ConfigError> {
        let Some((key, value)) = flag.split_once('=') else {
            return Err(ConfigError::Malformed { text: flag.to_string(), origin: Origin::Flag });
        };
        self.set(key.trim(), value.trim(), Origin::Flag)
    }

    pub fn set(&mut self, key: &str, value: &str, origin: Origin) -> Result<(), ConfigError> {
        let bad = |reason: &str| ConfigError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
            reason: reason.to_string(),
            origin: origin.clone(),
        };
        let num = || value.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| bad("expected a finite number"));
        let int = || value.parse::<usize>().map_err(|_| bad("expected a non-negative integer"));
        let flag = || match value {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(bad("expected true or false")),
        };
        match key {
            "params.kappa" => self.kappa = num()?,
            "params.quality_factor" => self.quality_factor = num()?,
            "params.nbar" => self.nbar = num()?,
            "params.g_max" => self.g_max = num()?,
            "objective.arity" => {
                self.arity = match value {
                    "2" | "dyadic" => Arity::Dyadic,
                    "3" | "triadic" => Arity::Triadic,
                    _ => return Err(bad("expected 2, 3, dyadic or triadic")),
                }
            }
            "objective.count" => {
                self.count =
                    value.parse().ok().filter(|c| (1..=3).contains(c)).ok_or_else(|| bad("expected 1, 2 or 3"))?
            }
            "objective.symmetry" => {
                self.symmetry = match value {
                    "free" => SymmetryMode::Free,
                    "equal" => SymmetryMode::EqualCouplings,
                    _ => return Err(bad("expected free or equal")),
                }
            }
            "grid.landscape" => self.landscape = flag()?,
            "grid.two_particle" => self.two_particle = flag()?,
            "grid.lambda1.start" => self.lambda1.start = num()?,
            "grid.lambda1.stop" => self.lambda1.stop = num()?,
            "grid.lambda1.step" => self.lambda1.step = num()?,
            "grid.lambda2.start" => self.lambda2.start = num()?,
            "grid.lambda2.stop" => self.lambda2.stop = num()?,
            "grid.lambda2.step" => self.lambda2.step = num()?,
            "cuts.lambda2" => {
                self.cut_lambda2 = if value.is_empty() {
                    Vec::new()
                } else {
                    value
                        .split(',')
                        .map(|s| s.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
                        .collect::<Option<_>>()
                        .ok_or_else(|| bad("expected a comma-separated list of numbers"))?
                }
            }
            "cuts.lambda1.start" => self.cut_lambda1.start = num()?,
            "cuts.lambda1.stop" => self.cut_lambda1.stop = num()?,
            "cuts.lambda1.step" => self.cut_lambda1.step = num()?,
            "cuts.reference_nbar" => {
                self.reference_nbar = if value.is_empty() || value == "none" { None } else { Some(num()?) }
            }
            "refine.seeds_per_axis" => self.refine.seeds_per_axis = int()?,
            "refine.starts" => self.refine.starts = int()?,
            "refine.max_iter" => self.refine.max_iter = int()?,
            "refine.tol" => self.refine.tol = num()?,
            "run.workers" => {
                let n = int()?;
                if n == 0 {
                    return Err(bad("worker count must be at least 1"));
                }
                self.workers = Some(n);
            }
            "run.out" => self.out = Some(PathBuf::from(value)),
            "run.oracle" => self.oracle = flag()?,
            "run.squeezing" => self.squeezing = flag()?,
            "oracle.step" => self.oracle_step = num()?,
            _ => return Err(ConfigError::UnknownKey { key: key.to_string(), origin }),
        }
        Ok(())
    }

    /// Cross-field checks once every source has been applied.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError::Invalid(m));
        if !(self.kappa > 0.0) {
            return fail(format!("params.kappa must be positive, got {}", self.kappa));
        }
        if !(self.quality_factor > 0.0) {
            return fail(format!("params.quality_factor must be positive, got {}", self.quality_factor));
        }
        if !(self.nbar >= 0.0) || self.reference_nbar.is_some_and(|n| !(n >= 0.0)) {
            return fail("occupations must be non-negative".into());
        }
        if !(self.g_max >= 0.0) {
            return fail(format!("params.g_max must be non-negative, got {}", self.g_max));
        }
        for (name, axis) in
            [("grid.lambda1", self.lambda1), ("grid.lambda2", self.lambda2), ("cuts.lambda1", self.cut_lambda1)]
        {
            if let Err(e) = Axis::new(axis.start, axis.stop, axis.step) {
                return fail(format!("{name}: {e}"));
            }
            if axis.start < 0.0 {
                return fail(format!("{name} must start at a non-negative value"));
            }
        }
        if self.cut_lambda2.iter().any(|&l| l < 0.0) {
            return fail("cuts.lambda2 values must be non-negative".into());
        }
        if self.workers == Some(0) {
            return fail("run.workers must be at least 1".into());
        }
        if self.oracle && !(self.oracle_step > 0.0) {
            return fail("oracle.step must be positive".into());
        }
        Ok(())
    }
}
