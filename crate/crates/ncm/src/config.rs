//! TOML run configuration.
//!
//! Relative paths inside a config file are resolved against the directory
//! that contains it.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ncm_core::solver::SolverConfig;
use serde::Deserialize;

use crate::input::Edge;
use crate::trace::TraceFormat;
use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Rayleigh,
    SotdSingle,
    SotdJoint,
    Maxcut,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Rayleigh => "rayleigh",
            ProblemKind::SotdSingle => "sotd-single",
            ProblemKind::SotdJoint => "sotd-joint",
            ProblemKind::Maxcut => "maxcut",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Ncm,
    Pg,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    /// Dense matrix given inline as rows (`rayleigh`: `A`; `sotd-*`: the
    /// component matrix `V`, one component per column).
    pub matrix: Option<Vec<Vec<f64>>>,
    pub matrix_file: Option<PathBuf>,
    /// Component weights for `sotd-*` with an explicit `V` (default all ones).
    pub weights: Option<Vec<f64>>,
    /// Dimension of a synthetic orthogonal tensor when no `V` is given.
    pub dim: Option<usize>,
    #[serde(default)]
    pub tensor_seed: u64,
    /// `sotd-single` minimizes `-T(x,x,x,x)` unless this is false.
    #[serde(default = "default_true")]
    pub negate: bool,
    pub edges: Option<Vec<Edge>>,
    pub edges_file: Option<PathBuf>,
    pub vertices: Option<usize>,
    pub rank: Option<usize>,
    /// Initial point; a seeded random feasible point when absent.
    pub start: Option<Vec<f64>>,
    /// Added to every gradient entry. Fault injection for `check`.
    #[serde(default)]
    pub gradient_perturbation: f64,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default)]
    pub method: Method,
    pub sigma: Option<f64>,
    pub rho: Option<f64>,
    pub alpha: Option<f64>,
    pub eps: Option<f64>,
    pub t0: Option<f64>,
    pub delta: Option<f64>,
    pub max_iter: Option<usize>,
    pub max_backtracks: Option<usize>,
    pub feas_tol: Option<f64>,
    pub use_relaxed: Option<bool>,
    pub eigen_tol: Option<f64>,
    pub eigen_max_iter: Option<usize>,
}

impl SolverSpec {
    pub fn to_config(&self, seed: u64) -> Result<SolverConfig> {
        let d = SolverConfig::default();
        let cfg = SolverConfig {
            sigma: self.sigma.unwrap_or(d.sigma),
            rho: self.rho.unwrap_or(d.rho),
            alpha: self.alpha.unwrap_or(d.alpha),
            eps: self.eps.unwrap_or(d.eps),
            t0: self.t0.unwrap_or(d.t0),
            delta: self.delta.unwrap_or(d.delta),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            max_backtracks: self.max_backtracks.unwrap_or(d.max_backtracks),
            feas_tol: self.feas_tol.unwrap_or(d.feas_tol),
            rng_seed: seed,
            use_relaxed: self.use_relaxed.unwrap_or(d.use_relaxed),
            eigen_tol: self.eigen_tol.unwrap_or(d.eigen_tol),
            eigen_max_iter: self.eigen_max_iter.or(d.eigen_max_iter),
        };
        cfg.validate().map_err(|e| CliError::Config(format!("[solver] {e}")))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub trace: Option<PathBuf>,
    pub format: Option<String>,
    /// JSON report written by `check` and `bench`.
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

fn default_restarts() -> usize {
    20
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self { restarts: default_restarts() }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub problem: ProblemSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub bench: BenchSpec,
    /// Directory of the config file; base for relative paths.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub trace: Option<PathBuf>,
    pub format: Option<TraceFormat>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        if let Some(f) = &cfg.output.format {
            TraceFormat::from_str(f).map_err(CliError::Config)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(trace) = &o.trace {
            // Command-line paths are relative to the working directory.
            self.output.trace = Some(std::env::current_dir().map(|d| d.join(trace)).unwrap_or(trace.clone()));
        }
        if let Some(format) = o.format {
            self.output.format = Some(format.as_str().to_string());
        }
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn trace_target(&self) -> Option<(PathBuf, TraceFormat)> {
        let path = self.resolve(self.output.trace.as_ref()?);
        let format = match &self.output.format {
            Some(f) => TraceFormat::from_str(f).unwrap_or_default(),
            None => TraceFormat::from_extension(&path),
        };
        Some((path, format))
    }

    pub fn report_path(&self) -> Option<PathBuf> {
        self.output.report.as_ref().map(|p| self.resolve(p))
    }
}
