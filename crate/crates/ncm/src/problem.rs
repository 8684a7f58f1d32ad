//! Builds the objective and constraint set described by a config.

use ncm_core::geometry::{self, ConstraintSet};
use ncm_core::lagrangian::{Objective, ObjectiveConstants};
use ncm_core::problems::{
    maxcut_bm, rayleigh_problem, recovery_error, signed_permutation_error, sotd_joint, sotd_single_signed,
    synthesize_sotd, MaxCut, MaxCutInstance, SymmetricTensor4,
};
use ncm_core::{DMatrix, DVector};

use crate::config::{ProblemKind, ProblemSpec, RunConfig};
use crate::input::{self, Edge};
use crate::{CliError, Result};

/// Problem-specific quality measures of an endpoint.
#[derive(Debug, Clone)]
pub enum Extra {
    None,
    /// `V` of a single-component tensor problem.
    Components(DMatrix<f64>),
    /// `V` of a joint tensor problem.
    JointComponents(DMatrix<f64>),
    Cut(MaxCut),
}

pub struct Problem {
    pub kind: ProblemKind,
    pub objective: Box<dyn Objective>,
    pub set: Box<dyn ConstraintSet>,
    pub start: Option<DVector<f64>>,
    pub extra: Extra,
}

impl Problem {
    pub fn on_sphere(&self) -> bool {
        matches!(self.kind, ProblemKind::Rayleigh | ProblemKind::SotdSingle)
    }

    /// The configured start, or a random feasible point.
    pub fn start_point(&self, seed: u64) -> Result<DVector<f64>> {
        match &self.start {
            Some(x) => Ok(x.clone()),
            None => Ok(geometry::random_point(&*self.set, seed)?),
        }
    }

    pub fn cut_value(&self, x: &DVector<f64>) -> Option<f64> {
        match &self.extra {
            Extra::Cut(m) => Some(m.cut_value(x)),
            _ => None,
        }
    }

    /// Distance to the nearest ground-truth component (single), or the
    /// worst signed-permutation column error (joint).
    pub fn recovery_error(&self, x: &DVector<f64>) -> Result<Option<f64>> {
        Ok(match &self.extra {
            Extra::Components(v) => Some(recovery_error(x, v)),
            Extra::JointComponents(v) => Some(signed_permutation_error(x, v)?),
            _ => None,
        })
    }

    /// Threshold applied to [`Problem::recovery_error`].
    pub fn recovery_tolerance(&self) -> f64 {
        match self.extra {
            Extra::JointComponents(_) => 1e-5,
            _ => 1e-6,
        }
    }
}

/// Adds a constant to every gradient entry.
struct PerturbedGradient {
    inner: Box<dyn Objective>,
    shift: f64,
}

impl Objective for PerturbedGradient {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.inner.value(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.inner.gradient(x).add_scalar(self.shift)
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.inner.hessian(x)
    }
    fn hessian_vec(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        self.inner.hessian_vec(x, v)
    }
    fn constants(&self) -> Option<ObjectiveConstants> {
        None
    }
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(format!("[problem] {}", msg.into()))
}

fn inline_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(config_error("matrix rows must be non-empty and of equal length"));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

fn given_matrix(cfg: &RunConfig) -> Result<Option<DMatrix<f64>>> {
    let spec = &cfg.problem;
    match (&spec.matrix, &spec.matrix_file) {
        (Some(_), Some(_)) => Err(config_error("give either matrix or matrix_file, not both")),
        (Some(rows), None) => inline_matrix(rows).map(Some),
        (None, Some(path)) => input::read_matrix(&cfg.resolve(path)).map(Some),
        (None, None) => Ok(None),
    }
}

fn tensor(cfg: &RunConfig) -> Result<(SymmetricTensor4, DMatrix<f64>)> {
    let spec = &cfg.problem;
    match (given_matrix(cfg)?, spec.dim) {
        (Some(_), Some(_)) => Err(config_error("give either components (matrix) or dim, not both")),
        (Some(v), None) => {
            let weights = match &spec.weights {
                Some(w) => DVector::from_column_slice(w),
                None => DVector::from_element(v.ncols(), 1.0),
            };
            Ok((SymmetricTensor4::from_components(v.clone(), weights)?, v))
        }
        (None, Some(n)) => Ok(synthesize_sotd(n, spec.tensor_seed)?),
        (None, None) => Err(config_error("sotd problems need components (matrix / matrix_file) or dim")),
    }
}

fn edges(cfg: &RunConfig) -> Result<(usize, Vec<Edge>)> {
    let spec: &ProblemSpec = &cfg.problem;
    let edges = match (&spec.edges, &spec.edges_file) {
        (Some(_), Some(_)) => return Err(config_error("give either edges or edges_file, not both")),
        (Some(e), None) => e.clone(),
        (None, Some(path)) => input::read_edges(&cfg.resolve(path))?,
        (None, None) => return Err(config_error("maxcut needs edges or edges_file")),
    };
    let implied = edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
    let n = spec.vertices.unwrap_or(implied);
    if n < implied {
        return Err(config_error(format!("vertices = {n} but an edge references vertex {}", implied - 1)));
    }
    Ok((n, edges))
}

pub fn build(cfg: &RunConfig) -> Result<Problem> {
    let spec = &cfg.problem;
    let (objective, set, extra): (Box<dyn Objective>, Box<dyn ConstraintSet>, Extra) = match spec.kind {
        ProblemKind::Rayleigh => {
            let a = given_matrix(cfg)?.ok_or_else(|| config_error("rayleigh needs matrix or matrix_file"))?;
            let (o, s) = rayleigh_problem(a)?;
            (Box::new(o), Box::new(s), Extra::None)
        }
        ProblemKind::SotdSingle => {
            let (t, v) = tensor(cfg)?;
            let (o, s) = sotd_single_signed(t, spec.negate)?;
            (Box::new(o), Box::new(s), Extra::Components(v))
        }
        ProblemKind::SotdJoint => {
            let (t, v) = tensor(cfg)?;
            let (o, s) = sotd_joint(t)?;
            (Box::new(o), Box::new(s), Extra::JointComponents(v))
        }
        ProblemKind::Maxcut => {
            let (n, e) = edges(cfg)?;
            let (o, s) = maxcut_bm(MaxCutInstance::from_edges(n, &e, spec.rank)?)?;
            (Box::new(o.clone()), Box::new(s), Extra::Cut(o))
        }
    };
    let objective: Box<dyn Objective> = if spec.gradient_perturbation != 0.0 {
        Box::new(PerturbedGradient { inner: objective, shift: spec.gradient_perturbation })
    } else {
        objective
    };
    let start = match &spec.start {
        Some(x) => {
            let x = DVector::from_column_slice(x);
            geometry::check_point(&*set, &x)?;
            if geometry::feasibility_residual(&*set, &x) > 1e-8 {
                return Err(config_error("start is not feasible"));
            }
            Some(geometry::project(&*set, &x)?)
        }
        None => None,
    };
    Ok(Problem { kind: spec.kind, objective, set, start, extra })
}
