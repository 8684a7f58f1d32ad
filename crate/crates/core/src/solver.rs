//! Negative curvature method with curvilinear backtracking, and the plain
//! projected-gradient baseline.
//!
//! At each iterate the method takes a projected gradient step while
//! `||G_k|| >= eps`. Otherwise it computes the smallest eigenpair
//! `(lambda_min, v)` of `H_k` and searches along the curve
//! `t -> Pi(x_k - t G_k + t^alpha d_k)` with `d_k = |lambda_k| sign(-v^T G_k) v`,
//! `lambda_k = min(lambda_min, 0)`.

use alloc::vec::Vec;

use nalgebra::DVector;

use crate::eigen::{self, EigenOptions, EigenResult};
use crate::error::{Error, Result};
use crate::geometry::{self, ConstraintSet, Point, DEFAULT_FEAS_TOL};
use crate::lagrangian::{self, CriticalityCertificate, LagrangianState, Objective};
use crate::rng;

/// Algorithm parameters. Build with [`SolverConfig::default`] and adjust
/// fields; every solve validates the configuration first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Sufficient-decrease constant in `(0, 1)`.
    pub sigma: f64,
    /// Backtracking factor in `(0, 1)`.
    pub rho: f64,
    /// Exponent of the curvature term `t^alpha d`.
    pub alpha: f64,
    /// First-order threshold on `||G_k||`.
    pub eps: f64,
    /// Initial trial step.
    pub t0: f64,
    /// Curvature threshold: termination needs `lambda_k >= -delta`.
    pub delta: f64,
    pub max_iter: usize,
    pub max_backtracks: usize,
    pub feas_tol: f64,
    pub rng_seed: u64,
    /// Use [`eigen::relaxed_direction`] with `delta` instead of the smallest
    /// eigenpair.
    pub use_relaxed: bool,
    pub eigen_tol: f64,
    /// `None` selects [`eigen::default_max_iter`].
    pub eigen_max_iter: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            sigma: 0.1,
            rho: 0.5,
            alpha: 0.5,
            eps: 1e-8,
            t0: 1.0,
            delta: 1e-6,
            max_iter: 10_000,
            max_backtracks: 60,
            feas_tol: DEFAULT_FEAS_TOL,
            rng_seed: 0,
            use_relaxed: false,
            eigen_tol: 1e-8,
            eigen_max_iter: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !open_unit(self.sigma) {
            return Err(Error::InvalidConfig("sigma must lie in (0, 1)"));
        }
        if !open_unit(self.rho) {
            return Err(Error::InvalidConfig("rho must lie in (0, 1)"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig("alpha must be positive"));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidConfig("eps must be positive"));
        }
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::InvalidConfig("t0 must be positive"));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidConfig("delta must be nonnegative"));
        }
        if self.use_relaxed && self.delta == 0.0 {
            return Err(Error::InvalidConfig("the relaxed eigenpair needs delta > 0"));
        }
        if !(self.feas_tol > 0.0) {
            return Err(Error::InvalidConfig("feas_tol must be positive"));
        }
        if !(self.eigen_tol > 0.0) {
            return Err(Error::InvalidConfig("eigen_tol must be positive"));
        }
        if self.eigen_max_iter == Some(0) {
            return Err(Error::InvalidConfig("eigen_max_iter must be positive"));
        }
        Ok(())
    }

    /// Eigensolver options for iteration `k`, with a seed derived from
    /// `rng_seed`.
    pub fn eigen_options(&self, n: usize, k: usize) -> EigenOptions {
        EigenOptions {
            tol: self.eigen_tol,
            max_iter: self.eigen_max_iter.unwrap_or_else(|| eigen::default_max_iter(n)),
            seed: rng::derive_seed(self.rng_seed, k as u64),
        }
    }
}

/// Which step was taken from an iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Projected gradient step (`||G_k|| >= eps`).
    Gradient,
    /// Curvilinear step along the negative curvature direction.
    Curvilinear,
    /// No step: the last iterate of a solve.
    Terminal,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Gradient => "gradient",
            Self::Curvilinear => "curvilinear",
            Self::Terminal => "terminal",
        }
    }
}

impl core::str::FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gradient" => Ok(Self::Gradient),
            "curvilinear" => Ok(Self::Curvilinear),
            "terminal" => Ok(Self::Terminal),
            _ => Err(Error::InvalidConfig("unknown branch name")),
        }
    }
}

/// Iterate `x_k` and the step accepted from it.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateRecord {
    pub k: usize,
    pub x: Point,
    pub f: f64,
    /// `||G_k||`.
    pub grad_norm: f64,
    /// `min(lambda_min(H_k), 0)`; zero when no eigenpair was computed.
    pub lambda_k: f64,
    pub branch: Branch,
    /// Accepted step `t0 * rho^backtracks` (`t0` on terminal records).
    pub t_k: f64,
    pub backtracks: usize,
    /// `||c(x_k)||_inf`.
    pub feas_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    /// `||G|| <= eps` and `lambda_min(H) >= -delta`.
    SecondOrderCritical,
    /// `||G|| <= eps` but negative curvature below `-delta` remains. Only the
    /// projected-gradient baseline stops here.
    FirstOrderCritical,
    MaxIterations,
    /// More than `max_backtracks` reductions were needed.
    LineSearchFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub final_record: IterateRecord,
    pub certificate: CriticalityCertificate,
    pub status: SolveStatus,
    /// All iterates in order; the last one equals `final_record`.
    pub trace: Vec<IterateRecord>,
}

impl SolveResult {
    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.trace.len().saturating_sub(1)
    }

    pub fn x(&self) -> &Point {
        &self.final_record.x
    }
}

/// `Pi(x - t G + t^alpha d)`.
pub fn curvilinear_step<S: ConstraintSet + ?Sized>(
    set: &S,
    x: &Point,
    g: &DVector<f64>,
    d: &DVector<f64>,
    t: f64,
    alpha: f64,
) -> Result<Point> {
    if !(t > 0.0) {
        return Err(Error::InvalidConfig("step size must be positive"));
    }
    if g.len() != x.len() || d.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), actual: g.len().max(d.len()) });
    }
    let mut y = x - g * t;
    if d.iter().any(|v| *v != 0.0) {
        y += d * libm::pow(t, alpha);
    }
    geometry::project(set, &y)
}

/// Negative curvature direction `|lambda| sign(-v^T g) v`, `sign(0) = +1`.
pub fn curvature_direction(pair: &EigenResult, g: &DVector<f64>) -> DVector<f64> {
    let lambda = pair.value.min(0.0);
    let sign = if pair.vector.dot(g) > 0.0 { -1.0 } else { 1.0 };
    &pair.vector * (lambda.abs() * sign)
}

fn start_point<S: ConstraintSet + ?Sized>(set: &S, x0: &Point, cfg: &SolverConfig) -> Result<Point> {
    geometry::check_point(set, x0)?;
    if geometry::feasibility_residual(set, x0) <= cfg.feas_tol {
        Ok(x0.clone())
    } else {
        geometry::project(set, x0)
    }
}

struct Step {
    x: Point,
    t: f64,
    backtracks: usize,
}

/// Backtracks `t = t0 rho^b` until `f(x(t)) - f(x) <= -sigma * decrease(t)`,
/// the change of `f` being measured by [`lagrangian::feasible_difference`].
#[allow(clippy::too_many_arguments)]
fn backtrack<O, S, F>(
    obj: &O,
    set: &S,
    lambda: &DVector<f64>,
    x: &Point,
    g: &DVector<f64>,
    d: &DVector<f64>,
    cfg: &SolverConfig,
    decrease: F,
) -> Result<Option<Step>>
where
    O: Objective + ?Sized,
    S: ConstraintSet + ?Sized,
    F: Fn(f64) -> f64,
{
    for b in 0..=cfg.max_backtracks {
        let t = cfg.t0 * libm::pow(cfg.rho, b as f64);
        let candidate = curvilinear_step(set, x, g, d, t, cfg.alpha)?;
        if lagrangian::feasible_difference(obj, set, lambda, x, &candidate) <= -cfg.sigma * decrease(t) {
            return Ok(Some(Step { x: candidate, t, backtracks: b }));
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Method {
    NegativeCurvature,
    ProjectedGradient,
}

/// Runs the negative curvature method from `x0`, projecting it first if it
/// is not feasible within `cfg.feas_tol`.
///
/// Line-search failure and exhausted iteration budgets are reported through
/// [`SolveResult::status`] together with the trace so far; `Err` is reserved
/// for invalid input and numerical breakdown (for example a LICQ failure).
pub fn negative_curvature_solve<O, S>(obj: &O, set: &S, x0: &Point, cfg: &SolverConfig) -> Result<SolveResult>
where
    O: Objective + ?Sized,
    S: ConstraintSet + ?Sized,
{
    solve(obj, set, x0, cfg, Method::NegativeCurvature)
}

/// Projected gradient iteration `x_{k+1} = Pi(x_k - t G_k)` with the same
/// acceptance rule, stopping as soon as `||G_k|| <= eps`. The certificate
/// at the final point may be first-order only.
pub fn projected_gradient_solve<O, S>(obj: &O, set: &S, x0: &Point, cfg: &SolverConfig) -> Result<SolveResult>
where
    O: Objective + ?Sized,
    S: ConstraintSet + ?Sized,
{
    solve(obj, set, x0, cfg, Method::ProjectedGradient)
}

fn solve<O, S>(obj: &O, set: &S, x0: &Point, cfg: &SolverConfig, method: Method) -> Result<SolveResult>
where
    O: Objective + ?Sized,
    S: ConstraintSet + ?Sized,
{
    cfg.validate()?;
    if obj.dim() != set.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: set.ambient_dim(), actual: obj.dim() });
    }
    let n = set.ambient_dim();
    let mut x = start_point(set, x0, cfg)?;
    let mut trace = Vec::new();
    let zero = DVector::zeros(n);

    for k in 0..=cfg.max_iter {
        let state = LagrangianState::new(obj, set, &x)?;
        let g = &state.gen_grad;
        let grad_norm = g.norm();
        let mut record = IterateRecord {
            k,
            x: x.clone(),
            f: state.value,
            grad_norm,
            lambda_k: 0.0,
            branch: Branch::Terminal,
            t_k: cfg.t0,
            backtracks: 0,
            feas_residual: state.feas_residual,
        };

        let mut pair = None;
        if grad_norm <= cfg.eps {
            match method {
                Method::ProjectedGradient => {
                    return finish(obj, set, record, trace, cfg, None, SolveStatus::FirstOrderCritical);
                }
                Method::NegativeCurvature => {
                    let opts = cfg.eigen_options(n, k);
                    let hess = state.gen_hess();
                    let eig = if cfg.use_relaxed {
                        eigen::relaxed_direction(&hess, g, cfg.delta, opts.tol, opts.max_iter, opts.seed)?
                    } else {
                        eigen::smallest_eigenpair(&hess, opts.tol, opts.max_iter, opts.seed)?
                    };
                    record.lambda_k = eig.value.min(0.0);
                    if record.lambda_k >= -cfg.delta {
                        let cert = CriticalityCertificate::from_parts(grad_norm, eig.value, cfg.eps, cfg.delta);
                        return finish(obj, set, record, trace, cfg, Some(cert), SolveStatus::SecondOrderCritical);
                    }
                    pair = Some(eig);
                }
            }
        }
        if k == cfg.max_iter {
            return finish(obj, set, record, trace, cfg, None, SolveStatus::MaxIterations);
        }

        let g_sq = grad_norm * grad_norm;
        let step = match (grad_norm >= cfg.eps, &pair) {
            (false, Some(eig)) => {
                let d = curvature_direction(eig, g);
                let lam3 = libm::pow(record.lambda_k.abs(), 3.0);
                let two_alpha = 2.0 * cfg.alpha;
                record.branch = Branch::Curvilinear;
                backtrack(obj, set, &state.lambda_star, &x, g, &d, cfg, |t| t * g_sq + 0.5 * libm::pow(t, two_alpha) * lam3)?
            }
            _ => {
                record.branch = Branch::Gradient;
                backtrack(obj, set, &state.lambda_star, &x, g, &zero, cfg, |t| t * g_sq)?
            }
        };
        let Some(step) = step else {
            log::debug!("line search failed at iteration {k}");
            record.branch = Branch::Terminal;
            return finish(obj, set, record, trace, cfg, None, SolveStatus::LineSearchFailure);
        };
        record.t_k = step.t;
        record.backtracks = step.backtracks;
        log::trace!(
            "k={k} f={:e} |G|={:e} lambda={:e} t={:e} branch={}",
            record.f,
            grad_norm,
            record.lambda_k,
            step.t,
            record.branch.as_str()
        );
        trace.push(record);
        x = step.x;
    }
    unreachable!("the loop returns at k = max_iter")
}

fn finish<O, S>(
    obj: &O,
    set: &S,
    record: IterateRecord,
    mut trace: Vec<IterateRecord>,
    cfg: &SolverConfig,
    certificate: Option<CriticalityCertificate>,
    status: SolveStatus,
) -> Result<SolveResult>
where
    O: Objective + ?Sized,
    S: ConstraintSet + ?Sized,
{
    let certificate = match certificate {
        Some(c) => c,
        None => {
            let opts = cfg.eigen_options(set.ambient_dim(), record.k);
            lagrangian::certify(obj, set, &record.x, cfg.eps, cfg.delta, &opts)?
        }
    };
    log::debug!(
        "stopped after {} steps: {:?}, |G|={:e}, lambda_min={:e}",
        record.k,
        status,
        certificate.grad_norm,
        certificate.min_eigenvalue
    );
    trace.push(record.clone());
    Ok(SolveResult { final_record: record, certificate, status, trace })
}
