//! `solve`, `check` and `bench`.

use std::fs;
use std::io::Write;
use std::path::Path;

use log::{info, warn};
use ncm_core::derive_seed;
use ncm_core::diagnostics::{
    check_constraint_derivatives, check_objective_derivatives, log_scales, projection_bound_check,
    riemannian_equivalence_check, taylor_check,
};
use ncm_core::geometry;
use ncm_core::solver::{negative_curvature_solve, projected_gradient_solve, SolveResult, SolveStatus, SolverConfig};
use ncm_core::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Method, RunConfig};
use crate::problem::{self, Problem};
use crate::trace::{write_trace, TraceRow};
use crate::{status_name, CliError, Outcome, Result};

fn run_solver(p: &Problem, x0: &DVector<f64>, method: Method, cfg: &SolverConfig) -> Result<SolveResult> {
    Ok(match method {
        Method::Ncm => negative_curvature_solve(&*p.objective, &*p.set, x0, cfg)?,
        Method::Pg => projected_gradient_solve(&*p.objective, &*p.set, x0, cfg)?,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Runs one solve, writes the trace when configured and prints a summary.
pub fn solve(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let p = problem::build(cfg)?;
    let solver = cfg.solver.to_config(cfg.seed)?;
    let x0 = p.start_point(cfg.seed)?;
    info!("solving {} (n = {}) with {:?}", p.kind.as_str(), x0.len(), cfg.solver.method);
    let res = run_solver(&p, &x0, cfg.solver.method, &solver)?;

    if let Some((path, format)) = cfg.trace_target() {
        let rows: Vec<TraceRow> = res.trace.iter().map(TraceRow::from).collect();
        write_trace(&path, format, &rows)?;
        info!("wrote {} trace rows to {}", rows.len(), path.display());
    }

    let c = &res.certificate;
    let x = res.x();
    let w = |e| CliError::Io { path: "<stdout>".into(), source: e };
    writeln!(out, "status: {}", status_name(res.status)).map_err(w)?;
    writeln!(out, "iterations: {}", res.iterations()).map_err(w)?;
    writeln!(out, "f: {:.12e}", res.final_record.f).map_err(w)?;
    writeln!(
        out,
        "certificate: grad_norm={:.3e} min_eigenvalue={:.6e} first_order={} second_order={}",
        c.grad_norm, c.min_eigenvalue, c.is_first_order, c.is_second_order
    )
    .map_err(w)?;
    if let Some(cut) = p.cut_value(x) {
        writeln!(out, "cut_value: {cut:.9}").map_err(w)?;
    }
    if let Some(err) = p.recovery_error(x)? {
        writeln!(out, "recovery_error: {err:.3e}").map_err(w)?;
    }
    Ok(Outcome::Solved(res.status))
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub value: f64,
    pub threshold: String,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub problem: &'static str,
    pub passed: bool,
    pub checks: Vec<CheckItem>,
}

const CHECK_POINTS: u64 = 5;
const FD_STEP: f64 = 1e-6;
const PROJECTION_TRIALS: usize = 200;

fn item(name: String, value: f64, threshold: &str, passed: bool) -> CheckItem {
    CheckItem { name, value, threshold: threshold.to_string(), passed }
}

/// Finite-difference, Taylor, projection and (on spheres) Riemannian checks
/// at seeded feasible points.
pub fn check_report(cfg: &RunConfig) -> Result<CheckReport> {
    let p = problem::build(cfg)?;
    let radius = p.set.constants().map(|c| c.projection_radius());
    let hi = radius.map_or(0.1, |r| (0.4 * r).min(0.1));
    let scales = log_scales(hi, hi / 100.0, 9);
    let mut checks = Vec::new();

    for i in 0..CHECK_POINTS {
        let seed = derive_seed(cfg.seed, i);
        let x = match (&p.start, i) {
            (Some(s), 0) => s.clone(),
            _ => geometry::random_point(&*p.set, seed)?,
        };

        let fd = check_objective_derivatives(&*p.objective, &x, FD_STEP)?;
        checks.push(item(format!("point {i}: objective gradient"), fd.gradient_error, "<= 1e-5", fd.gradient_error <= 1e-5));
        checks.push(item(format!("point {i}: objective hessian"), fd.hessian_error, "<= 1e-4", fd.hessian_error <= 1e-4));
        let fd = check_constraint_derivatives(&*p.set, &x, FD_STEP)?;
        checks.push(item(format!("point {i}: constraint jacobian"), fd.gradient_error, "<= 1e-5", fd.gradient_error <= 1e-5));
        checks.push(item(format!("point {i}: constraint hessians"), fd.hessian_error, "<= 1e-4", fd.hessian_error <= 1e-4));

        let taylor = taylor_check(&*p.objective, &*p.set, &x, &scales, 20, seed)?;
        // An exactly zero remainder has no slope.
        if let Some(s) = taylor.slope1 {
            checks.push(item(format!("point {i}: taylor slope1"), s, ">= 1.8", s >= 1.8));
        }
        if let Some(s) = taylor.slope2 {
            checks.push(item(format!("point {i}: taylor slope2"), s, ">= 2.7", s >= 2.7));
        }
        for (label, frac) in [("bound1", taylor.bound1_fraction), ("bound2", taylor.bound2_fraction)] {
            if let Some(f) = frac {
                checks.push(item(format!("point {i}: taylor {label} fraction"), f, "= 1", f == 1.0));
            }
        }

        if let Some(r) = radius {
            let frac = projection_bound_check(&*p.set, &x, PROJECTION_TRIALS, r, seed)?;
            checks.push(item(format!("point {i}: projection bound fraction"), frac, "= 1", frac == 1.0));
        }

        if p.on_sphere() {
            let (g, h) = riemannian_equivalence_check(&*p.objective, &x)?;
            checks.push(item(format!("point {i}: riemannian gradient gap"), g, "<= 1e-10", g <= 1e-10));
            checks.push(item(format!("point {i}: riemannian hessian gap"), h, "<= 1e-10", h <= 1e-10));
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(CheckReport { problem: p.kind.as_str(), passed, checks })
}

pub fn check(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let report = check_report(cfg)?;
    let w = |e| CliError::Io { path: "<stdout>".into(), source: e };
    for c in report.checks.iter().filter(|c| !c.passed) {
        warn!("check failed: {} = {:e} (want {})", c.name, c.value, c.threshold);
        writeln!(out, "FAIL {}: {:e} (want {})", c.name, c.value, c.threshold).map_err(w)?;
    }
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    writeln!(out, "checks: {} run, {} failed", report.checks.len(), failed).map_err(w)?;
    if let Some(path) = cfg.report_path() {
        write_json(&path, &report)?;
    }
    Ok(if report.passed { Outcome::CheckPassed } else { Outcome::CheckFailed })
}

#[derive(Debug, Clone, Serialize)]
pub struct RestartSummary {
    pub restart: usize,
    pub status: &'static str,
    pub iterations: usize,
    pub backtracks: usize,
    pub f: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cut_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovery_error: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub problem: &'static str,
    pub restarts: usize,
    pub success_rate: f64,
    pub median_iterations: f64,
    pub median_backtracks: f64,
    pub best_objective: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_cut: Option<f64>,
    /// Fraction of second-order endpoints within the recovery tolerance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovery_rate: Option<f64>,
    pub runs: Vec<RestartSummary>,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Restart `r` starts from point seed `derive_seed(seed, 2r)` and uses
/// solver seed `derive_seed(seed, 2r + 1)`, so results do not depend on
/// scheduling.
pub fn bench_report(cfg: &RunConfig) -> Result<BenchReport> {
    let restarts = cfg.bench.restarts;
    if restarts == 0 {
        return Err(CliError::Config("[bench] restarts must be at least 1".into()));
    }
    let p = problem::build(cfg)?;
    let base = cfg.solver.to_config(cfg.seed)?;
    let runs: Vec<RestartSummary> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let x0 = geometry::random_point(&*p.set, derive_seed(cfg.seed, 2 * r as u64))?;
            let solver = SolverConfig { rng_seed: derive_seed(cfg.seed, 2 * r as u64 + 1), ..base };
            let res = run_solver(&p, &x0, cfg.solver.method, &solver)?;
            let x = res.x();
            Ok(RestartSummary {
                restart: r,
                status: status_name(res.status),
                iterations: res.iterations(),
                backtracks: res.trace.iter().map(|t| t.backtracks).sum(),
                f: res.final_record.f,
                cut_value: p.cut_value(x),
                recovery_error: p.recovery_error(x)?,
            })
        })
        .collect::<Result<_>>()?;

    let second_order: Vec<&RestartSummary> =
        runs.iter().filter(|r| r.status == status_name(SolveStatus::SecondOrderCritical)).collect();
    let recovery_rate = match (second_order.is_empty(), runs[0].recovery_error) {
        (false, Some(_)) => {
            let tol = p.recovery_tolerance();
            let ok = second_order.iter().filter(|r| r.recovery_error.is_some_and(|e| e <= tol)).count();
            Some(ok as f64 / second_order.len() as f64)
        }
        (true, Some(_)) => Some(0.0),
        _ => None,
    };
    Ok(BenchReport {
        problem: p.kind.as_str(),
        restarts,
        success_rate: second_order.len() as f64 / restarts as f64,
        median_iterations: median(runs.iter().map(|r| r.iterations as f64).collect()),
        median_backtracks: median(runs.iter().map(|r| r.backtracks as f64).collect()),
        best_objective: runs.iter().map(|r| r.f).fold(f64::INFINITY, f64::min),
        best_cut: runs.iter().filter_map(|r| r.cut_value).reduce(f64::max),
        recovery_rate,
        runs,
    })
}

pub fn bench(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let report = bench_report(cfg)?;
    let w = |e| CliError::Io { path: "<stdout>".into(), source: e };
    writeln!(out, "restarts: {}", report.restarts).map_err(w)?;
    writeln!(out, "success_rate: {:.4}", report.success_rate).map_err(w)?;
    writeln!(out, "median_iterations: {}", report.median_iterations).map_err(w)?;
    writeln!(out, "median_backtracks: {}", report.median_backtracks).map_err(w)?;
    writeln!(out, "best_objective: {:.12e}", report.best_objective).map_err(w)?;
    if let Some(cut) = report.best_cut {
        writeln!(out, "best_cut: {cut:.9}").map_err(w)?;
    }
    if let Some(rate) = report.recovery_rate {
        writeln!(out, "recovery_rate: {rate:.4}").map_err(w)?;
    }
    if let Some(path) = cfg.report_path() {
        write_json(&path, &report)?;
    }
    Ok(Outcome::BenchDone)
}
