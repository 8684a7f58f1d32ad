//! Numerical checks of the approximation bounds behind the method: Taylor
//! remainders along projected tangent steps, the quadratic projection bound,
//! the constants entering those bounds, agreement with Riemannian formulas on
//! the sphere, and finite-difference derivative checks.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{self, ConstraintConstants, ConstraintSet, SphereSet, TangentSpace};
use crate::lagrangian::{self, LagrangianState, Objective, ObjectiveConstants};
use crate::rng;

/// Lipschitz and boundedness constants of `f` and of each constraint over
/// the feasible set.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzConstants {
    pub l_f1: f64,
    pub l_f2: f64,
    pub gamma_f1: f64,
    pub gamma_f2: f64,
    pub l_c1: Vec<f64>,
    pub l_c2: Vec<f64>,
    pub gamma_c1: Vec<f64>,
    pub gamma_c2: Vec<f64>,
    /// Lower bound on the smallest singular value of the Jacobian.
    pub sigma0: f64,
}

impl LipschitzConstants {
    pub fn from_parts(f: &ObjectiveConstants, c: &ConstraintConstants) -> Self {
        Self {
            l_f1: f.grad_lipschitz,
            l_f2: f.hess_lipschitz,
            gamma_f1: f.grad_bound,
            gamma_f2: f.hess_bound,
            l_c1: c.grad_lipschitz.clone(),
            l_c2: c.hess_lipschitz.clone(),
            gamma_c1: c.grad_bound.clone(),
            gamma_c2: c.hess_bound.clone(),
            sigma0: c.sigma0,
        }
    }

    /// Analytic constants of a problem, when both parts provide them.
    pub fn of<O, S>(obj: &O, set: &S) -> Option<Self>
    where
        O: Objective + ?Sized,
        S: ConstraintSet + ?Sized,
    {
        Some(Self::from_parts(&obj.constants()?, &set.constants()?))
    }

    pub fn num_constraints(&self) -> usize {
        self.l_c1.len()
    }

    /// At least one constraint, consistent lengths, nonnegative finite
    /// entries and `sigma0 > 0`.
    pub fn validate(&self) -> Result<()> {
        let m = self.l_c1.len();
        if m == 0 {
            return Err(Error::InvalidConstants("at least one constraint is required"));
        }
        if self.l_c2.len() != m || self.gamma_c1.len() != m || self.gamma_c2.len() != m {
            return Err(Error::InvalidConstants("per-constraint vectors differ in length"));
        }
        let scalars = [self.l_f1, self.l_f2, self.gamma_f1, self.gamma_f2];
        let all = scalars
            .iter()
            .chain(&self.l_c1)
            .chain(&self.l_c2)
            .chain(&self.gamma_c1)
            .chain(&self.gamma_c2);
        for v in all {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(Error::InvalidConstants("constants must be finite and nonnegative"));
            }
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return Err(Error::InvalidConstants("sigma0 must be positive"));
        }
        Ok(())
    }
}

/// Constants of the first- and second-order Taylor bounds
/// `|rem1| <= c0 ||delta||^2` and `|rem2| <= c5 ||delta||^3`, valid for
/// `||delta|| <= r / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorConstants {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub r: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Evaluates the closed-form constants.
pub fn taylor_constants(c: &LipschitzConstants) -> Result<TaylorConstants> {
    c.validate()?;
    let gamma1 = sum_sq(&c.gamma_c1);
    let gamma2 = sum_sq(&c.gamma_c2);
    let lambda1 = sum_sq(&c.l_c1);
    let lambda2 = sum_sq(&c.l_c2);
    if !(lambda1 > 0.0) {
        return Err(Error::InvalidConstants("sum of squared constraint gradient Lipschitz constants must be positive"));
    }
    let s2 = c.sigma0 * c.sigma0;
    let s4 = s2 * s2;
    let r = c.sigma0 / libm::sqrt(lambda1);
    let gf1 = c.gamma_f1;

    let c1 = c.l_f2 / 2.0 + gf1 / (2.0 * s2) * libm::sqrt(gamma1 * lambda2);
    let curvature = c.gamma_f2 + gf1 / (2.0 * s2) * libm::sqrt(gamma1 * gamma2);
    let c2 = curvature * 4.0 / r;
    let c3 = curvature * 2.0 / r;
    let c4 = (gf1 + gf1 * gamma1 / s2)
        * (2.0 * libm::sqrt(gamma1 * lambda1) / s2 + 2.0 * libm::sqrt(gamma1 * gamma1 * gamma1 * lambda1) / s4)
        * 8.0
        / r;
    let c0 = gf1 * (1.0 + gamma1 / s2) * 4.0 / (r * r) + 4.0 * (c.l_f1 + gf1 * libm::sqrt(gamma1 * lambda1) / s2);
    let c5 = 8.0 * c1 + c2 + c3 + c4;
    Ok(TaylorConstants { c0, c1, c2, c3, c4, c5, r, gamma1, gamma2, lambda1, lambda2 })
}

/// Mean absolute remainders at one step length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorRow {
    pub scale: f64,
    /// Mean of `|f(Pi(x0 + delta)) - f(x0) - G^T delta|`.
    pub first: f64,
    /// Mean of `|f(Pi(x0 + delta)) - f(x0) - G^T delta - delta^T H delta / 2|`.
    pub second: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaylorReport {
    /// One row per scale, in the (decreasing) order given.
    pub rows: Vec<TaylorRow>,
    /// Least-squares slope of `log(first)` against `log(scale)`; `None` when
    /// some mean remainder is exactly zero.
    pub slope1: Option<f64>,
    pub slope2: Option<f64>,
    /// Fraction of samples with `first <= c0 ||delta||^2`, when analytic
    /// constants are available.
    pub bound1_fraction: Option<f64>,
    /// Fraction of samples with `second <= c5 ||delta||^3`.
    pub bound2_fraction: Option<f64>,
    pub samples: usize,
}

/// Both remainders at `Pi(x0 + delta)`; `delta` should be tangent at `x0`.
pub fn taylor_remainders<O, S>(obj: &O, set: &S, x0: &DVector<f64>, delta: &DVector<f64>) -> Result<(f64, f64)>
where
    O: Objective + ?Sized,
    S: ConstraintSet + ?Sized,
{
    let state = LagrangianState::new(obj, set, x0)?;
    let hess = state.gen_hess();
    remainders(obj, set, &state, &hess, delta)
}

fn remainders<O, S, H>(
    obj: &O,
    set: &S,
    state: &LagrangianState<'_, O, S>,
    hess: &H,
    delta: &DVector<f64>,
) -> Result<(f64, f64)>
where
    O: Objective + ?Sized,
    S: ConstraintSet + ?Sized,
    H: crate::eigen::SymmetricOperator + ?Sized,
{
    if delta.len() != state.x.len() {
        return Err(Error::DimensionMismatch { expected: state.x.len(), actual: delta.len() });
    }
    if delta.iter().all(|v| *v == 0.0) {
        // Pi(x0) = x0 on the feasible set
        return Ok((0.0, 0.0));
    }
    let y = geometry::project(set, &(&state.x + delta))?;
    let first = lagrangian::feasible_difference(obj, set, &state.lambda_star, &state.x, &y) - state.gen_grad.dot(delta);
    let second = first - 0.5 * delta.dot(&hess.apply(delta));
    Ok((first.abs(), second.abs()))
}

/// Least-squares slope of `log y` against `log x`. `None` if any `y` is not
/// positive or fewer than two points are given.
pub fn fit_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || xs.len() != ys.len() || ys.iter().any(|y| !(*y > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| libm::log(*x)).collect();
    let ly: Vec<f64> = ys.iter().map(|y| libm::log(*y)).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// `count` log-spaced values from `hi` down to `lo`.
pub fn log_scales(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return alloc::vec![hi];
    }
    let (a, b) = (libm::log10(hi), libm::log10(lo));
    (0..count)
        .map(|i| libm::pow(10.0, a + (b - a) * i as f64 / (count - 1) as f64))
        .collect()
}

fn random_unit_tangent(space: &TangentSpace, rng: &mut rng::Rng, n: usize) -> Result<DVector<f64>> {
    for _ in 0..16 {
        let u = space.project(&rng::gaussian_vector(rng, n));
        let norm = u.norm();
        if norm > 1e-8 {
            return Ok(u / norm);
        }
    }
    Err(Error::Numerical("tangent space appears to be trivial"))
}

/// Samples `samples` random unit tangent directions at `x0` and measures
/// both Taylor remainders at `delta = s u` for every scale `s`. The same
/// directions are reused across scales.
pub fn taylor_check<O, S>(
    obj: &O,
    set: &S,
    x0: &DVector<f64>,
    scales: &[f64],
    samples: usize,
    rng_seed: u64,
) -> Result<TaylorReport>
where
    O: Objective + ?Sized,
    S: ConstraintSet + ?Sized,
{
    if samples == 0 || scales.is_empty() {
        return Err(Error::InvalidConfig("taylor_check needs at least one scale and one sample"));
    }
    if scales.iter().any(|s| !(*s > 0.0)) || scales.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::InvalidConfig("scales must be positive and strictly decreasing"));
    }
    let constants = match LipschitzConstants::of(obj, set) {
        Some(c) => Some(taylor_constants(&c)?),
        None => None,
    };
    if let Some(k) = &constants {
        if scales[0] >= k.r / 2.0 {
            return Err(Error::InvalidConfig("scales must stay below half the projection radius"));
        }
    }
    let feas = geometry::feasibility_residual(set, x0);
    if feas > 1e-8 {
        return Err(Error::InvalidConfig("taylor_check needs a feasible base point"));
    }

    let state = LagrangianState::new(obj, set, x0)?;
    let hess = state.gen_hess();
    let space = state.tangent_space().clone();
    let n = x0.len();
    let mut rng = rng::seeded(rng_seed);
    let mut directions = Vec::with_capacity(samples);
    for _ in 0..samples {
        let u = random_unit_tangent(&space, &mut rng, n)?;
        let normal = space.normals().tr_mul(&u).amax();
        if normal > 1e-10 {
            return Err(Error::Numerical("sampled direction is not tangent"));
        }
        directions.push(u);
    }

    let mut rows = Vec::with_capacity(scales.len());
    let (mut within1, mut within2) = (0usize, 0usize);
    for &s in scales {
        let (mut sum1, mut sum2) = (0.0, 0.0);
        for u in &directions {
            let (r1, r2) = remainders(obj, set, &state, &hess, &(u * s))?;
            sum1 += r1;
            sum2 += r2;
            if let Some(k) = &constants {
                within1 += usize::from(r1 <= k.c0 * s * s);
                within2 += usize::from(r2 <= k.c5 * s * s * s);
            }
        }
        let m = samples as f64;
        rows.push(TaylorRow { scale: s, first: sum1 / m, second: sum2 / m });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.scale).collect();
    let f1: Vec<f64> = rows.iter().map(|r| r.first).collect();
    let f2: Vec<f64> = rows.iter().map(|r| r.second).collect();
    let total = (samples * scales.len()) as f64;
    Ok(TaylorReport {
        slope1: fit_log_slope(&xs, &f1),
        slope2: fit_log_slope(&xs, &f2),
        bound1_fraction: constants.map(|_| within1 as f64 / total),
        bound2_fraction: constants.map(|_| within2 as f64 / total),
        rows,
        samples,
    })
}

/// Gap `||Pi(x0 + v) - (x0 + P v)||` and the bound `4 ||v||^2 / radius`.
pub fn projection_gap<S: ConstraintSet + ?Sized>(
    set: &S,
    x0: &DVector<f64>,
    v: &DVector<f64>,
    radius: f64,
) -> Result<(f64, f64)> {
    let bound = 4.0 * v.norm_squared() / radius;
    if v.iter().all(|c| *c == 0.0) {
        return Ok((0.0, bound));
    }
    let space = TangentSpace::at(set, x0)?;
    let projected = geometry::project(set, &(x0 + v))?;
    let linear = x0 + space.project(v);
    Ok(((projected - linear).norm(), bound))
}

/// Fraction of `trials` random perturbations `v` (Gaussian direction,
/// length uniform in `(0, radius / 4]`) for which
/// `||Pi(x0 + v) - (x0 + P v)|| <= 4 ||v||^2 / radius`.
///
/// The comparison allows an absolute slack of a few units of rounding in
/// `x0`, which only matters for the shortest `v`.
pub fn projection_bound_check<S: ConstraintSet + ?Sized>(
    set: &S,
    x0: &DVector<f64>,
    trials: usize,
    radius: f64,
    rng_seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidConfig("projection_bound_check needs at least one trial"));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidConfig("radius must be positive"));
    }
    geometry::check_point(set, x0)?;
    let n = x0.len();
    let slack = 8.0 * f64::EPSILON * (1.0 + x0.amax());
    let mut rng = rng::seeded(rng_seed);
    let mut hits = 0;
    for _ in 0..trials {
        let dir = rng::gaussian_vector(&mut rng, n);
        let len = radius / 4.0 * (1.0 - rng::uniform(&mut rng));
        let v = &dir * (len / dir.norm());
        let (gap, bound) = projection_gap(set, x0, &v, radius)?;
        if gap <= bound + slack {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}

/// Compares `G(x)` and `H(x)` on the unit sphere with the Riemannian
/// gradient `(I - x x^T) grad f` and Hessian
/// `P (hess f - (x^T grad f) I) P`, `P = I - x x^T`, evaluated entrywise.
/// Returns `(||gradient gap||, ||Hessian gap||_F)`.
pub fn riemannian_equivalence_check<O: Objective + ?Sized>(obj: &O, x: &DVector<f64>) -> Result<(f64, f64)> {
    let n = x.len();
    if (x.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidConfig("riemannian_equivalence_check needs a unit-norm point"));
    }
    let sphere = SphereSet::new(n)?;
    let g = lagrangian::generalized_gradient(obj, &sphere, x)?;
    let h = lagrangian::generalized_hessian(obj, &sphere, x)?;

    let grad = obj.gradient(x);
    let hess = obj.hessian(x);
    let mut xg = 0.0;
    for i in 0..n {
        xg += x[i] * grad[i];
    }
    let p = |i: usize, j: usize| -> f64 { f64::from(u8::from(i == j)) - x[i] * x[j] };
    let mut riem_grad = DVector::zeros(n);
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            acc += p(i, j) * grad[j];
        }
        riem_grad[i] = acc;
    }
    let mut inner = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            inner[(i, j)] = hess[(i, j)] - if i == j { xg } else { 0.0 };
        }
    }
    let mut left = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += p(i, k) * inner[(k, j)];
            }
            left[(i, j)] = acc;
        }
    }
    let mut riem_hess = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += left[(i, k)] * p(k, j);
            }
            riem_hess[(i, j)] = acc;
        }
    }
    Ok(((g - riem_grad).norm(), (h - riem_hess).norm()))
}

/// Relative errors `||fd - analytic|| / (1 + ||analytic||)` of central
/// finite differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDifferenceReport {
    pub gradient_error: f64,
    pub hessian_error: f64,
}

impl FiniteDifferenceReport {
    pub fn worst(&self) -> f64 {
        self.gradient_error.max(self.hessian_error)
    }
}

fn relative_error(fd: f64, analytic: f64) -> f64 {
    fd / (1.0 + analytic)
}

/// Central differences of `value` against `gradient`, and of `gradient`
/// against `hessian`, with step `h`.
pub fn check_objective_derivatives<O: Objective + ?Sized>(
    obj: &O,
    x: &DVector<f64>,
    h: f64,
) -> Result<FiniteDifferenceReport> {
    let n = obj.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: x.len() });
    }
    if !(h > 0.0) {
        return Err(Error::InvalidConfig("finite-difference step must be positive"));
    }
    let grad = obj.gradient(x);
    let hess = obj.hessian(x);
    let mut fd_grad = DVector::zeros(n);
    let mut fd_hess = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut plus = x.clone();
        plus[i] += h;
        let mut minus = x.clone();
        minus[i] -= h;
        fd_grad[i] = (obj.value(&plus) - obj.value(&minus)) / (2.0 * h);
        fd_hess.set_column(i, &((obj.gradient(&plus) - obj.gradient(&minus)) / (2.0 * h)));
    }
    let hv_gap = {
        let v = DVector::from_fn(n, |i, _| 1.0 / (1.0 + i as f64));
        (obj.hessian_vec(x, &v) - &hess * &v).norm() / (1.0 + (&hess * &v).norm())
    };
    Ok(FiniteDifferenceReport {
        gradient_error: relative_error((fd_grad - &grad).norm(), grad.norm()),
        hessian_error: relative_error((fd_hess - &hess).norm(), hess.norm()).max(hv_gap),
    })
}

/// Central differences of the constraint values against the Jacobian, and
/// of each constraint gradient against its Hessian.
pub fn check_constraint_derivatives<S: ConstraintSet + ?Sized>(
    set: &S,
    x: &DVector<f64>,
    h: f64,
) -> Result<FiniteDifferenceReport> {
    geometry::check_point(set, x)?;
    if !(h > 0.0) {
        return Err(Error::InvalidConfig("finite-difference step must be positive"));
    }
    let n = set.ambient_dim();
    let m = set.num_constraints();
    let jac = set.jacobian(x);
    let mut fd_jac = DMatrix::zeros(n, m);
    let mut hess_err = 0.0f64;
    let mut hess_fd: Vec<DMatrix<f64>> = (0..m).map(|_| DMatrix::zeros(n, n)).collect();
    for i in 0..n {
        let mut plus = x.clone();
        plus[i] += h;
        let mut minus = x.clone();
        minus[i] -= h;
        let dc = (set.value(&plus) - set.value(&minus)) / (2.0 * h);
        fd_jac.set_row(i, &dc.transpose());
        let dj = (set.jacobian(&plus) - set.jacobian(&minus)) / (2.0 * h);
        for (c, fd) in hess_fd.iter_mut().enumerate() {
            fd.set_column(i, &dj.column(c));
        }
    }
    for (c, fd) in hess_fd.iter().enumerate() {
        let an = set.constraint_hessian(c, x);
        hess_err = hess_err.max(relative_error((fd - &an).norm(), an.norm()));
    }
    if m > 0 {
        let w = DVector::from_fn(m, |i, _| 1.0 + i as f64);
        let v = DVector::from_fn(n, |i, _| 1.0 / (1.0 + i as f64));
        let dense = set.weighted_constraint_hessian(x, &w);
        let summed = (0..m).fold(DMatrix::zeros(n, n), |acc, c| acc + set.constraint_hessian(c, x) * w[c]);
        hess_err = hess_err.max(relative_error((&dense - &summed).norm(), summed.norm()));
        let hv = set.weighted_constraint_hessian_vec(x, &w, &v);
        hess_err = hess_err.max(relative_error((hv - &summed * &v).norm(), (&summed * &v).norm()));
    }
    Ok(FiniteDifferenceReport {
        gradient_error: relative_error((fd_jac - &jac).norm(), jac.norm()),
        hessian_error: hess_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{OrthogonalitySet, ProductOfSpheresSet};
    use crate::problems::{rayleigh_problem, Polynomial};
    use alloc::vec;

    fn ones(m: usize) -> LipschitzConstants {
        LipschitzConstants {
            l_f1: 1.0,
            l_f2: 1.0,
            gamma_f1: 1.0,
            gamma_f2: 1.0,
            l_c1: vec![1.0; m],
            l_c2: vec![1.0; m],
            gamma_c1: vec![1.0; m],
            gamma_c2: vec![1.0; m],
            sigma0: 1.0,
        }
    }

    #[test]
    fn all_ones_constants() {
        let k = taylor_constants(&ones(1)).unwrap();
        assert_eq!((k.r, k.gamma1, k.gamma2, k.lambda1, k.lambda2), (1.0, 1.0, 1.0, 1.0, 1.0));
        assert_eq!((k.c0, k.c1, k.c2, k.c3, k.c4, k.c5), (16.0, 1.0, 6.0, 3.0, 64.0, 81.0));
    }

    #[test]
    fn constant_objective_kills_gradient_terms() {
        let mut c = ones(1);
        c.gamma_f1 = 0.0;
        c.l_f1 = 0.0;
        let k = taylor_constants(&c).unwrap();
        assert_eq!(k.c0, 0.0);
        assert_eq!(k.c4, 0.0);
    }

    #[test]
    fn scaling_changes_constants() {
        let base = taylor_constants(&ones(2)).unwrap();
        let mut c = ones(2);
        for v in c.l_c2.iter_mut().chain(c.gamma_c1.iter_mut()) {
            *v *= 3.0;
        }
        c.l_f2 *= 3.0;
        assert_ne!(taylor_constants(&c).unwrap().c1, base.c1);
    }

    #[test]
    fn invalid_constants() {
        assert!(matches!(taylor_constants(&ones(0)), Err(Error::InvalidConstants(_))));
        let mut c = ones(1);
        c.sigma0 = 0.0;
        assert!(taylor_constants(&c).is_err());
        let mut c = ones(1);
        c.l_c1 = vec![0.0];
        assert!(taylor_constants(&c).is_err());
        let mut c = ones(1);
        c.gamma_f2 = -1.0;
        assert!(taylor_constants(&c).is_err());
    }

    #[test]
    fn zero_step_has_zero_remainders() {
        let a = DMatrix::from_fn(3, 3, |i, j| (i + j) as f64);
        let (obj, s) = rayleigh_problem(a).unwrap();
        let x = s.project(&DVector::from_column_slice(&[0.3, 0.4, 0.5])).unwrap();
        assert_eq!(taylor_remainders(&obj, &s, &x, &DVector::zeros(3)).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn slope_fit_recovers_power_law() {
        let xs = log_scales(1e-1, 1e-3, 5);
        let ys: Vec<f64> = xs.iter().map(|x| 7.0 * x * x * x).collect();
        assert!((fit_log_slope(&xs, &ys).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(fit_log_slope(&xs, &[0.0; 5]), None);
        assert!((xs[0] - 1e-1).abs() < 1e-15 && (xs[4] - 1e-3).abs() < 1e-17);
    }

    #[test]
    fn scales_must_decrease() {
        let (obj, s) = rayleigh_problem(DMatrix::identity(2, 2)).unwrap();
        let x = DVector::from_column_slice(&[1.0, 0.0]);
        assert!(taylor_check(&obj, &s, &x, &[1e-3, 1e-2], 3, 0).is_err());
        assert!(taylor_check(&obj, &s, &x, &[0.6], 3, 0).is_err());
    }

    #[test]
    fn sphere_normal_perturbation_has_zero_gap() {
        let s = SphereSet::new(3).unwrap();
        let x = DVector::from_column_slice(&[0.0, 0.6, 0.8]);
        let (gap, bound) = projection_gap(&s, &x, &(&x * 0.1), 1.0).unwrap();
        assert!(gap < 1e-15);
        assert!((bound - 0.04).abs() < 1e-15);
        assert_eq!(projection_gap(&s, &x, &DVector::zeros(3), 1.0).unwrap().0, 0.0);
    }

    #[test]
    fn sphere_tangent_perturbation_is_quadratic() {
        let s = SphereSet::new(2).unwrap();
        let x = DVector::from_column_slice(&[1.0, 0.0]);
        for eps in [1e-1, 1e-2, 1e-3] {
            let (gap, bound) = projection_gap(&s, &x, &DVector::from_column_slice(&[0.0, eps]), 1.0).unwrap();
            // exact gap: ||(1, e)/sqrt(1+e^2) - (1, e)||
            let r = libm::sqrt(1.0 + eps * eps);
            let exact = libm::sqrt(1.0 + eps * eps) * (1.0 - 1.0 / r);
            assert!((gap - exact).abs() < 1e-15);
            assert!(gap <= bound);
        }
    }

    #[test]
    fn projection_bound_on_builtin_sets() {
        let s = SphereSet::new(4).unwrap();
        let x = geometry::random_point(&s, 2).unwrap();
        assert_eq!(projection_bound_check(&s, &x, 50, 1.0, 3).unwrap(), 1.0);
        let p = ProductOfSpheresSet::uniform(3, 2).unwrap();
        let x = geometry::random_point(&p, 2).unwrap();
        let r = p.constants().unwrap().projection_radius();
        assert_eq!(projection_bound_check(&p, &x, 50, r, 3).unwrap(), 1.0);
        let o = OrthogonalitySet::new(4, 2).unwrap();
        let x = geometry::random_point(&o, 2).unwrap();
        let r = o.constants().unwrap().projection_radius();
        assert_eq!(projection_bound_check(&o, &x, 50, r, 3).unwrap(), 1.0);
    }

    #[test]
    fn riemannian_gaps_for_linear_and_constant() {
        let a = DVector::from_column_slice(&[0.5, -1.0, 2.0]);
        let lin = Polynomial::linear(a.clone());
        let e1 = DVector::from_column_slice(&[1.0, 0.0, 0.0]);
        let (gg, hg) = riemannian_equivalence_check(&lin, &e1).unwrap();
        assert!(gg < 1e-15 && hg < 1e-15);
        let g = lagrangian::generalized_gradient(&lin, &SphereSet::new(3).unwrap(), &e1).unwrap();
        assert_eq!(g, DVector::from_column_slice(&[0.0, -1.0, 2.0]));

        let constant = Polynomial::linear(DVector::zeros(3));
        assert_eq!(riemannian_equivalence_check(&constant, &e1).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn finite_differences_of_polynomial() {
        let p = Polynomial::random(5, 4, 11).unwrap();
        let x = DVector::from_fn(5, |i, _| 0.1 * i as f64 - 0.2);
        let r = check_objective_derivatives(&p, &x, 1e-5).unwrap();
        assert!(r.worst() < 1e-6, "{r:?}");
    }

    #[test]
    fn finite_differences_of_orthogonality_constraints() {
        let o = OrthogonalitySet::new(3, 2).unwrap();
        let x = DVector::from_fn(6, |i, _| 0.3 + 0.1 * i as f64);
        let r = check_constraint_derivatives(&o, &x, 1e-5).unwrap();
        assert!(r.worst() < 1e-8, "{r:?}");
    }
}
