//! Least-squares multipliers, the generalized gradient
//! `G(x) = grad f(x) - jac c(x) lambda*(x)` and the generalized Hessian
//! `H(x) = P_x (hess f(x) - sum_i lambda*_i hess c_i(x)) P_x`.
//!
//! `G` and `H` play the roles of the gradient and Hessian on the feasible
//! set: a feasible point is second-order critical when `G(x) = 0` and
//! `H(x)` is positive semidefinite.

use alloc::boxed::Box;

use nalgebra::{DMatrix, DVector};

use crate::diagnostics::LipschitzConstants;
use crate::eigen::{self, EigenOptions, SymmetricOperator};
use crate::error::{Error, Result};
use crate::geometry::{self, ConstraintSet, TangentSpace};

/// Above this ambient dimension the generalized Hessian is only used through
/// matrix-vector products.
pub const DENSE_HESSIAN_LIMIT: usize = 2000;

/// Analytic Lipschitz and boundedness constants of an objective over the
/// feasible set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveConstants {
    /// Lipschitz constant of the gradient.
    pub grad_lipschitz: f64,
    /// Lipschitz constant of the Hessian.
    pub hess_lipschitz: f64,
    pub grad_bound: f64,
    pub hess_bound: f64,
}

/// A twice-differentiable objective.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64>;

    fn hessian_vec(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        self.hessian(x) * v
    }

    fn constants(&self) -> Option<ObjectiveConstants> {
        None
    }
}

/// `f(y) - f(x)` for feasible `x`, `y`.
///
/// When the plain difference is close to the rounding level of `f`, it is
/// replaced by the change of the Lagrangian `f - lambda^T c` at the fixed
/// multipliers `lambda`, integrated along the segment by three-point
/// Gauss-Legendre quadrature. Both agree on the feasible set (exactly for
/// polynomial `f` and quadratic `c` of degree up to 6), but the integral is
/// accurate relative to `||grad L|| ||y - x||` instead of `|f|`, and is
/// insensitive to rounding-level violations of `c = 0`.
pub fn feasible_difference<O, S>(obj: &O, set: &S, lambda: &DVector<f64>, x: &DVector<f64>, y: &DVector<f64>) -> f64
where
    O: Objective + ?Sized,
    S: ConstraintSet + ?Sized,
{
    let (fx, fy) = (obj.value(x), obj.value(y));
    let plain = fy - fx;
    let rounding = 4.0 * f64::EPSILON * (fx.abs() + fy.abs());
    if plain.abs() > 1e6 * rounding {
        return plain;
    }
    const D: f64 = 0.387_298_334_620_741_7; // sqrt(3/5) / 2
    const RULE: [(f64, f64); 3] = [(0.5 - D, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + D, 5.0 / 18.0)];
    let h = y - x;
    RULE.iter()
        .map(|&(s, w)| {
            let p = x + &h * s;
            let mut grad = obj.gradient(&p);
            if !lambda.is_empty() {
                grad -= set.jacobian(&p) * lambda;
            }
            w * grad.dot(&h)
        })
        .sum()
}

impl<O: Objective + ?Sized> Objective for Box<O> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (**self).gradient(x)
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (**self).hessian(x)
    }
    fn hessian_vec(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        (**self).hessian_vec(x, v)
    }
    fn constants(&self) -> Option<ObjectiveConstants> {
        (**self).constants()
    }
}

fn check_inputs<O, S>(obj: &O, set: &S, x: &DVector<f64>) -> Result<()>
where
    O: Objective + ?Sized,
    S: ConstraintSet + ?Sized,
{
    if obj.dim() != set.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: set.ambient_dim(), actual: obj.dim() });
    }
    geometry::check_point(set, x)
}

/// `lambda*(x) = (N^T N)^{-1} N^T grad f(x)`, the minimizer of
/// `||grad f(x) - N lambda||`.
pub fn multipliers<O, S>(obj: &O, set: &S, x: &DVector<f64>) -> Result<DVector<f64>>
where
    O: Objective + ?Sized,
    S: ConstraintSet + ?Sized,
{
    check_inputs(obj, set, x)?;
    let space = TangentSpace::at(set, x)?;
    Ok(space.normal_coefficients(&obj.gradient(x)))
}

/// Generalized gradient `G(x)`.
pub fn generalized_gradient<O, S>(obj: &O, set: &S, x: &DVector<f64>) -> Result<DVector<f64>>
where
    O: Objective + ?Sized,
    S: ConstraintSet + ?Sized,
{
    check_inputs(obj, set, x)?;
    let space = TangentSpace::at(set, x)?;
    let grad = obj.gradient(x);
    let lambda = space.normal_coefficients(&grad);
    Ok(gradient_from_parts(&space, &grad, &lambda))
}

fn gradient_from_parts(space: &TangentSpace, grad: &DVector<f64>, lambda: &DVector<f64>) -> DVector<f64> {
    let g = grad - space.normals() * lambda;
    #[cfg(debug_assertions)]
    {
        let projected = space.project(grad);
        let gap = (&projected - &g).norm();
        debug_assert!(
            gap <= 1e-8 * (1.0 + grad.norm()),
            "multiplier and projection routes disagree by {gap:e}"
        );
    }
    g
}

/// Dense generalized Hessian `P (hess f - sum lambda*_i hess c_i) P`.
pub fn generalized_hessian<O, S>(obj: &O, set: &S, x: &DVector<f64>) -> Result<DMatrix<f64>>
where
    O: Objective + ?Sized,
    S: ConstraintSet + ?Sized,
{
    check_inputs(obj, set, x)?;
    let space = TangentSpace::at(set, x)?;
    let lambda = space.normal_coefficients(&obj.gradient(x));
    Ok(dense_hessian(obj, set, x, &space, &lambda))
}

fn dense_hessian<O, S>(obj: &O, set: &S, x: &DVector<f64>, space: &TangentSpace, lambda: &DVector<f64>) -> DMatrix<f64>
where
    O: Objective + ?Sized,
    S: ConstraintSet + ?Sized,
{
    let mut lag = obj.hessian(x);
    if !lambda.is_empty() {
        lag -= set.weighted_constraint_hessian(x, lambda);
    }
    let p = space.projector();
    let h = &p * lag * &p;
    let ht = h.transpose();
    (h + ht) * 0.5
}

/// Matrix-free generalized Hessian.
pub struct GeneralizedHessianOperator<'a, O: ?Sized, S: ?Sized> {
    obj: &'a O,
    set: &'a S,
    x: DVector<f64>,
    space: TangentSpace,
    lambda: DVector<f64>,
}

impl<O, S> SymmetricOperator for GeneralizedHessianOperator<'_, O, S>
where
    O: Objective + ?Sized,
    S: ConstraintSet + ?Sized,
{
    fn dim(&self) -> usize {
        self.x.len()
    }
    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let pv = self.space.project(v);
        let mut w = self.obj.hessian_vec(&self.x, &pv);
        if !self.lambda.is_empty() {
            w -= self.set.weighted_constraint_hessian_vec(&self.x, &self.lambda, &pv);
        }
        self.space.project(&w)
    }
}

/// The generalized Hessian as a matrix-vector product.
pub fn generalized_hessian_operator<'a, O, S>(
    obj: &'a O,
    set: &'a S,
    x: &DVector<f64>,
) -> Result<GeneralizedHessianOperator<'a, O, S>>
where
    O: Objective + ?Sized,
    S: ConstraintSet + ?Sized,
{
    check_inputs(obj, set, x)?;
    let space = TangentSpace::at(set, x)?;
    let lambda = space.normal_coefficients(&obj.gradient(x));
    Ok(GeneralizedHessianOperator { obj, set, x: x.clone(), space, lambda })
}

/// Either representation of `H(x)`.
pub enum GeneralizedHessian<'a, O: ?Sized, S: ?Sized> {
    Dense(DMatrix<f64>),
    Operator(GeneralizedHessianOperator<'a, O, S>),
}

impl<O, S> SymmetricOperator for GeneralizedHessian<'_, O, S>
where
    O: Objective + ?Sized,
    S: ConstraintSet + ?Sized,
{
    fn dim(&self) -> usize {
        match self {
            Self::Dense(m) => m.nrows(),
            Self::Operator(op) => op.dim(),
        }
    }
    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        match self {
            Self::Dense(m) => m * v,
            Self::Operator(op) => op.apply(v),
        }
    }
}

impl<O, S> GeneralizedHessian<'_, O, S>
where
    O: Objective + ?Sized,
    S: ConstraintSet + ?Sized,
{
    /// Dense matrix, assembling it column by column from the operator if
    /// needed.
    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Self::Dense(m) => m.clone(),
            Self::Operator(op) => {
                let n = op.dim();
                let mut h = DMatrix::zeros(n, n);
                for j in 0..n {
                    let mut e = DVector::zeros(n);
                    e[j] = 1.0;
                    h.set_column(j, &op.apply(&e));
                }
                h
            }
        }
    }
}

/// Everything the solver needs at a feasible point.
pub struct LagrangianState<'a, O: ?Sized, S: ?Sized> {
    pub x: DVector<f64>,
    pub value: f64,
    pub lambda_star: DVector<f64>,
    pub gen_grad: DVector<f64>,
    pub feas_residual: f64,
    obj: &'a O,
    set: &'a S,
    space: TangentSpace,
}

impl<'a, O, S> LagrangianState<'a, O, S>
where
    O: Objective + ?Sized,
    S: ConstraintSet + ?Sized,
{
    pub fn new(obj: &'a O, set: &'a S, x: &DVector<f64>) -> Result<Self> {
        check_inputs(obj, set, x)?;
        let space = TangentSpace::at(set, x)?;
        let grad = obj.gradient(x);
        let lambda_star = space.normal_coefficients(&grad);
        let gen_grad = gradient_from_parts(&space, &grad, &lambda_star);
        Ok(Self {
            x: x.clone(),
            value: obj.value(x),
            lambda_star,
            gen_grad,
            feas_residual: geometry::feasibility_residual(set, x),
            obj,
            set,
            space,
        })
    }

    pub fn tangent_space(&self) -> &TangentSpace {
        &self.space
    }

    /// `H(x)`, dense up to [`DENSE_HESSIAN_LIMIT`] coordinates.
    pub fn gen_hess(&self) -> GeneralizedHessian<'a, O, S> {
        if self.x.len() <= DENSE_HESSIAN_LIMIT {
            GeneralizedHessian::Dense(dense_hessian(self.obj, self.set, &self.x, &self.space, &self.lambda_star))
        } else {
            GeneralizedHessian::Operator(GeneralizedHessianOperator {
                obj: self.obj,
                set: self.set,
                x: self.x.clone(),
                space: self.space.clone(),
                lambda: self.lambda_star.clone(),
            })
        }
    }
}

/// Outcome of checking the second-order necessary conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalityCertificate {
    pub grad_norm: f64,
    pub min_eigenvalue: f64,
    pub is_first_order: bool,
    pub is_second_order: bool,
}

impl CriticalityCertificate {
    pub fn from_parts(grad_norm: f64, min_eigenvalue: f64, eps: f64, delta: f64) -> Self {
        let is_first_order = grad_norm <= eps;
        Self {
            grad_norm,
            min_eigenvalue,
            is_first_order,
            is_second_order: is_first_order && min_eigenvalue >= -delta,
        }
    }
}

/// Certifies `x` with `||G(x)|| <= eps` (first order) and
/// `lambda_min(H(x)) >= -delta` (second order), the smallest eigenvalue
/// coming from [`eigen::smallest_eigenpair`].
pub fn certify<O, S>(
    obj: &O,
    set: &S,
    x: &DVector<f64>,
    eps: f64,
    delta: f64,
    options: &EigenOptions,
) -> Result<CriticalityCertificate>
where
    O: Objective + ?Sized,
    S: ConstraintSet + ?Sized,
{
    let state = LagrangianState::new(obj, set, x)?;
    let hess = state.gen_hess();
    let eig = eigen::smallest_eigenpair(&hess, options.tol, options.max_iter, options.seed)?;
    Ok(CriticalityCertificate::from_parts(state.gen_grad.norm(), eig.value, eps, delta))
}

/// Uniform bound `gamma_h >= sup ||H(x)||` over the feasible set:
/// `sum gamma_{c_i,2} + sqrt(sum gamma_{c_i,1}^2) gamma_{f,1} sum gamma_{c_i,2} / sigma0^2`.
pub fn hessian_norm_bound(c: &LipschitzConstants) -> Result<f64> {
    c.validate()?;
    let sum_hess: f64 = c.gamma_c2.iter().sum();
    let gamma1: f64 = c.gamma_c1.iter().map(|g| g * g).sum();
    Ok(sum_hess + libm::sqrt(gamma1) * c.gamma_f1 * sum_hess / (c.sigma0 * c.sigma0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SphereSet;
    use crate::problems::Rayleigh;
    use alloc::vec;

    struct Linear(DVector<f64>);

    impl Objective for Linear {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn value(&self, x: &DVector<f64>) -> f64 {
            self.0.dot(x)
        }
        fn gradient(&self, _x: &DVector<f64>) -> DVector<f64> {
            self.0.clone()
        }
        fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
            DMatrix::zeros(self.0.len(), self.0.len())
        }
    }

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn rayleigh12() -> (Rayleigh, SphereSet) {
        crate::problems::rayleigh_problem(DMatrix::from_diagonal(&v(&[1.0, 2.0]))).unwrap()
    }

    #[test]
    fn multipliers_examples() {
        let s = SphereSet::new(2).unwrap();
        let lin = Linear(v(&[1.0, 0.0]));
        assert_eq!(multipliers(&lin, &s, &v(&[0.0, 1.0])).unwrap()[0], 0.0);
        let (obj, s) = rayleigh12();
        assert!((multipliers(&obj, &s, &v(&[1.0, 0.0])).unwrap()[0] - 1.0).abs() < 1e-15);
        let constant = Linear(v(&[0.0, 0.0]));
        assert_eq!(multipliers(&constant, &s, &v(&[0.6, 0.8])).unwrap()[0], 0.0);
    }

    #[test]
    fn gradient_examples() {
        let s = SphereSet::new(2).unwrap();
        let lin = Linear(v(&[1.0, 0.0]));
        assert_eq!(generalized_gradient(&lin, &s, &v(&[0.0, 1.0])).unwrap(), v(&[1.0, 0.0]));
        let (obj, s) = rayleigh12();
        assert!(generalized_gradient(&obj, &s, &v(&[1.0, 0.0])).unwrap().norm() < 1e-15);
    }

    #[test]
    fn gradient_at_diagonal_point() {
        // grad f = (x1, 2 x2) = (1, 2)/sqrt2, lambda* = 3/2, G = (-1, 1)/(2 sqrt2)
        let (obj, s) = rayleigh12();
        let r = 1.0 / libm::sqrt(2.0);
        let g = generalized_gradient(&obj, &s, &v(&[r, r])).unwrap();
        let expected = v(&[-1.0, 1.0]) * (0.5 * r);
        assert!((g - expected).norm() < 1e-15);
    }

    #[test]
    fn hessian_examples() {
        let (obj, s) = rayleigh12();
        let h1 = generalized_hessian(&obj, &s, &v(&[1.0, 0.0])).unwrap();
        assert!((h1 - DMatrix::from_diagonal(&v(&[0.0, 1.0]))).norm() < 1e-15);
        let h2 = generalized_hessian(&obj, &s, &v(&[0.0, 1.0])).unwrap();
        assert!((h2 - DMatrix::from_diagonal(&v(&[-1.0, 0.0]))).norm() < 1e-15);
        let constant = Linear(v(&[0.0, 0.0]));
        assert_eq!(generalized_hessian(&constant, &s, &v(&[0.6, 0.8])).unwrap(), DMatrix::zeros(2, 2));
    }

    #[test]
    fn operator_matches_dense() {
        let a = DMatrix::from_fn(4, 4, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let (obj, s) = crate::problems::rayleigh_problem(a).unwrap();
        let x = s.project(&v(&[0.3, -0.1, 0.7, 0.2])).unwrap();
        let dense = generalized_hessian(&obj, &s, &x).unwrap();
        let op = GeneralizedHessian::Operator(generalized_hessian_operator(&obj, &s, &x).unwrap());
        assert!((op.to_dense() - dense).norm() < 1e-13);
    }

    #[test]
    fn certificate_examples() {
        let (obj, s) = rayleigh12();
        let opts = EigenOptions { tol: 1e-12, max_iter: 1000, seed: 3 };
        let c = certify(&obj, &s, &v(&[1.0, 0.0]), 1e-8, 1e-6, &opts).unwrap();
        assert_eq!(c.grad_norm, 0.0);
        assert!(c.min_eigenvalue.abs() < 1e-12);
        assert!(c.is_first_order && c.is_second_order);

        let c = certify(&obj, &s, &v(&[0.0, 1.0]), 1e-8, 1e-6, &opts).unwrap();
        assert_eq!(c.grad_norm, 0.0);
        assert!((c.min_eigenvalue + 1.0).abs() < 1e-12);
        assert!(c.is_first_order && !c.is_second_order);

        let lin = Linear(v(&[1.0, 0.0]));
        let c = certify(&lin, &s, &v(&[0.0, 1.0]), 1e-8, 1e-6, &opts).unwrap();
        assert_eq!(c.grad_norm, 1.0);
        assert!(!c.is_first_order && !c.is_second_order);
    }

    #[test]
    fn licq_violation_propagates() {
        let (obj, s) = rayleigh12();
        let err = generalized_gradient(&obj, &s, &v(&[0.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::RankDeficiency { .. }));
    }

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
    fn hessian_bound_examples() {
        assert_eq!(hessian_norm_bound(&ones(1)).unwrap(), 2.0);
        let mut c = ones(1);
        c.gamma_f1 = 0.0;
        assert_eq!(hessian_norm_bound(&c).unwrap(), 1.0);
        assert!(matches!(hessian_norm_bound(&ones(0)), Err(Error::InvalidConstants(_))));
        let mut c = ones(1);
        c.sigma0 = 0.0;
        assert!(matches!(hessian_norm_bound(&c), Err(Error::InvalidConstants(_))));
    }
}
