//! Equality-constraint sets with exact derivatives and Euclidean projections.
//!
//! Every set works on flat coordinate vectors. Matrix-valued variables are
//! stored column-major, so a block of consecutive coordinates is one column.

use alloc::boxed::Box;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// A point in the ambient space.
pub type Point = DVector<f64>;

/// Default feasibility tolerance (infinity norm of the constraint values).
pub const DEFAULT_FEAS_TOL: f64 = 1e-10;

/// Smallest singular value of the constraint Jacobian accepted before a
/// point is reported as violating LICQ.
pub const LICQ_FLOOR: f64 = 1e-8;

/// Analytic Lipschitz and boundedness constants of a constraint set,
/// valid over the feasible set.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintConstants {
    /// Lipschitz constants of each constraint gradient.
    pub grad_lipschitz: Vec<f64>,
    /// Lipschitz constants of each constraint Hessian.
    pub hess_lipschitz: Vec<f64>,
    /// Bounds on each constraint gradient norm.
    pub grad_bound: Vec<f64>,
    /// Bounds on each constraint Hessian norm.
    pub hess_bound: Vec<f64>,
    /// Uniform lower bound on the smallest singular value of the Jacobian.
    pub sigma0: f64,
}

impl ConstraintConstants {
    fn uniform(m: usize, l1: f64, l2: f64, g1: f64, g2: f64, sigma0: f64) -> Self {
        Self {
            grad_lipschitz: alloc::vec![l1; m],
            hess_lipschitz: alloc::vec![l2; m],
            grad_bound: alloc::vec![g1; m],
            hess_bound: alloc::vec![g2; m],
            sigma0,
        }
    }

    /// Radius `sigma0 / sqrt(sum of squared gradient Lipschitz constants)`
    /// within which projections behave quadratically.
    pub fn projection_radius(&self) -> f64 {
        let lambda1: f64 = self.grad_lipschitz.iter().map(|l| l * l).sum();
        self.sigma0 / libm::sqrt(lambda1)
    }
}

/// A feasible set `{x : c(x) = 0}` together with its derivatives and the
/// Euclidean projection onto it.
///
/// Implementations are immutable after construction.
pub trait ConstraintSet: Send + Sync {
    fn ambient_dim(&self) -> usize;

    fn num_constraints(&self) -> usize;

    /// Constraint values `c(x)`.
    fn value(&self, x: &DVector<f64>) -> DVector<f64>;

    /// Jacobian `n x m`, one column per constraint gradient.
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64>;

    /// Hessian of constraint `i`.
    fn constraint_hessian(&self, i: usize, x: &DVector<f64>) -> DMatrix<f64>;

    /// `sum_i weights[i] * hess c_i(x)`.
    fn weighted_constraint_hessian(&self, x: &DVector<f64>, weights: &DVector<f64>) -> DMatrix<f64> {
        let n = self.ambient_dim();
        let mut acc = DMatrix::zeros(n, n);
        for (i, w) in weights.iter().enumerate() {
            if *w != 0.0 {
                acc += self.constraint_hessian(i, x) * *w;
            }
        }
        acc
    }

    /// `sum_i weights[i] * hess c_i(x) * v`.
    fn weighted_constraint_hessian_vec(
        &self,
        x: &DVector<f64>,
        weights: &DVector<f64>,
        v: &DVector<f64>,
    ) -> DVector<f64> {
        self.weighted_constraint_hessian(x, weights) * v
    }

    /// Euclidean projection onto the feasible set.
    fn project(&self, y: &DVector<f64>) -> Result<DVector<f64>>;

    /// Analytic constants, when the set knows them.
    fn constants(&self) -> Option<ConstraintConstants> {
        None
    }
}

impl<S: ConstraintSet + ?Sized> ConstraintSet for Box<S> {
    fn ambient_dim(&self) -> usize {
        (**self).ambient_dim()
    }
    fn num_constraints(&self) -> usize {
        (**self).num_constraints()
    }
    fn value(&self, x: &DVector<f64>) -> DVector<f64> {
        (**self).value(x)
    }
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (**self).jacobian(x)
    }
    fn constraint_hessian(&self, i: usize, x: &DVector<f64>) -> DMatrix<f64> {
        (**self).constraint_hessian(i, x)
    }
    fn weighted_constraint_hessian(&self, x: &DVector<f64>, w: &DVector<f64>) -> DMatrix<f64> {
        (**self).weighted_constraint_hessian(x, w)
    }
    fn weighted_constraint_hessian_vec(
        &self,
        x: &DVector<f64>,
        w: &DVector<f64>,
        v: &DVector<f64>,
    ) -> DVector<f64> {
        (**self).weighted_constraint_hessian_vec(x, w, v)
    }
    fn project(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        (**self).project(y)
    }
    fn constants(&self) -> Option<ConstraintConstants> {
        (**self).constants()
    }
}

/// Checks that `x` has the ambient dimension of `set` and finite entries.
pub fn check_point<S: ConstraintSet + ?Sized>(set: &S, x: &DVector<f64>) -> Result<()> {
    if x.len() != set.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: set.ambient_dim(), actual: x.len() });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// `||c(x)||_inf`.
pub fn feasibility_residual<S: ConstraintSet + ?Sized>(set: &S, x: &DVector<f64>) -> f64 {
    set.value(x).iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Validated projection `Pi(y)`.
pub fn project<S: ConstraintSet + ?Sized>(set: &S, y: &DVector<f64>) -> Result<DVector<f64>> {
    check_point(set, y)?;
    let x = set.project(y)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("projection produced non-finite coordinates"));
    }
    Ok(x)
}

/// Tangent-space projection `P_x v = v - N (N^T N)^{-1} N^T v`, `N = jac c(x)`.
pub fn tangent_project<S: ConstraintSet + ?Sized>(
    set: &S,
    x: &DVector<f64>,
    v: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_point(set, x)?;
    if v.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), actual: v.len() });
    }
    Ok(TangentSpace::at(set, x)?.project(v))
}

/// A uniformly random feasible point (Gaussian sample, then projected).
pub fn random_point<S: ConstraintSet + ?Sized>(set: &S, seed: u64) -> Result<DVector<f64>> {
    let mut rng = crate::rng::seeded(seed);
    let y = crate::rng::gaussian_vector(&mut rng, set.ambient_dim());
    project(set, &y)
}

/// Tangent and normal spaces at a feasible point, with the factored Gram
/// matrix of the constraint gradients.
#[derive(Clone, Debug)]
pub struct TangentSpace {
    normals: DMatrix<f64>,
    gram: Option<Cholesky<f64, Dyn>>,
    sigma_min: f64,
}

impl TangentSpace {
    /// Factors `N^T N` at `x`. Fails when the smallest singular value of `N`
    /// is below [`LICQ_FLOOR`].
    pub fn at<S: ConstraintSet + ?Sized>(set: &S, x: &DVector<f64>) -> Result<Self> {
        Self::from_jacobian(set.jacobian(x))
    }

    pub fn from_jacobian(normals: DMatrix<f64>) -> Result<Self> {
        let m = normals.ncols();
        if m == 0 {
            return Ok(Self { normals, gram: None, sigma_min: f64::INFINITY });
        }
        let gram = normals.transpose() * &normals;
        let lambda_min = gram.clone().symmetric_eigenvalues().min();
        let sigma_min = libm::sqrt(lambda_min.max(0.0));
        if !(sigma_min >= LICQ_FLOOR) {
            return Err(Error::RankDeficiency { sigma_min, floor: LICQ_FLOOR });
        }
        let chol = gram
            .cholesky()
            .ok_or(Error::RankDeficiency { sigma_min, floor: LICQ_FLOOR })?;
        Ok(Self { normals, gram: Some(chol), sigma_min })
    }

    /// Constraint gradients as columns.
    pub fn normals(&self) -> &DMatrix<f64> {
        &self.normals
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    /// Least-squares coefficients `(N^T N)^{-1} N^T v`.
    pub fn normal_coefficients(&self, v: &DVector<f64>) -> DVector<f64> {
        match &self.gram {
            Some(chol) => chol.solve(&(self.normals.transpose() * v)),
            None => DVector::zeros(0),
        }
    }

    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        if self.gram.is_none() {
            return v.clone();
        }
        v - &self.normals * self.normal_coefficients(v)
    }

    /// Dense tangent projector `I - N (N^T N)^{-1} N^T`.
    pub fn projector(&self) -> DMatrix<f64> {
        let n = self.normals.nrows();
        let mut p = DMatrix::identity(n, n);
        if let Some(chol) = &self.gram {
            let coeffs = chol.solve(&self.normals.transpose());
            p -= &self.normals * coeffs;
            // symmetrize rounding
            let pt = p.transpose();
            p = (p + pt) * 0.5;
        }
        p
    }
}

/// The whole space `R^n` (no constraints). Useful as the base of a slack
/// augmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EuclideanSpace {
    dim: usize,
}

impl EuclideanSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("dimension must be positive"));
        }
        Ok(Self { dim })
    }
}

impl ConstraintSet for EuclideanSpace {
    fn ambient_dim(&self) -> usize {
        self.dim
    }
    fn num_constraints(&self) -> usize {
        0
    }
    fn value(&self, _x: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(0)
    }
    fn jacobian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::zeros(self.dim, 0)
    }
    fn constraint_hessian(&self, _i: usize, _x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::zeros(self.dim, self.dim)
    }
    fn project(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(y.clone())
    }
}

/// Unit sphere `{x : (||x||^2 - 1)/2 = 0}` in `R^n`.
///
/// The halved-square form gives `jac c(x) = x` and an identity constraint
/// Hessian, so the LICQ constant is exactly one on the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphereSet {
    dim: usize,
}

impl SphereSet {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("sphere dimension must be positive"));
        }
        Ok(Self { dim })
    }
}

fn normalize(y: &[f64]) -> Result<impl Iterator<Item = f64> + '_> {
    let norm = libm::sqrt(y.iter().map(|v| v * v).sum::<f64>());
    if norm == 0.0 {
        return Err(Error::ZeroInput);
    }
    if !norm.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(y.iter().map(move |v| v / norm))
}

impl ConstraintSet for SphereSet {
    fn ambient_dim(&self) -> usize {
        self.dim
    }
    fn num_constraints(&self) -> usize {
        1
    }
    fn value(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_element(1, 0.5 * (x.norm_squared() - 1.0))
    }
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.dim, 1, x.as_slice())
    }
    fn constraint_hessian(&self, _i: usize, _x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::identity(self.dim, self.dim)
    }
    fn weighted_constraint_hessian(&self, _x: &DVector<f64>, w: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::identity(self.dim, self.dim) * w[0]
    }
    fn weighted_constraint_hessian_vec(
        &self,
        _x: &DVector<f64>,
        w: &DVector<f64>,
        v: &DVector<f64>,
    ) -> DVector<f64> {
        v * w[0]
    }
    fn project(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(DVector::from_iterator(self.dim, normalize(y.as_slice())?))
    }
    fn constants(&self) -> Option<ConstraintConstants> {
        Some(ConstraintConstants::uniform(1, 1.0, 0.0, 1.0, 1.0, 1.0))
    }
}

/// Cartesian product of unit spheres; block `i` occupies consecutive
/// coordinates `offset_i .. offset_i + n_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductOfSpheresSet {
    blocks: Vec<usize>,
    offsets: Vec<usize>,
    dim: usize,
}

impl ProductOfSpheresSet {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(Error::InvalidConfig("sphere blocks must be non-empty"));
        }
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut dim = 0;
        for &b in &blocks {
            offsets.push(dim);
            dim += b;
        }
        Ok(Self { blocks, offsets, dim })
    }

    /// `count` spheres of equal dimension `block`.
    pub fn uniform(count: usize, block: usize) -> Result<Self> {
        Self::new(alloc::vec![block; count])
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn block_range(&self, i: usize) -> core::ops::Range<usize> {
        self.offsets[i]..self.offsets[i] + self.blocks[i]
    }
}

impl ConstraintSet for ProductOfSpheresSet {
    fn ambient_dim(&self) -> usize {
        self.dim
    }
    fn num_constraints(&self) -> usize {
        self.blocks.len()
    }
    fn value(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.blocks.len(), |i, _| {
            0.5 * (x.rows_range(self.block_range(i)).norm_squared() - 1.0)
        })
    }
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(self.dim, self.blocks.len());
        for i in 0..self.blocks.len() {
            let r = self.block_range(i);
            jac.view_mut((r.start, i), (r.len(), 1)).copy_from(&x.rows_range(r));
        }
        jac
    }
    fn constraint_hessian(&self, i: usize, _x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.dim, self.dim);
        for j in self.block_range(i) {
            h[(j, j)] = 1.0;
        }
        h
    }
    fn weighted_constraint_hessian(&self, _x: &DVector<f64>, w: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.blocks.len() {
            for j in self.block_range(i) {
                h[(j, j)] = w[i];
            }
        }
        h
    }
    fn weighted_constraint_hessian_vec(
        &self,
        _x: &DVector<f64>,
        w: &DVector<f64>,
        v: &DVector<f64>,
    ) -> DVector<f64> {
        let mut out = v.clone();
        for i in 0..self.blocks.len() {
            for j in self.block_range(i) {
                out[j] *= w[i];
            }
        }
        out
    }
    fn project(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        let mut out = DVector::zeros(self.dim);
        for i in 0..self.blocks.len() {
            let r = self.block_range(i);
            for (dst, v) in out.as_mut_slice()[r.clone()].iter_mut().zip(normalize(&y.as_slice()[r])?) {
                *dst = v;
            }
        }
        Ok(out)
    }
    fn constants(&self) -> Option<ConstraintConstants> {
        Some(ConstraintConstants::uniform(self.blocks.len(), 1.0, 0.0, 1.0, 1.0, 1.0))
    }
}

/// Extra information returned by [`OrthogonalitySet::project_with_info`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionInfo {
    /// The input was rank deficient, so the closest point is not unique.
    pub nonunique: bool,
    pub smallest_singular_value: f64,
}

/// Matrices with orthonormal columns, `{X in R^{r x k} : X^T X = I}`.
///
/// There is one constraint per entry `(i, j)`, `i <= j`, of `X^T X - I`,
/// ordered row by row over the upper triangle. Diagonal constraints use
/// `(||x_i||^2 - 1)/2` and off-diagonal ones `x_i . x_j`, so the constraint
/// gradients are mutually orthogonal on the feasible set with norms 1 and
/// `sqrt(2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthogonalitySet {
    rows: usize,
    cols: usize,
    pairs: Vec<(usize, usize)>,
}

impl OrthogonalitySet {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if cols == 0 || rows < cols {
            return Err(Error::InvalidConfig("orthogonality set needs rows >= cols >= 1"));
        }
        let mut pairs = Vec::with_capacity(cols * (cols + 1) / 2);
        for i in 0..cols {
            for j in i..cols {
                pairs.push((i, j));
            }
        }
        Ok(Self { rows, cols, pairs })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Column pair `(i, j)` of constraint `index`.
    pub fn constraint_pair(&self, index: usize) -> (usize, usize) {
        self.pairs[index]
    }

    fn column<'a>(&self, x: &'a DVector<f64>, j: usize) -> nalgebra::DVectorView<'a, f64> {
        x.rows(j * self.rows, self.rows)
    }

    /// Projection `U V^T` from a thin SVD `Y = U S V^T`, flagging inputs whose
    /// projection is not unique.
    pub fn project_with_info(&self, y: &DVector<f64>) -> Result<(DVector<f64>, ProjectionInfo)> {
        if y.len() != self.rows * self.cols {
            return Err(Error::DimensionMismatch { expected: self.rows * self.cols, actual: y.len() });
        }
        let mat = DMatrix::from_column_slice(self.rows, self.cols, y.as_slice());
        let svd = mat.svd(true, true);
        let (u, v_t) = match (svd.u, svd.v_t) {
            (Some(u), Some(v_t)) => (u, v_t),
            _ => return Err(Error::Numerical("SVD failed")),
        };
        let s = &svd.singular_values;
        let largest = s.max();
        let smallest = s.min();
        let x = u * v_t;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("SVD produced non-finite factors"));
        }
        let nonunique = smallest <= 1e-12 * largest.max(f64::MIN_POSITIVE);
        Ok((
            DVector::from_column_slice(x.as_slice()),
            ProjectionInfo { nonunique, smallest_singular_value: smallest },
        ))
    }
}

impl ConstraintSet for OrthogonalitySet {
    fn ambient_dim(&self) -> usize {
        self.rows * self.cols
    }
    fn num_constraints(&self) -> usize {
        self.pairs.len()
    }
    fn value(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.pairs.len(),
            self.pairs.iter().map(|&(i, j)| {
                let d = self.column(x, i).dot(&self.column(x, j));
                if i == j {
                    0.5 * (d - 1.0)
                } else {
                    d
                }
            }),
        )
    }
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let r = self.rows;
        let mut jac = DMatrix::zeros(self.ambient_dim(), self.pairs.len());
        for (c, &(i, j)) in self.pairs.iter().enumerate() {
            if i == j {
                jac.view_mut((i * r, c), (r, 1)).copy_from(&self.column(x, i));
            } else {
                jac.view_mut((i * r, c), (r, 1)).copy_from(&self.column(x, j));
                jac.view_mut((j * r, c), (r, 1)).copy_from(&self.column(x, i));
            }
        }
        jac
    }
    fn constraint_hessian(&self, index: usize, _x: &DVector<f64>) -> DMatrix<f64> {
        let r = self.rows;
        let n = self.ambient_dim();
        let (i, j) = self.pairs[index];
        let mut h = DMatrix::zeros(n, n);
        for t in 0..r {
            if i == j {
                h[(i * r + t, i * r + t)] = 1.0;
            } else {
                h[(i * r + t, j * r + t)] = 1.0;
                h[(j * r + t, i * r + t)] = 1.0;
            }
        }
        h
    }
    fn weighted_constraint_hessian(&self, _x: &DVector<f64>, w: &DVector<f64>) -> DMatrix<f64> {
        let r = self.rows;
        let n = self.ambient_dim();
        let mut h = DMatrix::zeros(n, n);
        for (c, &(i, j)) in self.pairs.iter().enumerate() {
            for t in 0..r {
                if i == j {
                    h[(i * r + t, i * r + t)] += w[c];
                } else {
                    h[(i * r + t, j * r + t)] += w[c];
                    h[(j * r + t, i * r + t)] += w[c];
                }
            }
        }
        h
    }
    fn project(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.project_with_info(y).map(|(x, _)| x)
    }
    fn constants(&self) -> Option<ConstraintConstants> {
        let m = self.pairs.len();
        let grad_bound = self
            .pairs
            .iter()
            .map(|&(i, j)| if i == j { 1.0 } else { core::f64::consts::SQRT_2 })
            .collect();
        Some(ConstraintConstants {
            grad_lipschitz: alloc::vec![1.0; m],
            hess_lipschitz: alloc::vec![0.0; m],
            grad_bound,
            hess_bound: alloc::vec![1.0; m],
            sigma0: 1.0,
        })
    }
}

/// A twice-differentiable inequality `g(x) <= 0`.
pub trait Inequality: Send + Sync {
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64>;
}

/// `a . x - b <= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineInequality {
    pub normal: DVector<f64>,
    pub offset: f64,
}

impl Inequality for AffineInequality {
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.normal.dot(x) - self.offset
    }
    fn gradient(&self, _x: &DVector<f64>) -> DVector<f64> {
        self.normal.clone()
    }
    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::zeros(self.normal.len(), self.normal.len())
    }
}

/// `||x - center||^2 - radius^2 <= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallInequality {
    pub center: DVector<f64>,
    pub radius: f64,
}

impl Inequality for BallInequality {
    fn value(&self, x: &DVector<f64>) -> f64 {
        (x - &self.center).norm_squared() - self.radius * self.radius
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (x - &self.center) * 2.0
    }
    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.center.len();
        DMatrix::identity(n, n) * 2.0
    }
}

/// Squared-slack reformulation of `base` plus inequalities `g_j(x) <= 0`:
/// the variable is `(x, z)` and constraint `m_base + j` reads
/// `g_j(x) + z_j^2 = 0`.
pub struct SlackAugmentedSet<B> {
    base: B,
    inequalities: Vec<Box<dyn Inequality>>,
    max_restoration_steps: usize,
}

/// Builds the squared-slack augmentation of `base`.
pub fn slack_augment<B: ConstraintSet>(
    base: B,
    inequalities: Vec<Box<dyn Inequality>>,
) -> Result<SlackAugmentedSet<B>> {
    if inequalities.is_empty() {
        return Err(Error::InvalidConfig("slack augmentation needs at least one inequality"));
    }
    Ok(SlackAugmentedSet { base, inequalities, max_restoration_steps: 100 })
}

impl<B: ConstraintSet> SlackAugmentedSet<B> {
    pub fn base(&self) -> &B {
        &self.base
    }

    pub fn num_inequalities(&self) -> usize {
        self.inequalities.len()
    }

    fn split<'a>(&self, xz: &'a DVector<f64>) -> (DVector<f64>, nalgebra::DVectorView<'a, f64>) {
        let n = self.base.ambient_dim();
        (xz.rows(0, n).into_owned(), xz.rows(n, self.inequalities.len()))
    }
}

impl<B: ConstraintSet> ConstraintSet for SlackAugmentedSet<B> {
    fn ambient_dim(&self) -> usize {
        self.base.ambient_dim() + self.inequalities.len()
    }
    fn num_constraints(&self) -> usize {
        self.base.num_constraints() + self.inequalities.len()
    }
    fn value(&self, xz: &DVector<f64>) -> DVector<f64> {
        let (x, z) = self.split(xz);
        let base = self.base.value(&x);
        let mb = base.len();
        DVector::from_fn(self.num_constraints(), |i, _| {
            if i < mb {
                base[i]
            } else {
                let j = i - mb;
                self.inequalities[j].value(&x) + z[j] * z[j]
            }
        })
    }
    fn jacobian(&self, xz: &DVector<f64>) -> DMatrix<f64> {
        let n = self.base.ambient_dim();
        let (x, z) = self.split(xz);
        let mb = self.base.num_constraints();
        let mut jac = DMatrix::zeros(self.ambient_dim(), self.num_constraints());
        if mb > 0 {
            jac.view_mut((0, 0), (n, mb)).copy_from(&self.base.jacobian(&x));
        }
        for (j, g) in self.inequalities.iter().enumerate() {
            jac.view_mut((0, mb + j), (n, 1)).copy_from(&g.gradient(&x));
            jac[(n + j, mb + j)] = 2.0 * z[j];
        }
        jac
    }
    fn constraint_hessian(&self, i: usize, xz: &DVector<f64>) -> DMatrix<f64> {
        let n = self.base.ambient_dim();
        let (x, _) = self.split(xz);
        let mb = self.base.num_constraints();
        let mut h = DMatrix::zeros(self.ambient_dim(), self.ambient_dim());
        if i < mb {
            h.view_mut((0, 0), (n, n)).copy_from(&self.base.constraint_hessian(i, &x));
        } else {
            let j = i - mb;
            h.view_mut((0, 0), (n, n)).copy_from(&self.inequalities[j].hessian(&x));
            h[(n + j, n + j)] = 2.0;
        }
        h
    }
    /// Gauss-Newton feasibility restoration from `y`: repeated minimum-norm
    /// corrections `y <- y - N (N^T N)^{-1} c(y)` until `||c||_inf` drops
    /// below a tenth of [`DEFAULT_FEAS_TOL`]. This agrees with the exact
    /// closest point up to second order in `||c(y)||`.
    fn project(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        let mut cur = y.clone();
        for _ in 0..self.max_restoration_steps {
            let c = self.value(&cur);
            let res = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if res <= 0.1 * DEFAULT_FEAS_TOL {
                return Ok(cur);
            }
            let space = TangentSpace::from_jacobian(self.jacobian(&cur))
                .map_err(|_| Error::Numerical("slack restoration hit a singular Jacobian"))?;
            let step = match &space.gram {
                Some(chol) => space.normals() * chol.solve(&c),
                None => return Ok(cur),
            };
            cur -= step;
            if cur.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical("slack restoration diverged"));
            }
        }
        Err(Error::Numerical("slack restoration did not converge"))
    }
}
