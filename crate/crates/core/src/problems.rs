//! Ready-made problems: Rayleigh quotients on the sphere, symmetric
//! orthogonal tensor decomposition (one component or all at once), max-cut
//! in Burer-Monteiro form, and random polynomials for testing.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{self, ProductOfSpheresSet, SphereSet};
use crate::lagrangian::{Objective, ObjectiveConstants};
use crate::rng;
use crate::solver::{self, SolveStatus, SolverConfig};

/// Largest `n` for which the dense order-4 array is stored.
pub const MAX_TENSOR_DIM: usize = 30;

const SYMMETRY_TOL: f64 = 1e-12;

fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().symmetric_eigenvalues().iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Largest `|A_ij - A_ji|`.
fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in i + 1..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

fn check_symmetric(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), actual: a.ncols() });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let gap = asymmetry(a);
    let scale = a.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    if gap > SYMMETRY_TOL * scale {
        return Err(Error::Asymmetry(gap));
    }
    Ok(())
}

/// `f(x) = x^T A x / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rayleigh {
    a: DMatrix<f64>,
    norm: f64,
}

impl Rayleigh {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }
}

/// The Rayleigh quotient of a symmetric `A` on the unit sphere; its minimum
/// is `lambda_min(A) / 2`.
pub fn rayleigh_problem(a: DMatrix<f64>) -> Result<(Rayleigh, SphereSet)> {
    check_symmetric(&a)?;
    let set = SphereSet::new(a.nrows())?;
    let norm = spectral_norm(&a);
    Ok((Rayleigh { a, norm }, set))
}

impl Objective for Rayleigh {
    fn dim(&self) -> usize {
        self.a.nrows()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.a * x))
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x
    }
    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        self.a.clone()
    }
    fn hessian_vec(&self, _x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        &self.a * v
    }
    fn constants(&self) -> Option<ObjectiveConstants> {
        Some(ObjectiveConstants {
            grad_lipschitz: self.norm,
            hess_lipschitz: 0.0,
            grad_bound: self.norm,
            hess_bound: self.norm,
        })
    }
}

/// Fully symmetric order-4 tensor over `R^n`, `n <= 30`.
///
/// Built from components, it also keeps the factors `V`, `w` of
/// `T = sum_i w_i v_i (x) v_i (x) v_i (x) v_i`, and contractions use them.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricTensor4 {
    n: usize,
    data: Vec<f64>,
    factors: Option<(DMatrix<f64>, DVector<f64>)>,
}

impl SymmetricTensor4 {
    fn index(n: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * n + j) * n + k) * n + l
    }

    fn check_dim(n: usize) -> Result<()> {
        if n == 0 || n > MAX_TENSOR_DIM {
            return Err(Error::InvalidConfig("tensor dimension must lie in 1..=30"));
        }
        Ok(())
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::check_dim(n)?;
        Ok(Self { n, data: vec![0.0; n * n * n * n], factors: None })
    }

    /// From a row-major `n^4` array, checked for symmetry under all index
    /// permutations.
    pub fn from_dense(n: usize, data: Vec<f64>) -> Result<Self> {
        Self::check_dim(n)?;
        if data.len() != n * n * n * n {
            return Err(Error::DimensionMismatch { expected: n * n * n * n, actual: data.len() });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let t = Self { n, data, factors: None };
        let gap = t.asymmetry();
        let scale = t.data.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        if gap > SYMMETRY_TOL * scale {
            return Err(Error::Asymmetry(gap));
        }
        Ok(t)
    }

    /// `sum_i w_i v_i^{(x)4}` over the columns `v_i` of `v`.
    pub fn from_components(v: DMatrix<f64>, weights: DVector<f64>) -> Result<Self> {
        let n = v.nrows();
        Self::check_dim(n)?;
        if weights.len() != v.ncols() {
            return Err(Error::DimensionMismatch { expected: v.ncols(), actual: weights.len() });
        }
        let mut data = vec![0.0; n * n * n * n];
        for (c, w) in weights.iter().enumerate() {
            let col = v.column(c);
            for i in 0..n {
                for j in 0..n {
                    let ij = w * col[i] * col[j];
                    for k in 0..n {
                        let ijk = ij * col[k];
                        for l in 0..n {
                            data[Self::index(n, i, j, k, l)] += ijk * col[l];
                        }
                    }
                }
            }
        }
        Ok(Self { n, data, factors: Some((v, weights)) })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[Self::index(self.n, i, j, k, l)]
    }

    pub fn factors(&self) -> Option<(&DMatrix<f64>, &DVector<f64>)> {
        self.factors.as_ref().map(|(v, w)| (v, w))
    }

    /// Largest change of an entry under a transposition of two indices
    /// (transpositions generate all permutations).
    pub fn asymmetry(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let t = self.get(i, j, k, l);
                        for other in [self.get(j, i, k, l), self.get(i, k, j, l), self.get(i, j, l, k)] {
                            worst = worst.max((t - other).abs());
                        }
                    }
                }
            }
        }
        worst
    }

    /// Frobenius norm of the dense array.
    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    /// Dense `T(., ., u, w)`.
    pub fn dense_matrix_contraction(&self, u: &DVector<f64>, w: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n;
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    let base = Self::index(n, i, j, k, 0);
                    let inner: f64 = self.data[base..base + n].iter().zip(w.iter()).map(|(t, b)| t * b).sum();
                    acc += inner * u[k];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// `T(., ., u, w)`.
    pub fn matrix_contraction(&self, u: &DVector<f64>, w: &DVector<f64>) -> DMatrix<f64> {
        match &self.factors {
            Some((v, weights)) => {
                let a = v.tr_mul(u);
                let b = v.tr_mul(w);
                let scale = DVector::from_fn(weights.len(), |i, _| weights[i] * a[i] * b[i]);
                let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |r, c| v[(r, c)] * scale[c]);
                scaled * v.transpose()
            }
            None => self.dense_matrix_contraction(u, w),
        }
    }

    /// `T(., x, x, x)`.
    pub fn vector_contraction(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.factors {
            Some((v, weights)) => {
                let a = v.tr_mul(x);
                let coeff = DVector::from_fn(weights.len(), |i, _| weights[i] * a[i] * a[i] * a[i]);
                v * coeff
            }
            None => self.dense_matrix_contraction(x, x) * x,
        }
    }

    /// `T(x, x, x, x)` from the dense array.
    pub fn dense_full_contraction(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(self.dense_matrix_contraction(x, x) * x))
    }

    /// `T(x, x, x, x)`.
    pub fn full_contraction(&self, x: &DVector<f64>) -> f64 {
        match &self.factors {
            Some((v, weights)) => {
                let a = v.tr_mul(x);
                weights.iter().zip(a.iter()).map(|(w, a)| w * a * a * a * a).sum()
            }
            None => self.dense_full_contraction(x),
        }
    }
}

/// A random orthogonal `V` (QR of a seeded Gaussian matrix, signs fixed so
/// that `R` has a positive diagonal) and `T = sum_i v_i^{(x)4}`.
pub fn synthesize_sotd(n: usize, seed: u64) -> Result<(SymmetricTensor4, DMatrix<f64>)> {
    if !(2..=MAX_TENSOR_DIM).contains(&n) {
        return Err(Error::InvalidConfig("synthetic tensors need 2 <= n <= 30"));
    }
    let mut r = rng::seeded(seed);
    let g = DMatrix::from_column_slice(n, n, rng::gaussian_vector(&mut r, n * n).as_slice());
    let qr = g.qr();
    let mut q = qr.q();
    let rr = qr.r();
    for c in 0..n {
        if rr[(c, c)] < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    let t = SymmetricTensor4::from_components(q.clone(), DVector::from_element(n, 1.0))?;
    Ok((t, q))
}

/// `min_i min(||x - v_i||, ||x + v_i||)` over the columns of `v`.
pub fn recovery_error(x: &DVector<f64>, v: &DMatrix<f64>) -> f64 {
    v.column_iter()
        .map(|c| (x - c).norm().min((x + c).norm()))
        .fold(f64::INFINITY, f64::min)
}

/// Symmetric distance between the columns of `x` (flattened column-major,
/// same shape as `v`) and the columns of `v`, both up to sign: the larger of
/// `max_i recovery_error(x_i, V)` and `max_j recovery_error(v_j, X)`.
///
/// When it is below `1/sqrt(2)` the columns of `X` are a signed permutation
/// of those of `V` within that distance per column.
pub fn signed_permutation_error(x: &DVector<f64>, v: &DMatrix<f64>) -> Result<f64> {
    if x.len() != v.len() {
        return Err(Error::DimensionMismatch { expected: v.len(), actual: x.len() });
    }
    let xm = DMatrix::from_column_slice(v.nrows(), v.ncols(), x.as_slice());
    let forward = xm.column_iter().map(|c| recovery_error(&c.into_owned(), v)).fold(0.0, f64::max);
    let backward = v.column_iter().map(|c| recovery_error(&c.into_owned(), &xm)).fold(0.0, f64::max);
    Ok(forward.max(backward))
}

/// `f(x) = sign * T(x, x, x, x)` on the unit sphere. The default sign is
/// `-1`, for which the second-order critical points are exactly the `+-v_i`
/// of an orthogonally decomposable `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SotdSingle {
    tensor: SymmetricTensor4,
    sign: f64,
}

impl SotdSingle {
    pub fn tensor(&self) -> &SymmetricTensor4 {
        &self.tensor
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }
}

/// Single-component problem, `f = -T(x, x, x, x)`.
pub fn sotd_single(t: SymmetricTensor4) -> Result<(SotdSingle, SphereSet)> {
    sotd_single_signed(t, true)
}

/// Single-component problem with `f = -T(x^4)` when `negate`, else
/// `f = +T(x^4)`.
pub fn sotd_single_signed(t: SymmetricTensor4, negate: bool) -> Result<(SotdSingle, SphereSet)> {
    let set = SphereSet::new(t.dim())?;
    let sign = if negate { -1.0 } else { 1.0 };
    Ok((SotdSingle { tensor: t, sign }, set))
}

impl Objective for SotdSingle {
    fn dim(&self) -> usize {
        self.tensor.dim()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.sign * self.tensor.full_contraction(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.tensor.vector_contraction(x) * (4.0 * self.sign)
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.tensor.matrix_contraction(x, x) * (12.0 * self.sign)
    }
    fn constants(&self) -> Option<ObjectiveConstants> {
        // |T(a, b, c, d)| <= ||T||_F ||a|| ||b|| ||c|| ||d||, on the unit ball
        let f = self.tensor.frobenius_norm();
        Some(ObjectiveConstants {
            grad_lipschitz: 12.0 * f,
            hess_lipschitz: 24.0 * f,
            grad_bound: 4.0 * f,
            hess_bound: 12.0 * f,
        })
    }
}

/// `f(X) = sum_{i != j} T(x_i, x_i, x_j, x_j)` over `X = [x_1 .. x_n]` with
/// unit columns, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SotdJoint {
    tensor: SymmetricTensor4,
}

impl SotdJoint {
    fn column(&self, x: &DVector<f64>, i: usize) -> DVector<f64> {
        let n = self.tensor.dim();
        x.rows(i * n, n).into_owned()
    }

    fn columns(&self, x: &DVector<f64>) -> Vec<DVector<f64>> {
        (0..self.tensor.dim()).map(|i| self.column(x, i)).collect()
    }

    pub fn tensor(&self) -> &SymmetricTensor4 {
        &self.tensor
    }
}

/// All-components problem on the product of `n` unit spheres in `R^n`.
pub fn sotd_joint(t: SymmetricTensor4) -> Result<(SotdJoint, ProductOfSpheresSet)> {
    let n = t.dim();
    let set = ProductOfSpheresSet::uniform(n, n)?;
    Ok((SotdJoint { tensor: t }, set))
}

impl Objective for SotdJoint {
    fn dim(&self) -> usize {
        let n = self.tensor.dim();
        n * n
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        let cols = self.columns(x);
        let mut total = 0.0;
        for (j, xj) in cols.iter().enumerate() {
            let m = self.tensor.matrix_contraction(xj, xj);
            for (i, xi) in cols.iter().enumerate() {
                if i != j {
                    total += xi.dot(&(&m * xi));
                }
            }
        }
        total
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.tensor.dim();
        let cols = self.columns(x);
        let ms: Vec<DMatrix<f64>> = cols.iter().map(|c| self.tensor.matrix_contraction(c, c)).collect();
        let total: DMatrix<f64> = ms.iter().fold(DMatrix::zeros(n, n), |acc, m| acc + m);
        let mut g = DVector::zeros(n * n);
        for (p, xp) in cols.iter().enumerate() {
            let others = &total - &ms[p];
            g.rows_mut(p * n, n).copy_from(&(others * xp * 4.0));
        }
        g
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.tensor.dim();
        let cols = self.columns(x);
        let ms: Vec<DMatrix<f64>> = cols.iter().map(|c| self.tensor.matrix_contraction(c, c)).collect();
        let total: DMatrix<f64> = ms.iter().fold(DMatrix::zeros(n, n), |acc, m| acc + m);
        let mut h = DMatrix::zeros(n * n, n * n);
        for p in 0..n {
            h.view_mut((p * n, p * n), (n, n)).copy_from(&((&total - &ms[p]) * 4.0));
            for q in 0..n {
                if q != p {
                    let block = self.tensor.matrix_contraction(&cols[p], &cols[q]) * 8.0;
                    h.view_mut((p * n, q * n), (n, n)).copy_from(&block);
                }
            }
        }
        h
    }
}

/// Weighted graph for max-cut with the factor rank `p` of the relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxCutInstance {
    weights: DMatrix<f64>,
    p: usize,
}

/// `ceil(sqrt(2 n))`.
pub fn default_rank(n: usize) -> usize {
    libm::ceil(libm::sqrt(2.0 * n as f64)) as usize
}

impl MaxCutInstance {
    /// `weights` must be symmetric, nonnegative, with a zero diagonal.
    /// `p = None` selects [`default_rank`].
    pub fn new(weights: DMatrix<f64>, p: Option<usize>) -> Result<Self> {
        let n = weights.nrows();
        if n == 0 || weights.ncols() != n {
            return Err(Error::InvalidWeights("weight matrix must be square and non-empty"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidWeights("weights must be finite and nonnegative"));
        }
        if asymmetry(&weights) != 0.0 {
            return Err(Error::InvalidWeights("weight matrix must be symmetric"));
        }
        if (0..n).any(|i| weights[(i, i)] != 0.0) {
            return Err(Error::InvalidWeights("weight matrix must have a zero diagonal"));
        }
        let p = p.unwrap_or_else(|| default_rank(n));
        if p == 0 {
            return Err(Error::InvalidConfig("factor rank must be positive"));
        }
        Ok(Self { weights, p })
    }

    /// From 0-indexed weighted edges `(u, v, w)`; repeated edges add up.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)], p: Option<usize>) -> Result<Self> {
        let mut w = DMatrix::zeros(n, n);
        for &(u, v, weight) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidWeights("edge endpoint out of range"));
            }
            if u == v {
                return Err(Error::InvalidWeights("self-loops are not allowed"));
            }
            w[(u, v)] += weight;
            w[(v, u)] += weight;
        }
        Self::new(w, p)
    }

    pub fn num_vertices(&self) -> usize {
        self.weights.nrows()
    }

    pub fn rank(&self) -> usize {
        self.p
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    /// Value of the cut given by `+-1` labels.
    pub fn cut_of_labels(&self, labels: &[bool]) -> f64 {
        let n = self.num_vertices();
        let mut total = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                if labels[i] != labels[j] {
                    total += self.weights[(i, j)];
                }
            }
        }
        total
    }
}

/// `f(L) = Tr(L^T C L)`, `C = W / 4`, where the rows of `L` are the unit
/// vectors attached to the vertices. The flat variable stores row `i` of
/// `L` at coordinates `i p .. (i + 1) p`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxCut {
    instance: MaxCutInstance,
    cost: DMatrix<f64>,
    cost_norm: f64,
}

impl MaxCut {
    pub fn instance(&self) -> &MaxCutInstance {
        &self.instance
    }

    /// The `p x n` matrix whose columns are the vertex vectors.
    fn vectors(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.instance.p, self.instance.num_vertices(), x.as_slice())
    }

    /// Relaxed cut `(1/4) sum_{i,j} W_ij (1 - r_i . r_j)` over ordered pairs.
    pub fn cut_value(&self, x: &DVector<f64>) -> f64 {
        let r = self.vectors(x);
        let gram = r.tr_mul(&r);
        self.instance.weights.zip_map(&gram, |w, g| w * (1.0 - g)).sum() * 0.25
    }

    /// Labels from the sign of `r_i . h` for a seeded random hyperplane
    /// normal `h`.
    pub fn hyperplane_round(&self, x: &DVector<f64>, seed: u64) -> Vec<bool> {
        let r = self.vectors(x);
        let mut rg = rng::seeded(seed);
        let h = rng::gaussian_vector(&mut rg, self.instance.p);
        r.tr_mul(&h).iter().map(|s| *s >= 0.0).collect()
    }
}

/// Burer-Monteiro form of the max-cut relaxation on a product of `n` unit
/// spheres in `R^p`.
pub fn maxcut_bm(instance: MaxCutInstance) -> Result<(MaxCut, ProductOfSpheresSet)> {
    let set = ProductOfSpheresSet::uniform(instance.num_vertices(), instance.p)?;
    let cost = &instance.weights * 0.25;
    let cost_norm = spectral_norm(&cost);
    Ok((MaxCut { instance, cost, cost_norm }, set))
}

impl Objective for MaxCut {
    fn dim(&self) -> usize {
        self.instance.num_vertices() * self.instance.p
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        let r = self.vectors(x);
        (&r * &self.cost).dot(&r)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let g = self.vectors(x) * &self.cost * 2.0;
        DVector::from_column_slice(g.as_slice())
    }
    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        let p = self.instance.p;
        let n = self.instance.num_vertices();
        let mut h = DMatrix::zeros(n * p, n * p);
        for i in 0..n {
            for j in 0..n {
                let c = 2.0 * self.cost[(i, j)];
                if c != 0.0 {
                    for t in 0..p {
                        h[(i * p + t, j * p + t)] = c;
                    }
                }
            }
        }
        h
    }
    fn hessian_vec(&self, _x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let g = self.vectors(v) * &self.cost * 2.0;
        DVector::from_column_slice(g.as_slice())
    }
    fn constants(&self) -> Option<ObjectiveConstants> {
        // ||L||_F = sqrt(n) on the feasible set
        let c = self.cost_norm;
        let n = self.instance.num_vertices() as f64;
        Some(ObjectiveConstants {
            grad_lipschitz: 2.0 * c,
            hess_lipschitz: 0.0,
            grad_bound: 2.0 * c * libm::sqrt(n),
            hess_bound: 2.0 * c,
        })
    }
}

/// A random polynomial of degree at most 4,
/// `f(x) = b.x + x^T Q x / 2 + sum_k c_k (a_k . x)^3 + sum_k e_k (u_k . x)^4`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    linear: DVector<f64>,
    quadratic: DMatrix<f64>,
    cubic: Vec<(f64, DVector<f64>)>,
    quartic: Vec<(f64, DVector<f64>)>,
}

impl Polynomial {
    /// Gaussian coefficients; terms above `degree` are left out.
    pub fn random(n: usize, degree: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("dimension must be positive"));
        }
        if degree > 4 {
            return Err(Error::InvalidConfig("polynomial degree must be at most 4"));
        }
        let mut r = rng::seeded(seed);
        let mut draw = |len: usize| rng::gaussian_vector(&mut r, len);
        let linear = if degree >= 1 { draw(n) } else { DVector::zeros(n) };
        let quadratic = if degree >= 2 {
            let b = DMatrix::from_column_slice(n, n, draw(n * n).as_slice());
            (&b + b.transpose()) * 0.5
        } else {
            DMatrix::zeros(n, n)
        };
        let mut terms = |present: bool| -> Vec<(f64, DVector<f64>)> {
            if !present {
                return Vec::new();
            }
            (0..2).map(|_| (draw(1)[0], draw(n))).collect()
        };
        let cubic = terms(degree >= 3);
        let quartic = terms(degree >= 4);
        Ok(Self { linear, quadratic, cubic, quartic })
    }

    /// `f(x) = b.x`.
    pub fn linear(b: DVector<f64>) -> Self {
        let n = b.len();
        Self { linear: b, quadratic: DMatrix::zeros(n, n), cubic: Vec::new(), quartic: Vec::new() }
    }
}

impl Objective for Polynomial {
    fn dim(&self) -> usize {
        self.linear.len()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        let mut f = self.linear.dot(x) + 0.5 * x.dot(&(&self.quadratic * x));
        for (c, a) in &self.cubic {
            let s = a.dot(x);
            f += c * s * s * s;
        }
        for (e, u) in &self.quartic {
            let s = u.dot(x);
            f += e * s * s * s * s;
        }
        f
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = &self.linear + &self.quadratic * x;
        for (c, a) in &self.cubic {
            let s = a.dot(x);
            g += a * (3.0 * c * s * s);
        }
        for (e, u) in &self.quartic {
            let s = u.dot(x);
            g += u * (4.0 * e * s * s * s);
        }
        g
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = self.quadratic.clone();
        for (c, a) in &self.cubic {
            let s = a.dot(x);
            h += a * a.transpose() * (6.0 * c * s);
        }
        for (e, u) in &self.quartic {
            let s = u.dot(x);
            h += u * u.transpose() * (12.0 * e * s * s);
        }
        h
    }
}

/// Distinct components found by restarting [`solver::negative_curvature_solve`]
/// on a single-component problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSearch {
    /// Components found, one per sign class, in discovery order.
    pub components: Vec<DVector<f64>>,
    /// Number of solves ending at a second-order critical point.
    pub second_order_endpoints: usize,
    pub restarts: usize,
}

/// Restarts the solver from seeded random points and keeps every
/// second-order critical endpoint that differs (up to sign) by more than
/// `separation` from all components already recorded.
pub fn collect_components(
    problem: &SotdSingle,
    set: &SphereSet,
    restarts: usize,
    separation: f64,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<ComponentSearch> {
    let mut components: Vec<DVector<f64>> = Vec::new();
    let mut second_order_endpoints = 0;
    for r in 0..restarts {
        let x0 = geometry::random_point(set, rng::derive_seed(seed, r as u64))?;
        let run_cfg = SolverConfig { rng_seed: rng::derive_seed(cfg.rng_seed, r as u64), ..*cfg };
        let res = solver::negative_curvature_solve(problem, set, &x0, &run_cfg)?;
        if res.status != SolveStatus::SecondOrderCritical {
            continue;
        }
        second_order_endpoints += 1;
        let x = res.final_record.x;
        let known = components.iter().any(|c| (&x - c).norm().min((&x + c).norm()) <= separation);
        if !known {
            components.push(x);
        }
    }
    Ok(ComponentSearch { components, second_order_endpoints, restarts })
}
