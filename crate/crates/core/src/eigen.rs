//! Smallest eigenpair of a symmetric operator by two-phase shifted power
//! iteration.
//!
//! Phase one finds the dominant (largest magnitude) eigenpair. If its value
//! is negative it is already the algebraically smallest one. Otherwise the
//! iteration is rerun on `H - s I` with `s` the dominant magnitude, whose
//! dominant eigenvalue is `lambda_min - s`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::rng;

/// Anything that can multiply a vector by a symmetric matrix.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    fn apply(&self, v: &DVector<f64>) -> DVector<f64>;
}

impl SymmetricOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self * v
    }
}

impl<T: SymmetricOperator + ?Sized> SymmetricOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        (**self).apply(v)
    }
}

/// Estimated smallest eigenpair.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub value: f64,
    /// Unit-norm eigenvector estimate.
    pub vector: DVector<f64>,
    /// Total power iterations over both phases.
    pub iterations: usize,
    pub converged: bool,
    /// Set by [`relaxed_direction`]: the pair is only guaranteed to meet the
    /// relaxed negative-curvature contract.
    pub relaxed: bool,
}

/// Tolerance and iteration budget for the power iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Convergence threshold on successive Rayleigh quotients, relative to the
    /// operator scale.
    pub tol: f64,
    /// Iteration budget per phase.
    pub max_iter: usize,
    pub seed: u64,
}

impl EigenOptions {
    /// `tol = 1e-8`, `max_iter = 50 ln(n + 10)`.
    pub fn default_for(n: usize, seed: u64) -> Self {
        Self { tol: 1e-8, max_iter: default_max_iter(n), seed }
    }
}

pub fn default_max_iter(n: usize) -> usize {
    libm::ceil(50.0 * libm::log(n as f64 + 10.0)) as usize
}

struct Phase {
    value: f64,
    vector: DVector<f64>,
    /// `||H v||` at the returned vector.
    image_norm: f64,
    residual: f64,
    iterations: usize,
    converged: bool,
}

/// Power iteration on `H - shift I` starting from the unit vector `v`.
/// Convergence is declared when successive Rayleigh quotients of `H` differ
/// by at most `tol * scale`.
fn power_phase<H: SymmetricOperator + ?Sized>(
    op: &H,
    shift: f64,
    mut v: DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Phase {
    let mut hv = op.apply(&v);
    let mut value = v.dot(&hv);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        let w = &hv - &v * shift;
        let wn = w.norm();
        if wn == 0.0 {
            // v spans an eigenvector of H with eigenvalue exactly `shift`
            converged = true;
            break;
        }
        v = w / wn;
        hv = op.apply(&v);
        let next = v.dot(&hv);
        iterations += 1;
        let scale = shift.abs() + hv.norm();
        let done = (next - value).abs() <= tol * scale.max(f64::MIN_POSITIVE);
        value = next;
        if done {
            converged = true;
            break;
        }
    }
    let image_norm = hv.norm();
    let residual = (&hv - &v * value).norm();
    Phase { value, vector: v, image_norm, residual, iterations, converged }
}

/// Algebraically smallest eigenpair of the symmetric operator `h`.
///
/// A zero operator returns value `0` with the normalized start vector.
/// Exhausting `max_iter` returns the best estimate with `converged = false`.
pub fn smallest_eigenpair<H: SymmetricOperator + ?Sized>(
    h: &H,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<EigenResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig("eigen tolerance must be positive"));
    }
    let n = h.dim();
    if n == 0 {
        return Err(Error::InvalidConfig("operator dimension must be positive"));
    }
    let mut rng = rng::seeded(seed);
    let mut start = rng::gaussian_vector(&mut rng, n);
    let norm = start.norm();
    start /= norm;

    if h.apply(&start).norm() == 0.0 {
        return Ok(EigenResult { value: 0.0, vector: start, iterations: 0, converged: true, relaxed: false });
    }

    let first = power_phase(h, 0.0, start.clone(), tol, max_iter);
    // A negative dominant value is the smallest eigenvalue, unless the
    // vector is still a mixture of a +/- pair of equal magnitude.
    let resolved = first.residual <= libm::sqrt(tol) * first.image_norm.max(f64::MIN_POSITIVE);
    if first.value < 0.0 && first.converged && resolved {
        return Ok(EigenResult {
            value: first.value,
            vector: first.vector,
            iterations: first.iterations,
            converged: true,
            relaxed: false,
        });
    }

    // ||H v|| bounds the dominant magnitude from below and equals it at
    // convergence; every eigenvalue of H - s I is then (nearly) non-positive.
    let shift = first.image_norm.max(first.value);
    let second = power_phase(h, shift, start, tol, max_iter);
    let mut result = EigenResult {
        value: second.value,
        vector: second.vector,
        iterations: first.iterations + second.iterations,
        converged: second.converged,
        relaxed: false,
    };
    if !result.converged && first.value < second.value {
        result.value = first.value;
        result.vector = first.vector;
    }
    Ok(result)
}

/// A unit direction `v` with `v^T H v <= max(-delta, lambda_min)`,
/// `v^T g <= 0` and `v^T H v <= 0` whenever `H` has negative curvature.
///
/// Computed from the smallest eigenpair, with the sign chosen against `g`
/// (`v^T g = 0` keeps the positive orientation).
pub fn relaxed_direction<H: SymmetricOperator + ?Sized>(
    h: &H,
    g: &DVector<f64>,
    delta: f64,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<EigenResult> {
    if !(delta > 0.0) {
        return Err(Error::InvalidConfig("relaxation threshold delta must be positive"));
    }
    if g.len() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), actual: g.len() });
    }
    let mut result = smallest_eigenpair(h, tol, max_iter, seed)?;
    if result.vector.dot(g) > 0.0 {
        result.vector = -result.vector;
    }
    result.relaxed = true;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(d))
    }

    #[test]
    fn negative_dominant_is_returned_directly() {
        let r = smallest_eigenpair(&diag(&[0.0, 1.0, -2.0]), 1e-12, 1000, 1).unwrap();
        assert!((r.value + 2.0).abs() < 1e-10);
        assert!(r.vector[2].abs() > 1.0 - 1e-8);
        assert!(r.converged);
    }

    #[test]
    fn shifted_phase_finds_zero_eigenvalue() {
        let r = smallest_eigenpair(&diag(&[3.0, 1.0, 0.0]), 1e-12, 2000, 3).unwrap();
        assert!(r.value.abs() < 1e-10, "value {}", r.value);
        assert!(r.vector[2].abs() > 1.0 - 1e-6);
    }

    #[test]
    fn zero_operator() {
        let r = smallest_eigenpair(&DMatrix::<f64>::zeros(2, 2), 1e-8, 10, 0).unwrap();
        assert_eq!(r.value, 0.0);
        assert!((r.vector.norm() - 1.0).abs() < 1e-12);
        assert!(r.converged);
    }

    #[test]
    fn symmetric_pair_of_equal_magnitude() {
        // +2 and -2 dominate together; phase one cannot separate them
        let r = smallest_eigenpair(&diag(&[2.0, -2.0, 0.5]), 1e-12, 5000, 9).unwrap();
        assert!((r.value + 2.0).abs() < 1e-8, "value {}", r.value);
    }

    #[test]
    fn same_seed_same_path() {
        let h = DMatrix::from_fn(6, 6, |i, j| ((i * 7 + j * 7) % 5) as f64 - 2.0);
        let a = smallest_eigenpair(&h, 1e-10, 500, 42).unwrap();
        let b = smallest_eigenpair(&h, 1e-10, 500, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn relaxed_direction_examples() {
        let h = diag(&[-1.0, 0.0]);
        let g = DVector::from_column_slice(&[0.0, 0.5]);
        let r = relaxed_direction(&h, &g, 1e-6, 1e-12, 100, 5).unwrap();
        assert!((r.value + 1.0).abs() < 1e-12);
        assert!(r.vector[0].abs() > 1.0 - 1e-12);
        assert!(r.vector.dot(&g) <= 0.0);
        assert!(r.relaxed);

        let h = diag(&[-2.0, -1.0]);
        let g = DVector::from_column_slice(&[1.0, 0.0]);
        let r = relaxed_direction(&h, &g, 1e-6, 1e-14, 1000, 5).unwrap();
        assert!((r.value + 2.0).abs() < 1e-10);
        assert!((r.vector[0] + 1.0).abs() < 1e-6);
    }

    #[test]
    fn relaxed_direction_on_psd_operator_is_nonnegative() {
        let h = diag(&[1.0, 2.0]);
        let g = DVector::from_column_slice(&[1.0, 1.0]);
        let r = relaxed_direction(&h, &g, 1e-6, 1e-12, 1000, 5).unwrap();
        assert!(r.value >= 0.0);
        assert_eq!(r.value.min(0.0), 0.0);
    }

    #[test]
    fn invalid_inputs() {
        let h = diag(&[1.0]);
        assert!(smallest_eigenpair(&h, 0.0, 10, 0).is_err());
        assert!(relaxed_direction(&h, &DVector::zeros(1), 0.0, 1e-8, 10, 0).is_err());
    }
}
