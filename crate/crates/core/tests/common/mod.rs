#![allow(dead_code, clippy::neg_cmp_op_on_partial_ord)]

use ncm_core::geometry::{
    self, slack_augment, AffineInequality, ConstraintSet, Inequality, OrthogonalitySet, SphereSet,
};
use ncm_core::lagrangian::{feasible_difference, multipliers, Objective};
use ncm_core::problems::{
    maxcut_bm, rayleigh_problem, sotd_joint, sotd_single, synthesize_sotd, MaxCutInstance, Polynomial,
};
use ncm_core::solver::{Branch, SolveResult, SolveStatus, SolverConfig};
use ncm_core::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// `(B + B^T) / sqrt(2 n)` for Gaussian `B`.
pub fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
    let b = gaussian_matrix(n, n, seed);
    (&b + b.transpose()) / (2.0 * n as f64).sqrt()
}

/// Random graph with each edge present with probability 1/2 and weight in
/// `[0.5, 1.5)`.
pub fn random_graph(n: usize, seed: u64) -> Vec<(usize, usize, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < 0.5 {
                edges.push((i, j, 0.5 + rng.random::<f64>()));
            }
        }
    }
    edges
}

pub fn cycle(n: usize) -> Vec<(usize, usize, f64)> {
    (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect()
}

/// Exhaustive max-cut over all `2^(n-1)` labelings with vertex 0 fixed.
pub fn brute_force_max_cut(n: usize, edges: &[(usize, usize, f64)]) -> f64 {
    let mut best = 0.0f64;
    for mask in 0u32..(1 << (n - 1)) {
        let side = |v: usize| v > 0 && (mask >> (v - 1)) & 1 == 1;
        let cut: f64 = edges.iter().filter(|(u, v, _)| side(*u) != side(*v)).map(|e| e.2).sum();
        best = best.max(cut);
    }
    best
}

/// `f(X) = tr(X^T A X N)` with `N = diag(1, .., k)` on `r x k` matrices with
/// orthonormal columns (column-major).
pub struct Brockett {
    pub a: DMatrix<f64>,
    pub k: usize,
}

impl Brockett {
    fn weight(&self, col: usize) -> f64 {
        (col + 1) as f64
    }
}

impl Objective for Brockett {
    fn dim(&self) -> usize {
        self.a.nrows() * self.k
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        let r = self.a.nrows();
        (0..self.k)
            .map(|j| {
                let c = x.rows(j * r, r);
                self.weight(j) * c.dot(&(&self.a * c))
            })
            .sum()
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let r = self.a.nrows();
        let mut g = DVector::zeros(r * self.k);
        for j in 0..self.k {
            let c = x.rows(j * r, r);
            g.rows_mut(j * r, r).copy_from(&(&self.a * c * (2.0 * self.weight(j))));
        }
        g
    }
    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        let r = self.a.nrows();
        let mut h = DMatrix::zeros(r * self.k, r * self.k);
        for j in 0..self.k {
            h.view_mut((j * r, j * r), (r, r)).copy_from(&(&self.a * (2.0 * self.weight(j))));
        }
        h
    }
}

/// `f(x, z) = x^T A x / 2` over the unit sphere in `R^3` intersected with
/// the slab `|x_0| <= 1/2`, written with squared slacks.
pub struct SlabRayleigh {
    pub a: DMatrix<f64>,
}

impl Objective for SlabRayleigh {
    fn dim(&self) -> usize {
        5
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        let p = x.rows(0, 3);
        0.5 * p.dot(&(&self.a * p))
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(5);
        g.rows_mut(0, 3).copy_from(&(&self.a * x.rows(0, 3)));
        g
    }
    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(5, 5);
        h.view_mut((0, 0), (3, 3)).copy_from(&self.a);
        h
    }
}

pub fn slab_set() -> Box<dyn ConstraintSet> {
    let e0 = DVector::from_column_slice(&[1.0, 0.0, 0.0]);
    let upper = AffineInequality { normal: e0.clone(), offset: 0.5 };
    let lower = AffineInequality { normal: -e0, offset: 0.5 };
    let ineqs: Vec<Box<dyn Inequality>> = vec![Box::new(upper), Box::new(lower)];
    Box::new(slack_augment(SphereSet::new(3).unwrap(), ineqs).unwrap())
}

/// Feasible `(x, z)` for the slab with `x` the normalized `p`.
pub fn slab_point(p: [f64; 3]) -> DVector<f64> {
    let x = DVector::from_column_slice(&p).normalize();
    assert!(x[0].abs() < 0.5);
    DVector::from_column_slice(&[x[0], x[1], x[2], (0.5 - x[0]).sqrt(), (0.5 + x[0]).sqrt()])
}

pub struct Case {
    pub name: &'static str,
    pub obj: Box<dyn Objective>,
    pub set: Box<dyn ConstraintSet>,
    pub starts: Vec<DVector<f64>>,
}

fn random_starts(set: &dyn ConstraintSet, count: usize, seed: u64) -> Vec<DVector<f64>> {
    (0..count).map(|i| geometry::random_point(set, seed * 1000 + i as u64).unwrap()).collect()
}

/// Problems exercised by the mechanics checks.
pub fn corpus() -> Vec<Case> {
    let mut cases = Vec::new();

    let (obj, set) = rayleigh_problem(DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, 2.0]))).unwrap();
    cases.push(Case {
        name: "rayleigh-diag12",
        starts: vec![DVector::from_column_slice(&[0.0, 1.0]), DVector::from_column_slice(&[0.6, 0.8])],
        obj: Box::new(obj),
        set: Box::new(set),
    });

    let a = random_symmetric(10, 7);
    let eig = a.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..10).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let saddle = eig.eigenvectors.column(order[1]).into_owned();
    let (obj, set) = rayleigh_problem(a).unwrap();
    let mut starts = random_starts(&set, 4, 1);
    starts.push(saddle);
    cases.push(Case { name: "rayleigh-10", starts, obj: Box::new(obj), set: Box::new(set) });

    let (t, _) = synthesize_sotd(6, 3).unwrap();
    let (obj, set) = sotd_single(t).unwrap();
    cases.push(Case { name: "sotd-single-6", starts: random_starts(&set, 4, 2), obj: Box::new(obj), set: Box::new(set) });

    let (t, _) = synthesize_sotd(4, 4).unwrap();
    let (obj, set) = sotd_joint(t).unwrap();
    cases.push(Case { name: "sotd-joint-4", starts: random_starts(&set, 3, 3), obj: Box::new(obj), set: Box::new(set) });

    let (obj, set) = maxcut_bm(MaxCutInstance::from_edges(4, &cycle(4), Some(3)).unwrap()).unwrap();
    cases.push(Case { name: "maxcut-c4", starts: random_starts(&set, 3, 4), obj: Box::new(obj), set: Box::new(set) });

    let (obj, set) = maxcut_bm(MaxCutInstance::from_edges(7, &random_graph(7, 11), None).unwrap()).unwrap();
    cases.push(Case { name: "maxcut-random-7", starts: random_starts(&set, 3, 5), obj: Box::new(obj), set: Box::new(set) });

    let set = OrthogonalitySet::new(5, 2).unwrap();
    let starts = random_starts(&set, 3, 6);
    cases.push(Case {
        name: "brockett-5x2",
        obj: Box::new(Brockett { a: random_symmetric(5, 8), k: 2 }),
        set: Box::new(set),
        starts,
    });

    cases.push(Case {
        name: "slab-rayleigh",
        obj: Box::new(SlabRayleigh { a: DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, 2.0, 3.0])) }),
        set: slab_set(),
        starts: vec![slab_point([0.1, 0.3, 0.9]), slab_point([-0.2, 0.8, -0.5]), slab_point([0.0, 0.0, 1.0])],
    });

    let sphere = SphereSet::new(4).unwrap();
    cases.push(Case {
        name: "polynomial-4",
        starts: random_starts(&sphere, 3, 7),
        obj: Box::new(Polynomial::random(4, 4, 21).unwrap()),
        set: Box::new(sphere),
    });

    let sphere = SphereSet::new(3).unwrap();
    cases.push(Case {
        name: "constant",
        starts: random_starts(&sphere, 2, 8),
        obj: Box::new(Polynomial::linear(DVector::zeros(3))),
        set: Box::new(sphere),
    });

    cases
}

/// Mechanics of one solve: returns a description of every violated
/// property (empty when all hold).
pub fn verify_trace(
    obj: &dyn Objective,
    set: &dyn ConstraintSet,
    res: &SolveResult,
    cfg: &SolverConfig,
) -> Vec<String> {
    let mut bad = Vec::new();
    let trace = &res.trace;
    if trace.last() != Some(&res.final_record) {
        bad.push("last trace record differs from final record".to_string());
    }
    if res.status == SolveStatus::SecondOrderCritical && !res.certificate.is_second_order {
        bad.push("second-order status without second-order certificate".to_string());
    }
    for (i, rec) in trace.iter().enumerate() {
        if rec.k != i {
            bad.push(format!("record {i} has k = {}", rec.k));
        }
        let feas = geometry::feasibility_residual(set, &rec.x);
        if feas > 1e-10 || rec.feas_residual > 1e-10 {
            bad.push(format!("k={i}: infeasible iterate, residual {feas:e}"));
        }
        if rec.backtracks > 60 {
            bad.push(format!("k={i}: {} backtracks", rec.backtracks));
        }
        let expected_t = cfg.t0 * cfg.rho.powi(rec.backtracks as i32);
        if (rec.t_k - expected_t).abs() > 1e-15 * expected_t {
            bad.push(format!("k={i}: t_k = {} but t0 rho^b = {expected_t}", rec.t_k));
        }
        let is_last = i + 1 == trace.len();
        if is_last != (rec.branch == Branch::Terminal) {
            bad.push(format!("k={i}: terminal branch misplaced"));
        }
        if is_last {
            continue;
        }
        let next = &trace[i + 1];
        let lambda = multipliers(obj, set, &rec.x).unwrap();
        let change = feasible_difference(obj, set, &lambda, &rec.x, &next.x);
        let g2 = rec.grad_norm * rec.grad_norm;
        let rhs = match rec.branch {
            Branch::Gradient => {
                if rec.grad_norm < cfg.eps {
                    bad.push(format!("k={i}: gradient branch with |G| below eps"));
                }
                -cfg.sigma * rec.t_k * g2
            }
            Branch::Curvilinear => {
                if rec.grad_norm >= cfg.eps || rec.lambda_k >= -cfg.delta {
                    bad.push(format!("k={i}: curvilinear branch without its trigger"));
                }
                cfg.sigma * (-rec.t_k * g2 - 0.5 * rec.t_k.powf(2.0 * cfg.alpha) * rec.lambda_k.abs().powi(3))
            }
            Branch::Terminal => unreachable!(),
        };
        if !(change <= rhs) {
            bad.push(format!("k={i}: decrease {change:e} exceeds bound {rhs:e}"));
        }
        if !(change < 0.0) {
            bad.push(format!("k={i}: objective did not decrease ({change:e})"));
        }
    }
    bad
}
