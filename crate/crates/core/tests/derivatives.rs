mod common;

use common::{cycle, gaussian_matrix, random_graph, random_symmetric, slab_set, Brockett, SlabRayleigh};
use ncm_core::diagnostics::{check_constraint_derivatives, check_objective_derivatives};
use ncm_core::geometry::{
    self, ConstraintSet, EuclideanSpace, OrthogonalitySet, ProductOfSpheresSet, SphereSet,
};
use ncm_core::lagrangian::{generalized_gradient, generalized_hessian, Objective};
use ncm_core::problems::{
    maxcut_bm, rayleigh_problem, sotd_joint, sotd_single, synthesize_sotd, MaxCutInstance, Polynomial,
    SymmetricTensor4,
};
use ncm_core::{DMatrix, DVector};

const H: f64 = 1e-6;

fn sets() -> Vec<(&'static str, Box<dyn ConstraintSet>)> {
    vec![
        ("euclidean-3", Box::new(EuclideanSpace::new(3).unwrap())),
        ("sphere-5", Box::new(SphereSet::new(5).unwrap())),
        ("spheres-3x3", Box::new(ProductOfSpheresSet::new(vec![3, 2, 4]).unwrap())),
        ("orthogonality-4x2", Box::new(OrthogonalitySet::new(4, 2).unwrap())),
        ("orthogonality-3x3", Box::new(OrthogonalitySet::new(3, 3).unwrap())),
        ("slab", slab_set()),
    ]
}

#[test]
fn constraint_derivatives_match_finite_differences() {
    for (name, set) in sets() {
        let mut worst_jac = 0.0f64;
        let mut worst_hess = 0.0f64;
        for i in 0..100 {
            let x = geometry::random_point(&*set, 500 + i).unwrap();
            let rep = check_constraint_derivatives(&*set, &x, H).unwrap();
            worst_jac = worst_jac.max(rep.gradient_error);
            worst_hess = worst_hess.max(rep.hessian_error);
        }
        assert!(worst_jac <= 1e-5, "{name}: jacobian error {worst_jac:e}");
        assert!(worst_hess <= 1e-4, "{name}: hessian error {worst_hess:e}");
    }
}

type Problem = (&'static str, Box<dyn Objective>, Box<dyn ConstraintSet>);

fn problems() -> Vec<Problem> {
    let mut out: Vec<Problem> = Vec::new();
    let (o, s) = rayleigh_problem(random_symmetric(6, 1)).unwrap();
    out.push(("rayleigh", Box::new(o), Box::new(s)));
    let (t, _) = synthesize_sotd(5, 2).unwrap();
    let (o, s) = sotd_single(t.clone()).unwrap();
    out.push(("sotd-single", Box::new(o), Box::new(s)));
    let (o, s) = sotd_joint(t).unwrap();
    out.push(("sotd-joint", Box::new(o), Box::new(s)));
    let (o, s) = maxcut_bm(MaxCutInstance::from_edges(5, &cycle(5), None).unwrap()).unwrap();
    out.push(("maxcut-c5", Box::new(o), Box::new(s)));
    let (o, s) = maxcut_bm(MaxCutInstance::from_edges(6, &random_graph(6, 3), Some(2)).unwrap()).unwrap();
    out.push(("maxcut-random", Box::new(o), Box::new(s)));
    let sphere = SphereSet::new(4).unwrap();
    out.push(("polynomial", Box::new(Polynomial::random(4, 4, 9).unwrap()), Box::new(sphere)));
    out.push((
        "brockett",
        Box::new(Brockett { a: random_symmetric(4, 5), k: 2 }),
        Box::new(OrthogonalitySet::new(4, 2).unwrap()),
    ));
    out.push((
        "slab-rayleigh",
        Box::new(SlabRayleigh { a: DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, 2.0, 3.0])) }),
        slab_set(),
    ));
    out
}

#[test]
fn objective_derivatives_match_finite_differences() {
    for (name, obj, set) in problems() {
        for i in 0..20 {
            let x = geometry::random_point(&*set, 900 + i).unwrap();
            let rep = check_objective_derivatives(&*obj, &x, H).unwrap();
            assert!(rep.gradient_error <= 1e-5, "{name}: gradient error {:e}", rep.gradient_error);
            assert!(rep.hessian_error <= 1e-4, "{name}: hessian error {:e}", rep.hessian_error);
        }
    }
}

#[test]
fn generalized_derivatives_are_tangent_and_consistent() {
    for (name, obj, set) in problems() {
        for i in 0..10 {
            let x = geometry::random_point(&*set, 1300 + i).unwrap();
            let n = set.jacobian(&x);
            let g = generalized_gradient(&*obj, &*set, &x).unwrap();
            let h = generalized_hessian(&*obj, &*set, &x).unwrap();

            assert!((n.transpose() * &g).amax() <= 1e-9, "{name}: G not tangent");
            let routed = geometry::tangent_project(&*set, &x, &obj.gradient(&x)).unwrap();
            assert!((&g - routed).amax() <= 1e-10, "{name}: gradient routes disagree");

            assert!((&h - h.transpose()).amax() == 0.0, "{name}: H not symmetric");
            let scale = 1.0 + h.norm();
            for col in n.column_iter() {
                assert!((&h * col).norm() <= 1e-9 * scale, "{name}: H does not annihilate normals");
            }
        }
    }
}

#[test]
fn factored_and_dense_tensor_contractions_agree() {
    let (factored, _) = synthesize_sotd(7, 17).unwrap();
    let n = factored.dim();
    let dense_data: Vec<f64> = (0..n * n * n * n)
        .map(|idx| {
            let (i, j, k, l) = (idx / (n * n * n), (idx / (n * n)) % n, (idx / n) % n, idx % n);
            factored.get(i, j, k, l)
        })
        .collect();
    let dense = SymmetricTensor4::from_dense(n, dense_data).unwrap();
    assert!(dense.factors().is_none());

    let dirs = gaussian_matrix(n, 40, 23);
    for s in 0..20 {
        let x = dirs.column(s).normalize();
        let u = dirs.column(20 + s).normalize();
        assert!((factored.full_contraction(&x) - factored.dense_full_contraction(&x)).abs() <= 1e-10);
        assert!((factored.full_contraction(&x) - dense.full_contraction(&x)).abs() <= 1e-10);
        assert!((factored.vector_contraction(&x) - dense.vector_contraction(&x)).amax() <= 1e-10);
        let m = factored.matrix_contraction(&u, &x);
        assert!((&m - factored.dense_matrix_contraction(&u, &x)).amax() <= 1e-10);
        assert!((&m - dense.matrix_contraction(&u, &x)).amax() <= 1e-10);
    }
}
