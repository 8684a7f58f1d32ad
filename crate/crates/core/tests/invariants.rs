use ncm_core::diagnostics::{taylor_constants, TaylorConstants, LipschitzConstants};
use ncm_core::eigen::{relaxed_direction, smallest_eigenpair};
use ncm_core::geometry::{self, ConstraintSet, OrthogonalitySet, ProductOfSpheresSet, SphereSet};
use ncm_core::{DMatrix, DVector};
use proptest::collection::vec;
use proptest::prelude::*;

fn dvec(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

fn block_norms_ok(y: &DVector<f64>, blocks: &[usize]) -> bool {
    let mut start = 0;
    blocks.iter().all(|&b| {
        let ok = y.rows(start, b).norm() > 1e-3;
        start += b;
        ok
    })
}

fn check_projection(set: &dyn ConstraintSet, y: &DVector<f64>) -> Result<(), TestCaseError> {
    let p = geometry::project(set, y).unwrap();
    prop_assert!(geometry::feasibility_residual(set, &p) <= 1e-10);
    let pp = geometry::project(set, &p).unwrap();
    prop_assert!((&pp - &p).norm() <= 1e-10);

    let v = DVector::from_fn(y.len(), |i, _| y[(i * 7 + 3) % y.len()] - 0.5 * y[i]);
    let t = geometry::tangent_project(set, &p, &v).unwrap();
    let normals = set.jacobian(&p);
    prop_assert!((normals.transpose() * t).amax() <= 1e-10 * (1.0 + v.norm()));
    Ok(())
}

fn symmetric(n: usize, entries: &[f64]) -> DMatrix<f64> {
    let b = DMatrix::from_column_slice(n, n, &entries[..n * n]);
    (&b + b.transpose()) * 0.5
}

fn constants(base: &[f64]) -> LipschitzConstants {
    LipschitzConstants {
        l_f1: base[0],
        l_f2: base[1],
        gamma_f1: base[2],
        gamma_f2: base[3],
        l_c1: vec![base[4], base[5]],
        l_c2: vec![base[6], base[7]],
        gamma_c1: vec![base[8], base[9]],
        gamma_c2: vec![base[10], base[11]],
        sigma0: 1.0,
    }
}

fn values(k: &TaylorConstants) -> [f64; 6] {
    [k.c0, k.c1, k.c2, k.c3, k.c4, k.c5]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sphere_projection_is_feasible_and_idempotent(y in vec(-10.0f64..10.0, 1..12)) {
        let y = dvec(&y);
        prop_assume!(y.norm() > 1e-3);
        check_projection(&SphereSet::new(y.len()).unwrap(), &y)?;
    }

    #[test]
    fn product_projection_is_feasible_and_idempotent(y in vec(-10.0f64..10.0, 12)) {
        let blocks = vec![2, 3, 3, 4];
        let y = dvec(&y);
        prop_assume!(block_norms_ok(&y, &blocks));
        check_projection(&ProductOfSpheresSet::new(blocks).unwrap(), &y)?;
    }

    #[test]
    fn orthogonality_projection_is_feasible_and_idempotent(y in vec(-10.0f64..10.0, 12)) {
        let y = dvec(&y);
        let m = DMatrix::from_column_slice(4, 3, y.as_slice());
        prop_assume!(m.singular_values().min() > 1e-3);
        check_projection(&OrthogonalitySet::new(4, 3).unwrap(), &y)?;
    }

    #[test]
    fn taylor_constants_are_monotone(
        base in vec(0.1f64..5.0, 12),
        which in 0usize..12,
        bump in 0.0f64..3.0,
    ) {
        let before = taylor_constants(&constants(&base)).unwrap();
        let mut raised = base.clone();
        raised[which] += bump;
        let after = taylor_constants(&constants(&raised)).unwrap();
        for (a, b) in values(&before).iter().zip(values(&after)) {
            prop_assert!(b >= a * (1.0 - 1e-12), "input {which}: {a} -> {b}");
        }
    }

    #[test]
    fn eigen_estimate_bounds_the_spectrum(
        n in 2usize..9,
        entries in vec(-3.0f64..3.0, 64),
        seed in any::<u64>(),
    ) {
        let h = symmetric(n, &entries);
        let lmin = h.clone().symmetric_eigen().eigenvalues.min();
        let est = smallest_eigenpair(&h, 1e-8, 200, seed).unwrap();
        prop_assert!((est.vector.norm() - 1.0).abs() <= 1e-12);
        let rq = est.vector.dot(&(&h * &est.vector));
        prop_assert!(est.value >= lmin - 1e-10 * (1.0 + h.norm()));
        if est.converged {
            prop_assert!((rq - est.value).abs() <= 1e-8 * (1.0 + h.norm()));
        }
        let again = smallest_eigenpair(&h, 1e-8, 200, seed).unwrap();
        prop_assert_eq!(est, again);
    }

    #[test]
    fn relaxed_direction_meets_its_contract(
        n in 2usize..9,
        entries in vec(-3.0f64..3.0, 64),
        g in vec(-1.0f64..1.0, 8),
        seed in any::<u64>(),
    ) {
        let h = symmetric(n, &entries);
        let g = dvec(&g[..n]);
        let res = relaxed_direction(&h, &g, 1e-6, 1e-10, 100_000, seed).unwrap();
        prop_assert!(res.relaxed);
        prop_assert!((res.vector.norm() - 1.0).abs() <= 1e-12);
        prop_assert!(res.vector.dot(&g) <= 0.0);
        let lmin = h.clone().symmetric_eigen().eigenvalues.min();
        let q = res.vector.dot(&(&h * &res.vector));
        if lmin < -1e-3 {
            prop_assert!(q <= 0.0);
            prop_assert!(q <= (-1e-6f64).max(lmin) + 1e-6 * (1.0 + h.norm()));
        }
    }
}
