use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use rca_core::subproblems::{leftmost_eig, leftmost_eig_with_limit, solve_cubic, solve_tr};
use rca_core::Error;
use rca_testkit as tk;

fn v(xs: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(xs)
}

fn diag(xs: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&v(xs))
}

#[test]
fn leftmost_of_diagonal_and_identity() {
    let e = leftmost_eig(&diag(&[2.0, -2.0])).unwrap();
    assert_eq!(e.lambda, -2.0);
    assert_eq!(e.v, v(&[0.0, 1.0]));
    assert_eq!(leftmost_eig(&DMatrix::identity(3, 3)).unwrap().lambda, 1.0);
}

#[test]
fn leftmost_matches_bisection_oracle() {
    let mut rng = tk::rng::seeded(21);
    for _ in 0..50 {
        let h = tk::random_symmetric(&mut rng, 5, 1.0);
        let e = leftmost_eig(&h).unwrap();
        assert!((e.lambda - tk::bisection_min_eigenvalue(&h)).abs() < 1e-8);
        assert!((&h * &e.v - &e.v * e.lambda).norm() < 1e-8);
        let first = e.v.iter().find(|c| c.abs() > 1e-12).unwrap();
        assert!(*first > 0.0);
    }
}

#[test]
fn eigen_input_errors() {
    let mut h = DMatrix::identity(2, 2);
    h[(0, 1)] = 1.0;
    assert!(matches!(leftmost_eig(&h), Err(Error::NotSymmetric(_))));
    assert!(matches!(leftmost_eig_with_limit(&DMatrix::identity(4, 4), 3), Err(Error::TooLarge(4, 3))));
}

#[test]
fn tr_interior_and_boundary() {
    let s = solve_tr(&v(&[1.0, 0.0]), &DMatrix::identity(2, 2), 2.0).unwrap();
    assert!((&s.s - v(&[-1.0, 0.0])).norm() < 1e-12);
    assert_eq!(s.multiplier, 0.0);
    let s = solve_tr(&v(&[3.0, 0.0]), &DMatrix::identity(2, 2), 1.0).unwrap();
    assert!((&s.s - v(&[-1.0, 0.0])).norm() < 1e-10);
    assert!((s.multiplier - 2.0).abs() < 1e-10);
}

#[test]
fn tr_hard_case_against_disk_grid() {
    let g = v(&[0.0, 1.0]);
    let h = diag(&[-2.0, 1.0]);
    let s = solve_tr(&g, &h, 1.0).unwrap();
    assert!(s.hard_case);
    assert!((s.multiplier - 2.0).abs() < 1e-10);
    assert!((&s.s - v(&[8f64.sqrt() / 3.0, -1.0 / 3.0])).norm() < 1e-10);
    let value = tk::quadratic_model(&g, &h, &s.s);
    let grid = tk::disk_grid_min(&g, &h, 1.0, 1000, 20_000);
    assert!((value - grid).abs() < 1e-6, "{value} vs {grid}");
    assert!(value <= grid + 1e-12);
}

#[test]
fn tr_rejects_bad_input() {
    let g = v(&[1.0, 0.0]);
    assert!(solve_tr(&g, &DMatrix::identity(2, 2), 0.0).is_err());
    assert!(matches!(
        solve_tr(&g, &DMatrix::identity(3, 3), 1.0),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn cubic_examples() {
    let s = solve_cubic(&v(&[0.0]), &diag(&[-1.0]), 1.0).unwrap();
    assert!((s.s[0] - 1.0).abs() < 1e-12);
    assert!((s.model_decrease - 1.0 / 6.0).abs() < 1e-12);

    let s = solve_cubic(&v(&[1.0]), &diag(&[1.0]), 1.0).unwrap();
    let root = tk::bisect_root(|t| (1.0 + t.abs()) * t + 1.0, -2.0, 0.0);
    assert!((s.s[0] - root).abs() < 1e-8);

    let s = solve_cubic(&v(&[0.0, 0.0]), &diag(&[1.0, 0.0]), 1.0).unwrap();
    assert_eq!(s.s, DVector::zeros(2));
    assert_eq!(s.model_decrease, 0.0);
    assert!(solve_cubic(&v(&[1.0]), &diag(&[1.0]), 0.0).is_err());
}

fn instance() -> impl Strategy<Value = (DVector<f64>, DMatrix<f64>)> {
    (1usize..=5).prop_flat_map(|n| {
        (
            proptest::collection::vec(-3.0f64..3.0, n),
            proptest::collection::vec(-2.0f64..2.0, n * n),
        )
            .prop_map(move |(g, a)| {
                let a = DMatrix::from_vec(n, n, a);
                (DVector::from_vec(g), (&a + a.transpose()) * 0.5)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tr_invariants((g, h) in instance(), delta in 0.05f64..4.0) {
        let s = solve_tr(&g, &h, delta).unwrap();
        prop_assert!(s.s.norm() <= delta * (1.0 + 1e-10));
        prop_assert!(s.multiplier >= 0.0);
        prop_assert!(s.multiplier * (delta - s.s.norm()) <= 1e-8 * (1.0 + delta));
        let md = -tk::quadratic_model(&g, &h, &s.s);
        prop_assert!(s.model_decrease >= -1e-12);
        prop_assert!((md - s.model_decrease).abs() <= 1e-12 * (1.0 + md.abs()));
        prop_assert!(s.kkt_residual <= 1e-8);
    }

    #[test]
    fn tr_scale_consistency((g, h) in instance(), delta in 0.05f64..4.0, c in 0.1f64..10.0) {
        let a = solve_tr(&g, &h, delta).unwrap();
        let b = solve_tr(&(&g * c), &(&h * c), delta).unwrap();
        prop_assert!((b.model_decrease - c * a.model_decrease).abs() <= 1e-7 * (1.0 + c * a.model_decrease));
    }

    #[test]
    fn tr_and_cubic_are_deterministic((g, h) in instance(), r in 0.05f64..4.0) {
        prop_assert_eq!(solve_tr(&g, &h, r).unwrap().s, solve_tr(&g, &h, r).unwrap().s);
        prop_assert_eq!(solve_cubic(&g, &h, r).unwrap().s, solve_cubic(&g, &h, r).unwrap().s);
    }

    #[test]
    fn cubic_invariants((g, h) in instance(), sigma in 0.05f64..4.0) {
        let s = solve_cubic(&g, &h, sigma).unwrap();
        prop_assert!((s.shift - sigma * s.s.norm()).abs() <= 1e-12 * (1.0 + s.shift));
        let res = (&h * &s.s + &s.s * s.shift + &g).norm();
        prop_assert!(res <= 1e-8 * (1.0 + g.norm()));
        prop_assert!(tk::bisection_min_eigenvalue(&h) + s.shift >= -1e-10);
        prop_assert!(s.model_decrease >= 0.0);
    }
}
