use proptest::prelude::*;
use quatsurf::{Quat, QuatError, Quatf32, Quatf64};

type Q = Quatf64;

/// Independent product: the 4×4 left-multiplication matrix written out from
/// the defining relations, applied to the coefficient vector.
fn matrix_product(a: Q, b: Q) -> Q {
    let m = [
        [a.w, -a.x, -a.y, -a.z],
        [a.x, a.w, -a.z, a.y],
        [a.y, a.z, a.w, -a.x],
        [a.z, -a.y, a.x, a.w],
    ];
    let v = b.to_array();
    let r: Vec<f64> = m.iter().map(|row| row.iter().zip(v).map(|(p, q)| p * q).sum()).collect();
    Q::new(r[0], r[1], r[2], r[3])
}

fn quat() -> impl Strategy<Value = Q> {
    prop::array::uniform4(-10.0f64..10.0).prop_map(Q::from_array)
}

fn unit_quat() -> impl Strategy<Value = Q> {
    quat().prop_filter("nonzero", |q| q.norm() > 1e-3).prop_map(|q| q / q.norm())
}

fn imag() -> impl Strategy<Value = Q> {
    quat().prop_map(|q| q.im())
}

#[test]
fn defining_relations() {
    let (i, j, k, one) = (Q::i(), Q::j(), Q::k(), Q::one());
    assert_eq!(i * j, k);
    assert_eq!(j * k, i);
    assert_eq!(k * i, j);
    for u in [i, j, k] {
        assert_eq!(u * u, -one);
    }
    assert_eq!(i * j * k, -one);
}

#[test]
fn inverse_examples() {
    assert_eq!(Q::i().inverse().unwrap(), -Q::i());
    let a = Q::one() - Q::k();
    assert!(a.inverse().unwrap().approx_eq((Q::one() + Q::k()) * 0.5, 1e-15));
    assert_eq!(Q::zero().inverse(), Err(QuatError::ZeroQuaternion));
    // huge and tiny magnitudes stay representable
    let big = Q::new(1e200, 0.0, 1e200, 0.0);
    assert!((big * big.inverse().unwrap()).approx_eq(Q::one(), 1e-12));
    let tiny = Q::new(0.0, 1e-200, 0.0, 0.0);
    assert!((tiny * tiny.inverse().unwrap()).approx_eq(Q::one(), 1e-12));
}

#[test]
fn rotation_examples() {
    let x = Q::new(1.0, 2.0, 3.0, 4.0);
    let r = Q::rotate(-Q::k(), x).unwrap();
    assert!(r.approx_eq(Q::new(1.0, -2.0, -3.0, 4.0), 1e-15));
    assert_eq!(Q::rotate(Q::one(), x).unwrap(), x);
    assert!(matches!(Q::rotate(Q::new(1.1, 0.0, 0.0, 0.0), x), Err(QuatError::NotUnit(_))));
}

#[test]
fn plane_normal_examples() {
    let span = (Q::one() - Q::k()) * Q::j();
    let (n, r) = Q::plane_normals(span).unwrap();
    let a = Q::one() - Q::k();
    assert!(n.approx_eq(a * (-Q::i()) * a.inverse().unwrap(), 1e-14));
    assert!(n.approx_eq(Q::j(), 1e-14));
    assert_eq!(r, Q::i());
    let (n, r) = Q::plane_normals(Q::one()).unwrap();
    assert_eq!((n, r), (Q::i(), Q::i()));
    assert_eq!(Q::plane_normals(Q::zero()), Err(QuatError::DegeneratePlane));
}

#[test]
fn generic_scalar_works_in_single_precision() {
    let a = Quatf32::new(1.0, 2.0, -0.5, 0.25);
    let b: Quat<f32> = (a * a.inverse().unwrap()).cast();
    assert!(b.approx_eq(Quatf32::one(), 1e-6));
    let c: Quatf64 = a.cast();
    assert!((c.norm_sq() - 5.3125).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn product_matches_matrix_oracle(a in quat(), b in quat()) {
        prop_assert!((a * b).approx_eq(matrix_product(a, b), 1e-12));
        let m = a.left_matrix();
        let v = b.to_array();
        let r: Vec<f64> = m.iter().map(|row| row.iter().zip(v).map(|(p, q)| p * q).sum()).collect();
        prop_assert!((a * b).approx_eq(Q::new(r[0], r[1], r[2], r[3]), 1e-12));
        let m = b.right_matrix();
        let v = a.to_array();
        let r: Vec<f64> = m.iter().map(|row| row.iter().zip(v).map(|(p, q)| p * q).sum()).collect();
        prop_assert!((a * b).approx_eq(Q::new(r[0], r[1], r[2], r[3]), 1e-12));
    }

    #[test]
    fn norm_is_multiplicative(a in quat(), b in quat()) {
        let lhs = (a * b).norm();
        let rhs = a.norm() * b.norm();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn conjugation_reverses_products(a in quat(), b in quat()) {
        prop_assert!((a * b).conj().approx_eq(b.conj() * a.conj(), 1e-12));
        let s = a * a.conj();
        prop_assert!(s.approx_eq(Q::real(a.norm_sq()), 1e-12));
    }

    #[test]
    fn associativity(a in quat(), b in quat(), c in quat()) {
        let s = a.norm() * b.norm() * c.norm();
        prop_assert!(((a * b) * c - a * (b * c)).norm() <= 1e-12 * s.max(1.0));
    }

    #[test]
    fn inverse_identity(a in quat().prop_filter("nonzero", |q| q.norm() > 1e-6)) {
        let inv = a.inverse().unwrap();
        prop_assert!((a * inv).approx_eq(Q::one(), 1e-12));
        prop_assert!((inv * a).approx_eq(Q::one(), 1e-12));
    }

    #[test]
    fn unit_squares_follow_double_angle(theta in -3.0f64..3.0, nu in unit_quat()) {
        let nu = nu.im();
        prop_assume!(nu.norm() > 1e-3);
        let nu = nu / nu.norm();
        let a = Q::real(theta.cos()) + nu * theta.sin();
        let expect = Q::real((2.0 * theta).cos()) + nu * (2.0 * theta).sin();
        prop_assert!((a * a).approx_eq(expect, 1e-12));
    }

    #[test]
    fn rotations_preserve_imaginary_space(alpha in unit_quat(), x in imag()) {
        let r = Q::rotate(alpha, x).unwrap();
        prop_assert!(r.w.abs() <= 1e-12 * x.norm().max(1.0));
        prop_assert!((r.norm() - x.norm()).abs() <= 1e-12 * x.norm().max(1.0));
        // the plane spanned by 1 and alpha is fixed
        prop_assert!(Q::rotate(alpha, alpha).unwrap().approx_eq(alpha, 1e-12));
    }

    #[test]
    fn plane_normals_fix_the_plane(span in quat().prop_filter("nonzero", |q| q.norm() > 1e-3),
                                   hr in -5.0f64..5.0, hi in -5.0f64..5.0) {
        let (n, r) = Q::plane_normals(span).unwrap();
        prop_assert!((n * n).approx_eq(-Q::one(), 1e-12));
        prop_assert!((r * r).approx_eq(-Q::one(), 1e-12));
        let x = span * Q::new(hr, hi, 0.0, 0.0);
        let scale = span.norm().max(1.0);
        prop_assert!((n * x - x * r).norm() <= 1e-12 * scale * scale * (hr.abs() + hi.abs() + 1.0));
        // quarter turn in the orientation of span·C
        prop_assert!((n * span).approx_eq(span * Q::i(), 1e-12));
    }

    #[test]
    fn squares_equal_minus_one_only_for_unit_imaginary(a in quat()) {
        let is_root = (a * a).approx_eq(-Q::one(), 1e-12);
        let unit_imag = a.w.abs() < 1e-7 && (a.norm() - 1.0).abs() < 1e-7;
        prop_assert!(!is_root || unit_imag);
    }
}
