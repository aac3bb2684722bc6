use std::f64::consts::{E, PI};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use quatsurf::dirac_p1::*;
use quatsurf::field::ChartGrid;
use quatsurf::Q;

/// `K₀(x)` from its power series around 0.
fn bessel_k0(x: f64) -> f64 {
    const EULER: f64 = 0.577_215_664_901_532_9;
    let q = x * x / 4.0;
    let (mut term, mut harmonic, mut i0, mut tail) = (1.0, 0.0, 1.0, 0.0);
    for k in 1..60 {
        term *= q / (k * k) as f64;
        harmonic += 1.0 / k as f64;
        i0 += term;
        tail += term * harmonic;
    }
    -((x / 2.0).ln() + EULER) * i0 + tail
}

/// `F_λ(r)` after `s = r·sec θ`, by composite Simpson on `[0, π/2]`.
fn flambda_oracle(lambda: f64, r: f64) -> f64 {
    let n = 200_000;
    let hh = PI / 2.0 / n as f64;
    let c = (1.0 + r * r).sqrt();
    let g = |t: f64| {
        let s = r / t.cos();
        let y = PI - 2.0 * s.atan();
        let ratio = if lambda == 0.0 { y / PI } else { (lambda * y).sinh() / (lambda * PI).sinh() };
        ratio * c * t.cos() / (t.cos().powi(2) + r * r)
    };
    let mut acc = g(0.0) + g(PI / 2.0);
    for k in 1..n {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * g(k as f64 * hh);
    }
    2.0 / PI * acc * hh / 3.0
}

#[test]
fn flambda_matches_secant_substitution() {
    for &lambda in &[0.0, 0.3, 1.0, 4.0] {
        for &r in &[0.05, 0.5, 1.0, 3.0] {
            let (a, b) = (flambda(lambda, r), flambda_oracle(lambda, r));
            assert!((a - b).abs() < 1e-8 * b.max(1e-3), "λ={lambda} r={r}: {a} vs {b}");
        }
    }
}

#[test]
fn flambda_edge_values() {
    assert_eq!(flambda(1.0, 0.0), f64::INFINITY);
    assert!(flambda(1.0, -1.0).is_nan());
    assert!(flambda(1.0, f64::NAN).is_nan());
    // λ and −λ give the same kernel
    assert_eq!(flambda(2.0, 0.7), flambda(-2.0, 0.7));
    // the small-λ series joins the exponential form
    let r = 0.8;
    let below = flambda(0.99e-4 / PI, r);
    let above = flambda(1.01e-4 / PI, r);
    assert!((below - above).abs() < 1e-10, "{below} {above}");
    assert!((flambda(1e-9, r) - flambda_oracle(0.0, r)).abs() < 1e-8);
}

#[test]
fn exact_derivative_matches_finite_differences() {
    for &lambda in &[0.2, 1.0, 5.0, 20.0] {
        for &r in &[0.1, 0.6, 2.0, 8.0] {
            let (a, b) = (flambda_prime(lambda, r), flambda_prime_fd(lambda, r));
            assert!((a - b).abs() < 1e-6 * a.abs().max(1e-8), "λ={lambda} r={r}: {a} vs {b}");
        }
    }
}

#[test]
fn finfty_is_a_bessel_function() {
    for &r in &[0.1, 0.5, 1.0, 2.0, 4.0] {
        let exact = 2.0 / PI * bessel_k0(2.0 * r);
        let f = finfty_forms(r);
        assert!((f.radial - exact).abs() < 1e-6 * exact, "r={r}: {} vs {exact}", f.radial);
        assert!(f.rel_diff() < 1e-8, "r={r}: {f:?}");
    }
}

#[test]
fn finfty_asymptotics() {
    // F_∞(r)·e^{2r}·√r stays bounded and tends to 1/√π
    let mut prev = f64::INFINITY;
    for k in 0..8 {
        let r = 0.5 * 2f64.powi(k);
        let v = finfty(r) * (2.0 * r).exp() * r.sqrt();
        assert!(v < 1.0 && v > 0.0);
        let gap = (v - 1.0 / PI.sqrt()).abs();
        assert!(gap < prev);
        prev = gap;
    }
    assert!(prev < 2e-3);
}

#[test]
fn blowup_converges_to_finfty() {
    for &r in &[0.25, 1.0, 2.0] {
        let rep = blowup_limit(r);
        assert!(rep.error < 1e-3, "{rep:?}");
        // plain values approach the limit monotonically too
        let gaps: Vec<f64> = rep.values.iter().map(|v| (v - rep.limit).abs()).collect();
        assert!(gaps[2] < gaps[1] && gaps[1] < gaps[0], "{gaps:?}");
    }
}

#[test]
fn estimates_hold_on_the_lattice() {
    let (ls, rs) = default_lattice();
    assert_eq!((ls.len(), rs.len()), (40, 40));
    let rows = bound_suite(&ls, &rs);
    assert_eq!(rows.len(), 1600);
    for row in &rows {
        assert!(row.holds(), "{row:?}");
        // the proof gives b(λ, 2 arctan r), which is smaller
        assert!(row.slope <= 2.0 / PI * b_bound(row.lambda, 2.0 * row.r.atan()) * (1.0 + 1e-9), "{row:?}");
    }
    let tightest = rows.iter().map(|r| r.margin()).fold(f64::INFINITY, f64::min);
    assert!(tightest < 0.5);
}

#[test]
fn bound_ii_formula() {
    let r = BoundRow::new(3.0, 0.4);
    assert!((r.bound_ii - 1.0 / (2.0 * E * 1.2)).abs() < 1e-15);
    assert!((r.margin_ii - (1.0 - r.f / r.bound_ii)).abs() < 1e-12);
}

#[test]
fn b_is_between_zero_and_one() {
    for &l in &[1e-6, 0.1, 1.0, 10.0, 100.0] {
        for k in 1..20 {
            let y = PI * k as f64 / 20.0;
            let b = b_bound(l, y);
            let direct = if l < 50.0 {
                (l * y * (l * (PI - y)).cosh() + (l * (PI - y)).sinh()) / (l * PI).sinh()
            } else {
                b
            };
            assert!(b > 0.0 && b <= 1.0, "λ={l} y={y}: {b}");
            assert!((b - direct).abs() < 1e-9, "λ={l} y={y}: {b} vs {direct}");
        }
    }
}

#[test]
fn b_decays_faster_than_exponential_half() {
    let d = b_decay(0.5, &[5.0, 20.0, 80.0]);
    assert!(d[0] / d[1] >= 10.0 && d[1] / d[2] >= 10.0, "{d:?}");
}

#[test]
fn kernel_basics() {
    let w = C64::new(0.3, -0.4);
    let k = kernel_k(2.0, C64::new(0.0, 0.0), w).unwrap();
    assert!((k - Q::real(flambda(2.0, 0.5))).norm() < 1e-15);
    assert!(kernel_k(1.0, C64::new(1.0, 0.0), C64::new(-1.0, 0.0)).is_err());
    assert!(matches!(
        kernel_k(1.0, C64::new(0.0, 2.0), C64::new(0.0, -0.5)),
        Err(DiracError::AntipodalPair { .. })
    ));
    assert_eq!(kernel_k(1.0, w, w).unwrap().w, f64::INFINITY);
    // values are complex
    let k = kernel_k(1.0, C64::new(0.5, 0.1), C64::new(-0.2, 0.7)).unwrap();
    assert_eq!((k.y, k.z), (0.0, 0.0));
    assert!(k.w > 0.0 || k.x != 0.0);
}

fn unit(a: f64, b: f64, c: f64, d: f64) -> Q {
    let q = Q::new(a, b, c, d);
    q * (1.0 / q.norm())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_length_is_invariant(
        a in -1.0..1.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64, d in 0.2..1.0f64,
        zr in -2.0..2.0f64, zi in -2.0..2.0f64, wr in -2.0..2.0f64, wi in -2.0..2.0f64,
        lambda in 0.1..10.0f64,
    ) {
        let alpha = unit(d, a, b, c);
        let (z, w) = (C64::new(zr, zi), C64::new(wr, wi));
        prop_assume!((z - w).norm() > 1e-2);
        prop_assume!((C64::new(1.0, 0.0) + z * w.conj()).norm() > 1e-2);
        let (Some(z1), Some(w1)) = (su2_point(alpha, z), su2_point(alpha, w)) else { return Ok(()) };
        prop_assume!(z1.norm() < 1e3 && w1.norm() < 1e3);
        let l0 = kernel_length(lambda, z, w).unwrap();
        let l1 = kernel_length(lambda, z1, w1).unwrap();
        prop_assert!((l0 - l1).abs() < 1e-8 * l0.max(1e-12), "{} vs {}", l0, l1);
    }

    #[test]
    fn su2_point_is_an_isometry_of_the_chordal_metric(
        a in -1.0..1.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64, d in 0.2..1.0f64,
        zr in -2.0..2.0f64, zi in -2.0..2.0f64, wr in -2.0..2.0f64, wi in -2.0..2.0f64,
    ) {
        let alpha = unit(d, a, b, c);
        let (z, w) = (C64::new(zr, zi), C64::new(wr, wi));
        let chord = |z: C64, w: C64| (z - w).norm() / ((1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr())).sqrt();
        let (Some(z1), Some(w1)) = (su2_point(alpha, z), su2_point(alpha, w)) else { return Ok(()) };
        prop_assert!((chord(z, w) - chord(z1, w1)).abs() < 1e-12);
    }
}

#[test]
fn su2_action_identity_and_norms() {
    let grid = Arc::new(ChartGrid::p1_chart(1.5, 0.01));
    let xi = bump(&grid, C64::new(0.1, 0.0), 0.25, Q::new(1.0, 0.5, -0.2, 0.3));
    let same = su2_act(Q::real(1.0), &xi).unwrap();
    for i in xi.values.included() {
        assert!((same.values.values[i] - xi.values.values[i]).norm() < 1e-12);
    }
    assert!(matches!(su2_act(Q::real(2.0), &xi), Err(DiracError::NotUnit(_))));
    let before: Vec<f64> = [1.0, 2.0, 4.0].iter().map(|&p| xi.lp_norm(p)).collect();
    for alpha in [unit(1.0, 0.7, 0.0, 0.0), unit(1.0, 0.0, 0.2, 0.0), unit(1.0, 0.3, -0.1, 0.15)] {
        let moved = su2_act(alpha, &xi).unwrap();
        for (k, &p) in [1.0, 2.0, 4.0].iter().enumerate() {
            let after = moved.lp_norm(p);
            assert!((after - before[k]).abs() < 0.02 * before[k], "α={alpha:?} p={p}: {after} vs {}", before[k]);
        }
    }
}

#[test]
fn su2_action_moves_the_length_pointwise() {
    let grid = Arc::new(ChartGrid::p1_chart(1.5, 0.01));
    let xi = bump(&grid, C64::new(0.0, 0.0), 0.3, Q::real(1.0));
    let alpha = unit(1.0, 0.2, 0.25, -0.1);
    let moved = su2_act(alpha, &xi).unwrap();
    let (l0, l1) = (xi.length(), moved.length());
    for z in [C64::new(0.1, 0.2), C64::new(-0.3, 0.05), C64::new(0.4, -0.4)] {
        let i = grid.nearest(z).unwrap();
        let z = grid.node(i);
        let pre = su2_point(alpha, z).unwrap();
        let j = grid.nearest(pre).unwrap();
        let exact = (1.0 + pre.norm_sqr()).sqrt() * (-pre.norm_sqr() / 0.09).exp();
        assert!((l1[i].unwrap() - exact).abs() < 1e-3, "{} vs {exact}", l1[i].unwrap());
        assert!((l0[j].unwrap() - exact).abs() < 0.05);
    }
}

#[test]
fn fubini_study_area_is_pi() {
    let a = fubini_study_area(0.01);
    assert!((a - PI).abs() < 0.005 * PI, "{a}");
}

#[test]
fn weak_l2_quasinorm() {
    let rep = weak_l2_check(0.005);
    assert!((rep.total_measure - PI).abs() < 0.01 * PI, "{rep:?}");
    assert!(rep.sup <= PI.sqrt() * 1.05, "{rep:?}");
    assert!(rep.sup >= PI.sqrt() * 0.95, "{rep:?}");
}
