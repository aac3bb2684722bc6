use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use quatsurf::catalog::{catenoid_forms, make};
use quatsurf::field::{ChartGrid, QField};
use quatsurf::geometry::{willmore_k, willmore_w};
use quatsurf::representations::{bundle_degree, holo_residual, pairing10};
use quatsurf::transforms::{
    conjugate_kodaira, imaginary_preserving, moebius_kodaira, moebius_weierstrass, pullback_covering,
    pullback_weierstrass, reflect_weierstrass, Covering, MoebiusCoeffs, TransformError,
};
use quatsurf::Q;

fn c(z: C64) -> Q {
    Q::from_complex(z)
}

fn sphere_f(z: C64) -> Q {
    let r2 = z.norm_sqr();
    (Q::i() * (r2 - 1.0) - Q::j() * c(z) * 2.0) / (r2 + 1.0)
}

#[test]
fn plane_maps_to_round_sphere() {
    let e = make("plane", &[], 0.05).unwrap();
    let (k, rep) = moebius_kodaira(&e.kodaira, &MoebiusCoeffs::sphere_map()).unwrap();
    assert!(rep.poles.is_empty());
    assert!(rep.residual[0] < 1e-14);
    let ch = &k.charts[0];
    for i in ch.upsilon.included() {
        let z = ch.upsilon.grid.node(i);
        assert!(ch.upsilon.values[i].approx_eq(c(z) + Q::k(), 1e-14));
        assert!(ch.phi.values[i].approx_eq(c(z) * Q::i() - Q::j(), 1e-14));
        let f = ch.upsilon.values[i].inv() * ch.phi.values[i];
        assert!(f.approx_eq(sphere_f(z), 1e-13));
    }
}

#[test]
fn plane_to_sphere_weierstrass_data() {
    let e = make("plane", &[], 0.05).unwrap();
    let f = vec![e.charts[0].surface.f.clone()];
    let (w, rep) = moebius_weierstrass(&e.weierstrass, &MoebiusCoeffs::sphere_map(), &f).unwrap();
    assert!(rep.poles.is_empty());
    // the residual against a finite-difference dF̃ converges faster than h³
    let fine = make("plane", &[], 0.025).unwrap();
    let ff = vec![fine.charts[0].surface.f.clone()];
    let (_, rep2) = moebius_weierstrass(&fine.weierstrass, &MoebiusCoeffs::sphere_map(), &ff).unwrap();
    assert!(rep.residual[0] / rep2.residual[0] > 8.0, "{rep:?} {rep2:?}");
    let ch = &w.charts[0];
    for i in ch.psi.included() {
        let z = ch.psi.grid.node(i);
        let jzi = (Q::j() * c(z) + Q::i()).inv();
        assert!(ch.u.field().values[i].approx_eq(Q::k() / (1.0 + z.norm_sqr()), 1e-13));
        assert!(ch.chi.values[i].approx_eq(-jzi, 1e-13));
        assert!(ch.psi.values[i].approx_eq(-(jzi * 2.0), 1e-13));
        assert!(ch.b.values[i].approx_eq(c(-z.conj() / (1.0 + z.norm_sqr())), 1e-13));
    }
}

#[test]
fn identity_leaves_data_unchanged() {
    let e = make("catenoid", &[], 0.04).unwrap();
    let m = MoebiusCoeffs::identity();
    let (k, _) = moebius_kodaira(&e.kodaira, &m).unwrap();
    assert_eq!(k.charts[0].upsilon.sub(&e.kodaira.charts[0].upsilon).sup_norm(), 0.0);
    assert_eq!(k.charts[0].phi.sub(&e.kodaira.charts[0].phi).sup_norm(), 0.0);
    let f = vec![e.charts[0].surface.f.clone()];
    let (w, _) = moebius_weierstrass(&e.weierstrass, &m, &f).unwrap();
    let w0 = &e.weierstrass.charts[0];
    assert!(w.charts[0].chi.sub(&w0.chi).sup_norm() < 1e-15);
    assert!(w.charts[0].psi.sub(&w0.psi).sup_norm() < 1e-15);
    assert!(w.charts[0].u.field().sub(w0.u.field()).sup_norm() < 1e-15);
    assert!(w.charts[0].b.sub(&w0.b).sup_norm() < 1e-15);
}

#[test]
fn catenoid_maps_to_inverted_catenoid() {
    let e = make("catenoid", &[], 0.04).unwrap();
    let inv = make("inverted_catenoid", &[], 0.04).unwrap();
    let (k, rep) = moebius_kodaira(&e.kodaira, &MoebiusCoeffs::sphere_map()).unwrap();
    assert!(rep.poles.is_empty());
    let forms = &inv.charts[0].forms;
    let ch = &k.charts[0];
    let mut checked = 0;
    for i in ch.upsilon.included() {
        let z = ch.upsilon.grid.node(i);
        assert!(ch.upsilon.values[i].approx_eq((forms.upsilon)(z), 1e-12));
        assert!(ch.phi.values[i].approx_eq((forms.phi)(z), 1e-12));
        checked += 1;
    }
    assert!(checked > 1000);
    // continuous extension over z = 0
    assert!((forms.upsilon)(C64::new(0.0, 0.0)).approx_eq(-Q::k(), 1e-15));
    assert!((forms.phi)(C64::new(0.0, 0.0)).approx_eq(-Q::j(), 1e-15));
    let cat = catenoid_forms();
    let m = MoebiusCoeffs::sphere_map();
    let z = C64::new(1e-7, 2e-7);
    let (u, p) = ((cat.upsilon)(z), (cat.phi)(z));
    assert!((p * m.gamma + u * m.delta).approx_eq(-Q::k(), 1e-5));
    assert!((p * m.alpha + u * m.beta).approx_eq(-Q::j(), 1e-5));
}

#[test]
fn affine_maps_act_on_sections_directly() {
    let e = make("catenoid", &[], 0.04).unwrap();
    let (alpha, beta, delta) = (Q::new(0.5, 0.1, -0.3, 0.2), Q::new(0.0, 1.0, 2.0, 0.0), Q::new(1.0, 0.0, 0.4, -0.2));
    let m = MoebiusCoeffs::new(alpha, beta, Q::zero(), delta).unwrap();
    let f = vec![e.charts[0].surface.f.clone()];
    let (w, rep) = moebius_weierstrass(&e.weierstrass, &m, &f).unwrap();
    let fine = make("catenoid", &[], 0.02).unwrap();
    let (_, rep2) = moebius_weierstrass(&fine.weierstrass, &m, &[fine.charts[0].surface.f.clone()]).unwrap();
    assert!(rep.residual[0] / rep2.residual[0] > 8.0, "{rep:?} {rep2:?}");
    let w0 = &e.weierstrass.charts[0];
    let d = w.charts[0].chi.zip(&w0.chi, |_, a, b| a - b * delta.conj().inv()).sup_norm();
    let p = w.charts[0].psi.zip(&w0.psi, |_, a, b| a - b * alpha).sup_norm();
    assert!(d < 1e-14 && p < 1e-14);
    assert!(w.charts[0].u.field().sub(w0.u.field()).sup_norm() < 1e-15);
}

#[test]
fn poles_are_masked_and_reported() {
    let e = make("plane", &[], 0.02).unwrap();
    // F = jz, so Fγ + δ = j(z − 0.5) with γ = 1, δ = −j/2
    let m = MoebiusCoeffs::new(Q::one(), Q::zero(), Q::one(), Q::j() * -0.5).unwrap();
    let (k, rep) = moebius_kodaira(&e.kodaira, &m).unwrap();
    assert_eq!(rep.poles.len(), 1, "{rep:?}");
    let pole = &rep.poles[0];
    assert!((pole.z - C64::new(0.5, 0.0)).norm() < 1e-6 && pole.residual < 1e-6, "{pole:?}");
    assert!(pole.masked >= 25);
    assert_eq!(k.charts[0].upsilon.count() + pole.masked, e.kodaira.charts[0].upsilon.count());
    let g = &k.charts[0].upsilon.grid;
    for i in k.charts[0].upsilon.included() {
        assert!((g.node(i) - C64::new(0.5, 0.0)).norm() >= 3.0 * g.h - 1e-12);
    }
    // off the lattice the refined pole still lands on the zero
    let m = MoebiusCoeffs::new(Q::one(), Q::zero(), Q::one(), -(Q::j() * 0.2345) - Q::k() * 0.1111).unwrap();
    let (_, rep) = moebius_kodaira(&e.kodaira, &m).unwrap();
    assert_eq!(rep.poles.len(), 1);
    // jz = 0.2345j + 0.1111k  ⇒  z = 0.2345 − 0.1111i
    assert!((rep.poles[0].z - C64::new(0.2345, -0.1111)).norm() < 1e-5, "{:?}", rep.poles[0]);
}

#[test]
fn every_node_at_the_pole_is_an_error() {
    let g = Arc::new(ChartGrid::rectangle(-0.04, 0.04, -0.04, 0.04, 0.02));
    let e = make("plane", &[], 0.02).unwrap();
    let mut k = e.kodaira.clone();
    let ch = &mut k.charts[0];
    ch.upsilon = QField::constant(&g, -Q::j());
    ch.phi = QField::from_fn(&g, c);
    ch.v = quatsurf::field::Potential01(QField::zeros(&g));
    // F ↦ F⁻¹ with F = jz: every node lies within 3h of the pole at 0
    let m = MoebiusCoeffs::new(Q::zero(), Q::one(), Q::one(), Q::zero()).unwrap();
    assert!(matches!(moebius_kodaira(&k, &m), Err(TransformError::HitsInfinity { chart: 0 })));
}

#[test]
fn imaginary_preservation() {
    assert!(imaginary_preserving(&MoebiusCoeffs::sphere_map()));
    assert!(imaginary_preserving(&MoebiusCoeffs::identity()));
    let m = MoebiusCoeffs::new(Q::one() + Q::j(), Q::zero(), Q::zero(), Q::one()).unwrap();
    assert!(!imaginary_preserving(&m));
}

#[test]
fn degenerate_coefficients_are_rejected() {
    let z = Q::zero();
    assert!(matches!(MoebiusCoeffs::new(z, Q::one(), z, Q::one()), Err(TransformError::Degenerate(_))));
    assert!(matches!(MoebiusCoeffs::new(Q::one(), Q::one(), z, z), Err(TransformError::Degenerate(_))));
    // δγ⁻¹α = β
    let (a, g, d) = (Q::new(1.0, 2.0, 0.0, 1.0), Q::new(0.0, 1.0, 1.0, 0.0), Q::new(2.0, 0.0, 0.0, -1.0));
    let b = d * g.inv() * a;
    assert!(matches!(MoebiusCoeffs::new(a, b, g, d), Err(TransformError::Degenerate(_))));
    assert!(MoebiusCoeffs::new(a, b + Q::i() * 1e-3, g, d).is_ok());
    assert!(matches!(MoebiusCoeffs::from_reals(&[1.0; 15]), Err(TransformError::Degenerate(_))));
    let m = MoebiusCoeffs::from_reals(&[0., 1., 0., 0., 1., 0., 0., 0., 1., 0., 0., 0., 0., 1., 0., 0.]).unwrap();
    assert_eq!(m, MoebiusCoeffs::sphere_map());
}

fn quat() -> impl Strategy<Value = Q> {
    prop::array::uniform4(-2.0f64..2.0).prop_map(Q::from_array)
}

proptest! {
    #[test]
    fn inverse_undoes_the_map(a in quat(), b in quat(), g in quat(), d in quat(), x in quat()) {
        let Ok(m) = MoebiusCoeffs::new(a, b, g, d) else { return Ok(()) };
        let Ok(inv) = m.inverse() else { return Ok(()) };
        let Some(y) = m.apply(x) else { return Ok(()) };
        let Some(back) = inv.apply(y) else { return Ok(()) };
        // the round trip loses accuracy near the poles of either map
        let cond = (x * g + d).norm().recip() + (y * inv.gamma + inv.delta).norm().recip();
        prop_assume!(cond < 1e3);
        prop_assert!(back.approx_eq(x, 1e-9 * (1.0 + cond)), "{back} vs {x}");
        let id = m.then(&inv);
        prop_assert!(id.alpha.approx_eq(Q::one(), 1e-8) && id.delta.approx_eq(Q::one(), 1e-8));
        prop_assert!(id.beta.norm() < 1e-8 && id.gamma.norm() < 1e-8);
    }

    #[test]
    fn composition_matches_sequential_application(a in quat(), b in quat(), g in quat(), d in quat(), x in quat()) {
        let Ok(m) = MoebiusCoeffs::new(a, b, g, d) else { return Ok(()) };
        let s = MoebiusCoeffs::sphere_map();
        let Some(y) = m.apply(x) else { return Ok(()) };
        let Some(z1) = s.apply(y) else { return Ok(()) };
        let Some(z2) = m.then(&s).apply(x) else { return Ok(()) };
        prop_assume!((x * g + d).norm() > 1e-3 && (y + Q::i()).norm() > 1e-3);
        prop_assert!(z1.approx_eq(z2, 1e-8));
    }
}

#[test]
fn willmore_energy_is_moebius_invariant() {
    let e = make("sphere", &[], 0.01).unwrap();
    let w0 = willmore_w(&e.weierstrass);
    assert!((w0 - 4.0 * PI).abs() < 0.01 * 4.0 * PI);
    // (F + 2)⁻¹F keeps the sphere away from the pole
    let m = MoebiusCoeffs::new(Q::one(), Q::zero(), Q::one(), Q::real(2.0)).unwrap();
    let f: Vec<QField> = e.charts.iter().map(|c| c.surface.f.clone()).collect();
    let (w, rep) = moebius_weierstrass(&e.weierstrass, &m, &f).unwrap();
    assert!(rep.poles.is_empty());
    let w1 = willmore_w(&w);
    assert!((w1 - w0).abs() < 0.02 * w0, "{w0} → {w1}");
    let (k, _) = moebius_kodaira(&e.kodaira, &m).unwrap();
    assert!((willmore_k(&k, 1) - willmore_k(&e.kodaira, 1)).abs() < 1e-12);
}

#[test]
fn reflection_swaps_sections() {
    for name in ["catenoid", "sphere"] {
        let e = make(name, &[], 0.02).unwrap();
        let r = reflect_weierstrass(&e.weierstrass).unwrap();
        for (ch, rc) in e.charts.iter().zip(&r.charts) {
            // partials of −F̄ are −conj of the exact partials of F
            let (fx, fy) = ch.surface.partials().unwrap();
            let form = pairing10(&rc.chi, &rc.psi);
            let gx = form.dz.add(&form.dzbar);
            let gy = form.dz.zip(&form.dzbar, |_, a, b| Q::i() * (a - b));
            let ex = gx.zip(&fx, |_, g, f| g + f.conj()).sup_norm();
            let ey = gy.zip(&fy, |_, g, f| g + f.conj()).sup_norm();
            assert!(ex < 1e-12 * fx.sup_norm() && ey < 1e-12 * fy.sup_norm(), "{name}: {ex:e} {ey:e}");
            // ψ̃ = χ is U†-holomorphic, i.e. Ũ-holomorphic
            let r = holo_residual(&rc.psi, rc.u.field(), false).unwrap();
            assert!(r < 5e-2, "{name}: {r}");
            let r = holo_residual(&rc.chi, rc.u.field(), true).unwrap();
            assert!(r < 5e-2, "{name}: {r}");
        }
    }
}

#[test]
fn conjugate_surface_is_holomorphic_on_mirrored_grid() {
    for name in ["catenoid", "sphere", "plane"] {
        let e = make(name, &[], 0.02).unwrap();
        let k = conjugate_kodaira(&e.kodaira).unwrap();
        for (kc, ch) in k.charts.iter().zip(&e.charts) {
            let r1 = holo_residual(&kc.upsilon, kc.v.field(), false).unwrap();
            let r2 = holo_residual(&kc.phi, kc.v.field(), false).unwrap();
            assert!(r1 < 5e-2 && r2 < 5e-2, "{name}: {r1} {r2}");
            let f = kc.upsilon.zip(&kc.phi, |_, u, p| u.inv() * p);
            for i in f.included().step_by(37) {
                let z = f.grid.node(i);
                assert!(f.values[i].approx_eq((ch.forms.f)(z.conj()), 1e-9), "{name} at {z}");
            }
        }
        if let Some(cc) = k.cocycle {
            assert_eq!(bundle_degree(|z| cc.eval(z)).unwrap(), e.deg);
        }
    }
}

#[test]
fn double_cover_of_the_sphere() {
    let h = 0.01;
    let e = make("sphere", &[], h).unwrap();
    let targets = vec![Arc::new(ChartGrid::p1_chart(1.2, h)), Arc::new(ChartGrid::p1_chart(1.2, h))];
    let cov = Covering::power(2);
    let k = pullback_covering(&e.kodaira, &cov, &targets).unwrap();
    let cc = k.cocycle.unwrap();
    let deg = bundle_degree(|z| cc.eval(z)).unwrap();
    assert_eq!(deg, 2);
    assert!((willmore_k(&k, deg) - 8.0 * PI).abs() < 1e-12);
    for ch in &k.charts {
        assert!(holo_residual(&ch.upsilon, ch.v.field(), false).unwrap() < 5e-2);
    }
    let w = pullback_weierstrass(&e.weierstrass, &cov, &targets).unwrap();
    let ww = willmore_w(&w);
    assert!((ww - 8.0 * PI).abs() < 0.02 * 8.0 * PI, "{ww}");
    // the pulled-back sections still pair to dF̃ for F̃ = F(z²)
    let z = C64::new(0.3, 0.4);
    let form = pairing10(&w.charts[0].chi, &w.charts[0].psi);
    let eps = 1e-6;
    let fx = (sphere_f((z + eps) * (z + eps)) - sphere_f((z - eps) * (z - eps))) * (0.5 / eps);
    let i = form.dz.grid.nearest(z).unwrap();
    let got = form.dz.values[i] + form.dzbar.values[i];
    assert!(got.approx_eq(fx, 1e-6), "{got} vs {fx}");

    let small = vec![Arc::new(ChartGrid::p1_chart(1.5, 0.05)), Arc::new(ChartGrid::p1_chart(1.5, 0.05))];
    assert!(matches!(pullback_covering(&e.kodaira, &cov, &small), Err(TransformError::ImageOutsideChart { .. })));
}

#[test]
fn identity_and_translation_coverings() {
    let e = make("catenoid", &[], 0.02).unwrap();
    let g = e.kodaira.charts[0].upsilon.grid.clone();
    let k = pullback_covering(&e.kodaira, &Covering::identity(), &[g]).unwrap();
    assert_eq!(k.charts[0].upsilon.sub(&e.kodaira.charts[0].upsilon).sup_norm(), 0.0);
    assert_eq!(k.charts[0].v.field().sub(e.kodaira.charts[0].v.field()).sup_norm(), 0.0);

    let shift = C64::new(0.013, -0.007);
    let target = Arc::new(ChartGrid::annulus(-shift, 0.45, 2.6, 0.02));
    let k = pullback_covering(&e.kodaira, &Covering::translation(shift), &[target]).unwrap();
    let k0 = &e.kodaira.charts[0];
    let r0 = holo_residual(&k0.upsilon, k0.v.field(), false).unwrap();
    let r1 = holo_residual(&k.charts[0].upsilon, k.charts[0].v.field(), false).unwrap();
    assert!(r1 <= 2.0 * r0.max(1e-6), "{r0:e} → {r1:e}");
    let ch = &k.charts[0];
    let i = ch.upsilon.grid.nearest(C64::new(1.0, 0.0) - shift).unwrap();
    let z = ch.upsilon.grid.node(i);
    assert!(ch.upsilon.values[i].approx_eq((e.charts[0].forms.upsilon)(z + shift), 1e-7));
}
