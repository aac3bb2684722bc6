use std::sync::Arc;

use num_complex::Complex64 as C64;
use quatsurf::catalog::make;
use quatsurf::conformal::{
    conformality_residual, imaginary_check, normals_from_df, write_obj, ConformalError, SurfaceChart,
};
use quatsurf::field::{ChartGrid, QField};
use quatsurf::Q;

fn at(f: &QField, z: C64) -> Q {
    let i = f.grid.nearest(z).unwrap();
    assert!((f.grid.node(i) - z).norm() < 1e-12, "no node at {z}");
    f.get(i).unwrap()
}

fn rect(h: f64) -> Arc<ChartGrid> {
    Arc::new(ChartGrid::rectangle(-1.0, 1.0, -1.0, 1.0, h))
}

#[test]
fn sphere_normal_at_south_pole() {
    let e = make("sphere", &[], 0.02).unwrap();
    let normals = normals_from_df(&e.charts[0].surface).unwrap();
    assert!(at(&normals.n, C64::new(0.0, 0.0)).approx_eq(-Q::i(), 1e-12));
    assert!(e.charts[0].forms.n(C64::new(0.0, 0.0)).approx_eq(-Q::i(), 1e-15));
}

#[test]
fn plane_normal_matches_trivialisation() {
    let e = make("plane", &[], 0.04).unwrap();
    let s = &e.charts[0].surface;
    let normals = normals_from_df(s).unwrap();
    let ups = -Q::j();
    let expect = ups.inv() * Q::i() * ups;
    assert!(expect.approx_eq(-Q::i(), 1e-15));
    for i in normals.n.included() {
        assert!(normals.n.values[i].approx_eq(expect, 1e-12));
    }
    let rep = conformality_residual(s, &normals).unwrap();
    assert!(rep.value() <= 1e-10, "{rep:?}");
}

#[test]
fn catenoid_normal_at_waist() {
    let e = make("catenoid", &[], 0.02).unwrap();
    let normals = normals_from_df(&e.charts[0].surface).unwrap();
    let a = Q::one() - Q::k();
    let expect = a * (-Q::i()) * a.inv();
    assert!(expect.approx_eq(Q::j(), 1e-15));
    assert!(at(&normals.n, C64::new(1.0, 0.0)).approx_eq(Q::j(), 1e-12));
}

#[test]
fn catenoid_metric_at_waist() {
    let e = make("catenoid", &[], 0.02).unwrap();
    let (fx, fy) = e.charts[0].surface.partials().unwrap();
    // z = e^{u+iv}: at z = 1 the u, v directions are x, y
    let z = C64::new(1.0, 0.0);
    assert!((at(&fx, z).norm_sq() - 4.0).abs() < 1e-12);
    assert!((at(&fy, z).norm_sq() - 4.0).abs() < 1e-12);
    // along the circle |z| = e^u the factor is 4cosh²u
    let u: f64 = 0.4;
    let z = C64::from_polar(u.exp(), 0.0);
    let i = fx.grid.nearest(z).unwrap();
    let zn = fx.grid.node(i);
    let un = zn.norm().ln();
    let scale = zn.norm_sqr();
    assert!((fx.values[i].norm_sq() * scale - 4.0 * un.cosh().powi(2)).abs() < 1e-9);
    let normals = normals_from_df(&e.charts[0].surface).unwrap();
    let rep = conformality_residual(&e.charts[0].surface, &normals).unwrap();
    assert!(rep.value() < 1e-10 && rep.metric_residual < 1e-10 && rep.orthogonality_residual < 1e-10, "{rep:?}");
}

#[test]
fn finite_difference_normals_agree_with_closed_forms() {
    for name in ["catenoid", "sphere"] {
        let e = make(name, &[], 0.02).unwrap();
        let ch = &e.charts[0];
        let fd = SurfaceChart::new("fd", ch.surface.f.clone());
        let normals = normals_from_df(&fd).unwrap();
        let dn = normals.n.zip(&ch.n, |_, a, b| a - b).sup_norm();
        let dr = normals.r.zip(&ch.r, |_, a, b| a - b).sup_norm();
        assert!(dn < 1e-4 && dr < 1e-4, "{name}: {dn:e} {dr:e}");
    }
}

#[test]
fn non_conformal_map_is_detected() {
    let g = rect(0.02);
    let f = QField::from_fn(&g, |z| Q::from_complex(z + 0.3 * z.conj()));
    let s = SurfaceChart::new("shear", f);
    let normals = normals_from_df(&s).unwrap();
    let rep = conformality_residual(&s, &normals).unwrap();
    assert!(rep.value() > 0.1, "{rep:?}");
}

#[test]
fn normals_fix_the_tangent_plane() {
    for name in ["catenoid", "sphere", "inverted_catenoid"] {
        let e = make(name, &[], 0.04).unwrap();
        for ch in &e.charts {
            let (fx, fy) = ch.surface.partials().unwrap();
            let normals = normals_from_df(&ch.surface).unwrap();
            for i in normals.n.included() {
                let (n, r) = (normals.n.values[i], normals.r.values[i]);
                let (x, y) = (fx.values[i], fy.values[i]);
                let s = x.norm() + y.norm();
                assert!((n * x - x * r).norm() <= 1e-6 * s && (n * y - y * r).norm() <= 1e-6 * s);
                assert!((n * n + Q::one()).norm() < 1e-6 && (r * r + Q::one()).norm() < 1e-6);
            }
        }
    }
}

#[test]
fn imaginary_surfaces_have_opposite_normals() {
    for name in ["catenoid", "sphere", "inverted_catenoid"] {
        let e = make(name, &[], 0.04).unwrap();
        for ch in &e.charts {
            let normals = normals_from_df(&ch.surface).unwrap();
            let d = normals.n.zip(&normals.r, |_, n, r| n + r).sup_norm();
            assert!(d < 1e-6, "{name}: {d:e}");
        }
    }
}

#[test]
fn reflection_swaps_normals() {
    let alpha = Q::one() + Q::j();
    let beta = Q::one() + Q::k();
    let g = rect(0.05);
    let s = SurfaceChart::new("plane", QField::from_fn(&g, |z| alpha * Q::from_complex(z) * beta));
    let a = normals_from_df(&s).unwrap();
    let b = normals_from_df(&s.reflect()).unwrap();
    let d1 = b.n.zip(&a.r, |_, x, y| x + y).sup_norm();
    let d2 = b.r.zip(&a.n, |_, x, y| x + y).sup_norm();
    assert!(d1 < 1e-9 && d2 < 1e-9, "{d1:e} {d2:e}");
    assert!(at(&a.n, C64::new(0.0, 0.0)).approx_eq(alpha * Q::i() * alpha.inv(), 1e-9));
}

#[test]
fn imaginary_checks() {
    let e = make("catenoid", &[], 0.04).unwrap();
    let w = &e.weierstrass.charts[0];
    let rep = imaginary_check(&e.charts[0].surface, Some((&w.chi, &w.psi)), 1e-9);
    assert!(rep.is_imaginary, "{rep:?}");
    assert!(rep.g_mean.unwrap().approx_eq(Q::one(), 1e-12));

    let e = make("sphere", &[], 0.04).unwrap();
    // g is a section of KE², whose transition f₂₁²·dz₁/dz₂ is −1
    for ((ch, w), g) in e.charts.iter().zip(&e.weierstrass.charts).zip([2.0, -2.0]) {
        let rep = imaginary_check(&ch.surface, Some((&w.chi, &w.psi)), 1e-9);
        assert!(rep.is_imaginary, "{rep:?}");
        assert!(rep.g_mean.unwrap().approx_eq(Q::real(g), 1e-12), "{rep:?}");
    }

    let g = rect(0.05);
    let s = SurfaceChart::new("shifted", QField::from_fn(&g, |z| Q::j() * Q::from_complex(z) + Q::one()));
    let rep = imaginary_check(&s, None, 1e-9);
    assert!(!rep.is_imaginary);
    assert!((rep.re_residual - 1.0).abs() < 1e-15);
}

#[test]
fn branch_points_are_masked() {
    let g = rect(0.05);
    let f = QField::from_fn(&g, |z| Q::from_complex(z * z * z));
    let normals = normals_from_df(&SurfaceChart::new("cube", f)).unwrap();
    assert!(normals.rank_deficient >= 1);
    assert!(normals.n.get(g.nearest(C64::new(0.0, 0.0)).unwrap()).is_none());
}

#[test]
fn obj_export() {
    let e = make("sphere", &[], 0.05).unwrap();
    let s = &e.charts[0].surface;
    let mut buf = vec![];
    let stats = write_obj(s, false, 1e-9, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut verts = 0;
    for line in text.lines().filter(|l| l.starts_with("v ")) {
        let p: Vec<f64> = line[2..].split_whitespace().map(|t| t.parse().unwrap()).collect();
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        assert!((r - 1.0).abs() < 1e-6);
        verts += 1;
    }
    assert_eq!(verts, stats.vertices);
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), stats.faces);
    assert!(stats.faces > 0 && stats.dropped_real.is_none());

    let g = rect(0.1);
    let s = SurfaceChart::new("tilted", QField::from_fn(&g, |z| (Q::one() + Q::j()) * Q::from_complex(z)));
    assert!(matches!(write_obj(&s, false, 1e-9, std::io::sink()), Err(ConformalError::NotImaginary(_))));
    let mut buf = vec![];
    let stats = write_obj(&s, true, 1e-9, &mut buf).unwrap();
    let (lo, hi) = stats.dropped_real.unwrap();
    assert!((lo + 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    assert!(String::from_utf8(buf).unwrap().contains("dropped real part"));
}
