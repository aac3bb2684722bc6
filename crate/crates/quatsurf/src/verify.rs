//! Named checks over catalog surfaces and field bundles, grouped into
//! suites and collected into a JSON report.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{self, catenoid_forms, catenoid_upsilon_star, CatalogEntry, CatalogError};
use crate::conformal::{conformality_residual, normals_from_df, SurfaceChart};
use crate::dirac_p1;
use crate::field::{loop_integral, neumann_resolve, root_order, ChartGrid, Circle, FieldError, Potential01, QField};
use crate::geometry::{liyau_pluecker_check, willmore_k, willmore_w};
use crate::isothermic::{constrained_residual, dual_normals, dual_residual, isothermic_residual, transform_multipliers, MultiplierPair};
use crate::representations::{
    bundle_degree, darboux, holo_residual, inverse_darboux, pairing10, Bundle, BundleKind, KChart, KodairaData, RepError,
    WeierstrassData,
};
use crate::transforms::MoebiusCoeffs;
use crate::Q;

pub const REPORT_SCHEMA: u32 = 1;

pub const SUITES: [&str; 8] = ["algebra", "conformal", "darboux", "energy", "isothermic", "constrained", "dirac", "plucker"];

/// `K₀(2)`.
const BESSEL_K0_2: f64 = 0.113_893_872_749_533_4;

/// Tolerance for finite-difference identities at `h ≤ 0.02`.
pub const FD_TOL: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    UnknownSurface(CatalogError),
    #[error("bad bundle: {0}")]
    BadBundle(String),
    #[error("unknown suite {0:?} (known: {})", SUITES.join(", "))]
    UnknownSuite(String),
    #[error("resolution must be positive and at most 0.5, got {0}")]
    BadResolution(f64),
}

impl VerifyError {
    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            VerifyError::BadBundle(_) => 3,
            _ => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Against a value known in closed form.
    ClosedForm,
    /// An inequality.
    Bound,
    /// A residual that should vanish up to discretisation error.
    Residual,
    /// Recorded only.
    Info,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub id: String,
    pub description: String,
    pub kind: CheckKind,
    pub value: f64,
    pub expected: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Skipped {
    pub suite: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationReport {
    pub schema: u32,
    pub version: String,
    pub surface: String,
    pub h: f64,
    pub suites: Vec<String>,
    pub checks: Vec<Check>,
    pub skipped: Vec<Skipped>,
    pub pass: bool,
    pub wall_time: f64,
}

impl VerificationReport {
    pub fn check(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn close(id: impl Into<String>, description: &str, value: f64, expected: f64, tol: f64) -> Check {
    Check {
        id: id.into(),
        description: description.into(),
        kind: CheckKind::ClosedForm,
        value,
        expected: Some(expected),
        tolerance: Some(tol),
        pass: (value - expected).abs() <= tol,
    }
}

/// `value ≤ tol`.
fn small(id: impl Into<String>, description: &str, kind: CheckKind, value: f64, tol: f64) -> Check {
    Check { id: id.into(), description: description.into(), kind, value, expected: Some(0.0), tolerance: Some(tol), pass: value <= tol }
}

fn bound(id: impl Into<String>, description: &str, value: f64, pass: bool) -> Check {
    Check { id: id.into(), description: description.into(), kind: CheckKind::Bound, value, expected: None, tolerance: None, pass }
}

fn info(id: impl Into<String>, description: &str, value: f64) -> Check {
    Check { id: id.into(), description: description.into(), kind: CheckKind::Info, value, expected: None, tolerance: None, pass: true }
}

fn failed(id: impl Into<String>, description: &str, err: impl std::fmt::Display) -> Check {
    Check {
        id: id.into(),
        description: format!("{description}: {err}"),
        kind: CheckKind::Residual,
        value: f64::NAN,
        expected: None,
        tolerance: None,
        pass: false,
    }
}

/// What a report is computed from.
pub struct Subject {
    pub name: String,
    pub h: f64,
    pub entry: Option<CatalogEntry>,
    pub kodaira: Option<KodairaData>,
    pub weierstrass: Option<WeierstrassData>,
    pub deg: i32,
}

impl Subject {
    pub fn catalog(name: &str, h: f64) -> Result<Self, VerifyError> {
        if !(h > 0.0 && h <= 0.5) {
            return Err(VerifyError::BadResolution(h));
        }
        let e = catalog::make(name, &[], h).map_err(VerifyError::UnknownSurface)?;
        Ok(Subject {
            name: name.to_string(),
            h,
            kodaira: Some(e.kodaira.clone()),
            weierstrass: Some(e.weierstrass.clone()),
            deg: e.deg,
            entry: Some(e),
        })
    }

    /// A bundle; the missing half is filled in by the (inverse) Darboux
    /// transformation when that succeeds.
    pub fn bundle(text: &str) -> Result<Self, VerifyError> {
        let bad = |e: RepError| VerifyError::BadBundle(e.to_string());
        let b = Bundle::from_json(text).map_err(bad)?;
        let (kodaira, weierstrass) = match b.kind {
            BundleKind::Kodaira => {
                let k = b.to_kodaira().map_err(bad)?;
                let w = darboux(&k).ok().map(|(w, _)| w);
                (Some(k), w)
            }
            BundleKind::Weierstrass => {
                let w = b.to_weierstrass().map_err(bad)?;
                // two P¹ charts are integrated from a point of their overlap
                let z0 = if w.charts.len() > 1 { C64::new(1.0, 0.0) } else { basepoint(&w.charts[0].chi.grid) };
                let k = inverse_darboux(&w, z0, Q::zero()).ok().map(|inv| inv.kodaira);
                (k, Some(w))
            }
        };
        let h = b.charts[0].grid.h;
        let deg = match b.cocycle {
            Some(c) => bundle_degree(|z| c.eval(z)).map_err(bad)?,
            None => 0,
        };
        Ok(Subject { name: b.name.unwrap_or_else(|| "bundle".into()), h, entry: None, kodaira, weierstrass, deg })
    }

    fn compact(&self) -> bool {
        self.kodaira.as_ref().map(|k| k.cocycle.is_some()).or(self.weierstrass.as_ref().map(|w| w.cocycle.is_some())).unwrap_or(false)
    }

    /// The surface map per chart: closed form for catalog entries, `υ⁻¹φ`
    /// otherwise.
    pub fn surfaces(&self) -> Option<Vec<SurfaceChart>> {
        if let Some(e) = &self.entry {
            return Some(e.charts.iter().map(|c| c.surface.clone()).collect());
        }
        let k = self.kodaira.as_ref()?;
        Some(k.surface().into_iter().enumerate().map(|(i, f)| SurfaceChart::new(format!("{}#{i}", self.name), f)).collect())
    }
}

/// An included node closest to the grid's centre of mass, as a basepoint.
fn basepoint(g: &ChartGrid) -> C64 {
    let n = g.included().count().max(1) as f64;
    let c = g.included().map(|i| g.node(i)).sum::<C64>() / n;
    g.included().map(|i| g.node(i)).min_by(|a, b| (a - c).norm().total_cmp(&(b - c).norm())).unwrap_or(c)
}

/// Radius around `z = 0` left out of finite-difference checks on compact
/// surfaces, whose charts carry the `z·ln|z|²` terms of a compactified end.
fn puncture_radius(s: &Subject) -> f64 {
    if s.compact() {
        0.2
    } else {
        0.0
    }
}

type SuiteOut = (Vec<Check>, Option<String>);

/// Runs the suites concurrently and assembles the report in suite order.
pub fn run_verify(subject: &Subject, suites: &[String]) -> Result<VerificationReport, VerifyError> {
    for s in suites {
        if !SUITES.contains(&s.as_str()) {
            return Err(VerifyError::UnknownSuite(s.clone()));
        }
    }
    let mut order: Vec<&str> = SUITES.iter().copied().filter(|s| suites.iter().any(|x| x == s)).collect();
    order.dedup();
    let start = Instant::now();
    let results: Vec<SuiteOut> = order
        .par_iter()
        .map(|s| match *s {
            "algebra" => (algebra_suite(), None),
            "conformal" => conformal_suite(subject),
            "darboux" => darboux_suite(subject),
            "energy" => energy_suite(subject),
            "isothermic" => isothermic_suite(subject),
            "constrained" => constrained_suite(subject),
            "dirac" => (dirac_suite(subject.h), None),
            "plucker" => plucker_suite(subject),
            _ => unreachable!(),
        })
        .collect();
    let mut checks = vec![];
    let mut skipped = vec![];
    for (s, (c, skip)) in order.iter().zip(results) {
        checks.extend(c);
        if let Some(reason) = skip {
            skipped.push(Skipped { suite: s.to_string(), reason });
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerificationReport {
        schema: REPORT_SCHEMA,
        version: env!("CARGO_PKG_VERSION").to_string(),
        surface: subject.name.clone(),
        h: subject.h,
        suites: order.iter().map(|s| s.to_string()).collect(),
        checks,
        skipped,
        pass,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

// ---------------------------------------------------------------------------
// suites

pub const ALGEBRA_CASES: usize = 10_000;

pub fn algebra_suite() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut q = || Q::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let (mut norm, mut conj, mut rot) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..ALGEBRA_CASES {
        let (a, b) = (q(), q());
        let s = a.norm() * b.norm();
        if s > 1e-6 {
            norm = norm.max(((a * b).norm() - s).abs() / s);
            conj = conj.max(((a * b).conj() - b.conj() * a.conj()).norm() / s);
        }
        let x = b.im();
        if a.norm() > 1e-6 && x.norm() > 1e-6 {
            let alpha = a * (1.0 / a.norm());
            let y = Q::rotate(alpha, x).expect("unit rotation");
            rot = rot.max((y.norm() - x.norm()).abs() / x.norm());
        }
    }
    vec![
        small("algebra.norm_multiplicative", "max relative | |ab| − |a||b| |", CheckKind::Residual, norm, 1e-12),
        small("algebra.conjugation_reverses", "max |conj(ab) − conj(b)conj(a)| / |a||b|", CheckKind::Residual, conj, 1e-12),
        small("algebra.rotation_norm", "max relative change of |x| under x ↦ αxα⁻¹", CheckKind::Residual, rot, 1e-12),
    ]
}

fn conformal_suite(s: &Subject) -> SuiteOut {
    let Some(charts) = s.surfaces() else { return (vec![], Some("no surface map available".into())) };
    let mut out = vec![];
    for (ci, ch) in charts.iter().enumerate() {
        if ch.exact_df.is_some() {
            let r = normals_from_df(ch).and_then(|n| conformality_residual(ch, &n));
            out.push(match r {
                Ok(r) => small(format!("conformal.exact.{ci}"), "sup |−*dF − N dF|/|dF| from closed-form dF", CheckKind::Residual, r.value(), 1e-10),
                Err(e) => failed(format!("conformal.exact.{ci}"), "normals from closed-form dF", e),
            });
        }
        // the compactified surfaces are only C^{1,α} at z = 0
        let f = ch.f.clone().punctured(C64::new(0.0, 0.0), puncture_radius(s));
        let fd = SurfaceChart::new(ch.name.clone(), f);
        let r = normals_from_df(&fd).and_then(|n| conformality_residual(&fd, &n));
        out.push(match r {
            Ok(r) => small(format!("conformal.fd.{ci}"), "sup |−*dF − N dF|/|dF| from finite differences", CheckKind::Residual, r.value(), FD_TOL),
            Err(e) => failed(format!("conformal.fd.{ci}"), "normals from finite differences", e),
        });
    }
    (out, None)
}

fn darboux_suite(s: &Subject) -> SuiteOut {
    let mut out = vec![];
    let Some(k) = &s.kodaira else { return (out, Some("no Kodaira data".into())) };
    // the compactified surfaces are only C^{1,α} at z = 0, where stencils do not converge
    let puncture = puncture_radius(s);
    let local = KodairaData {
        charts: k
            .charts
            .iter()
            .map(|c| KChart {
                v: Potential01(c.v.field().clone().punctured(C64::new(0.0, 0.0), puncture)),
                upsilon: c.upsilon.clone().punctured(C64::new(0.0, 0.0), puncture),
                phi: c.phi.clone().punctured(C64::new(0.0, 0.0), puncture),
                region: c.region,
            })
            .collect(),
        cocycle: k.cocycle,
    };
    match darboux(&local) {
        Ok((_, rep)) => {
            for (ci, r) in rep.plus_residual.iter().enumerate() {
                out.push(small(format!("darboux.b_absorbs_plus.{ci}"), "sup |(−(∂υ)υ⁻¹ − B)⁺|", CheckKind::Residual, *r, FD_TOL));
            }
            if !s.compact() {
                for (ci, r) in rep.pairing_residual.iter().enumerate() {
                    out.push(small(format!("darboux.pairing_fd.{ci}"), "(χ,ψ) against finite-difference dF, relative sup", CheckKind::Residual, *r, FD_TOL));
                }
            }
        }
        Err(e) => out.push(failed("darboux.transform", "Darboux transformation", e)),
    }
    if let Some(e) = &s.entry {
        for (ci, (ch, w)) in e.charts.iter().zip(&e.weierstrass.charts).enumerate() {
            let Some((d, dbar)) = &ch.surface.exact_df else { continue };
            let form = pairing10(&w.chi, &w.psi);
            let scale = d.sup_norm().max(dbar.sup_norm()).max(1e-300);
            let r = form.dz.sub(d).sup_norm().max(form.dzbar.sub(dbar).sup_norm()) / scale;
            out.push(small(format!("darboux.pairing_exact.{ci}"), "(χ,ψ) against closed-form dF, relative sup", CheckKind::ClosedForm, r, 1e-8));
        }
    }
    if let (Some(w), Some(charts)) = (&s.weierstrass, s.surfaces()) {
        let periodic = s.entry.as_ref().is_some_and(|e| e.name == "associated" && e.g.is_some_and(|g| g.im.abs() > 1e-12));
        if !periodic {
            let z0 = C64::new(0.5, 0.5);
            let f0 = charts[0].f.interpolate_cubic(z0);
            match f0.ok_or(RepError::Field(FieldError::PathOutsideGrid)).and_then(|f0| inverse_darboux(w, z0, f0)) {
                Ok(inv) => {
                    for (ci, (got, ch)) in inv.f.iter().zip(&charts).enumerate() {
                        let err = got.sub(&ch.f).sup_norm();
                        out.push(small(format!("darboux.round_trip.{ci}"), "sup |F − ∫(χ,ψ)|", CheckKind::Residual, err, 5e-2));
                    }
                }
                Err(e) => out.push(failed("darboux.round_trip", "inverse Darboux transformation", e)),
            }
        }
    }
    if s.compact() {
        if let (Some(k), Some(w)) = (&s.kodaira, &s.weierstrass) {
            let u: f64 = w.charts.iter().map(|c| c.u.field().l2_norm_sq_in(c.region)).sum();
            let v: f64 = k.charts.iter().map(|c| c.v.field().l2_norm_sq_in(c.region)).sum();
            let expected = PI * s.deg as f64;
            out.push(close("darboux.norm_identity", "‖U‖² − ‖V‖² against π·deg E", u - v, expected, 0.02 * PI * (s.deg.abs().max(1) as f64)));
        }
    }
    if let Some(e) = &s.entry {
        if e.name == "catenoid" || e.name == "associated" {
            out.extend(period_checks(e));
        }
        if e.name == "catenoid" {
            out.extend(neumann_checks(e.h));
        }
    }
    (out, None)
}

/// `∮_{|z|=1} (χ, hψ)` for the catenoid sections and three unit `h`.
fn period_checks(e: &CatalogEntry) -> Vec<Check> {
    let w = &e.weierstrass.charts[0];
    let g0 = e.g.unwrap_or(C64::new(1.0, 0.0));
    let base = w.psi.map(|_, p| Q::from_complex(1.0 / g0) * p);
    let hs = [("1", C64::new(1.0, 0.0)), ("i", C64::new(0.0, 1.0)), ("e^{iπ/4}", C64::from_polar(1.0, PI / 4.0))];
    hs.iter()
        .map(|(label, h)| {
            let psi = base.map(|_, p| Q::from_complex(*h) * p);
            let form = pairing10(&w.chi, &psi);
            let id = format!("darboux.period.{label}");
            match loop_integral((&form.dz, &form.dzbar), Circle { center: C64::new(0.0, 0.0), radius: 1.0 }) {
                Ok(p) => {
                    let expected = -4.0 * PI * h.im;
                    let off = (p - Q::new(0.0, expected, 0.0, 0.0)).norm();
                    let mut c = close(id, "i-part of ∮ (χ, hψ) over |z| = 1 against −4π Im h", p.x, expected, 0.01 * 4.0 * PI);
                    c.pass &= off <= 0.01 * 4.0 * PI;
                    c
                }
                Err(err) => failed(id, "period integral", err),
            }
        })
        .collect()
}

/// The resolvent on the annulus `0.7 ≤ |z| ≤ 1.4`, and its failure for a
/// potential ten times as large on the disk of radius 3.
fn neumann_checks(h: f64) -> Vec<Check> {
    let forms = catenoid_forms();
    let g = Arc::new(ChartGrid::annulus(C64::new(0.0, 0.0), 0.7, 1.4, h));
    let v = QField::from_fn(&g, |z| (forms.v)(z));
    let seed = QField::constant(&g, (forms.upsilon)(C64::new(1.0, 0.0)));
    let mut out = vec![match neumann_resolve(&v, &seed) {
        Ok((_, rep)) => small("darboux.neumann_residual", "‖∂̄ξ − Vξ‖/‖ξ‖ for the catenoid potential", CheckKind::Residual, rep.residual, 5e-2),
        Err(e) => failed("darboux.neumann_residual", "Neumann series", e),
    }];
    let g = Arc::new(ChartGrid::disk(C64::new(0.0, 0.0), 3.0, h.max(0.05)));
    let v = QField::from_fn(&g, |z| (forms.v)(z) * 10.0);
    let diverges = matches!(neumann_resolve(&v, &QField::constant(&g, Q::one())), Err(FieldError::NoConvergence { .. }));
    out.push(bound("darboux.neumann_diverges", "Neumann series reports no convergence for 10·V", diverges as u8 as f64, diverges));
    out
}

fn energy_suite(s: &Subject) -> SuiteOut {
    let mut out = vec![];
    let ww = s.weierstrass.as_ref().map(willmore_w);
    let wk = s.kodaira.as_ref().filter(|_| s.compact()).map(|k| willmore_k(k, s.deg));
    let expected = s.entry.as_ref().map(|e| e.expected_willmore);
    let rel = match s.entry.as_ref().map(|e| e.name.as_str()) {
        Some("inverted_catenoid") => 0.02,
        _ => 0.01,
    };
    for (id, desc, v) in [("energy.willmore_w", "4‖U⁻‖²", ww), ("energy.willmore_k", "4π deg E + 4‖V⁻‖²", wk)] {
        let Some(v) = v else { continue };
        out.push(match expected {
            Some(x) => close(id, desc, v, x, rel * x),
            None => info(id, desc, v),
        });
    }
    if let (Some(a), Some(b)) = (ww, wk) {
        let d = (a - b).abs() / a.abs().max(b.abs()).max(1e-300);
        out.push(small("energy.forms_agree", "relative gap of the two Willmore forms", CheckKind::Residual, d, 0.02));
    }
    if s.compact() {
        if let Some(k) = &s.kodaira {
            let v2: f64 = k.charts.iter().map(|c| c.v.minus().l2_norm_sq_in(c.region)).sum();
            let ex = s.entry.as_ref().map(|e| (e.expected_willmore / (4.0 * PI) - e.deg as f64) * PI);
            out.push(match ex {
                Some(x) => close("energy.v_minus_norm", "‖V⁻‖² over P¹", v2, x, 0.01 * x.max(PI)),
                None => info("energy.v_minus_norm", "‖V⁻‖² over P¹", v2),
            });
        }
    }
    let skip = (!s.compact()).then(|| "surface is not compact: only the Weierstrass form over the sampled chart is reported".to_string());
    (out, skip)
}

fn isothermic_suite(s: &Subject) -> SuiteOut {
    let (Some(k), Some(w)) = (&s.kodaira, &s.weierstrass) else { return (vec![], Some("needs Kodaira and Weierstrass data".into())) };
    let mut out = vec![];
    match isothermic_residual(k, w) {
        Ok(r) => {
            for (ci, r) in r.iter().enumerate() {
                let id = format!("isothermic.coordinate.{ci}");
                let desc = "‖V′ − V‖/‖V‖: zero for a curvature-line coordinate";
                out.push(match s.entry.as_ref().map(|e| e.name.as_str()) {
                    Some("sphere") => small(id, desc, CheckKind::Residual, *r, 1e-5),
                    _ => info(id, desc, *r),
                });
            }
        }
        Err(e) => out.push(failed("isothermic.coordinate", "V′", e)),
    }
    if let Some(pair) = s.entry.as_ref().and_then(|e| e.dual_pair.as_ref()) {
        match dual_residual(k, pair) {
            Ok(r) => out.push(small("isothermic.dual_pair", "sup |υ*ῡ + φ*φ̄| relative", CheckKind::ClosedForm, r, 1e-8)),
            Err(e) => out.push(failed("isothermic.dual_pair", "dual pair", e)),
        }
        match dual_normals(k, pair) {
            Ok(r) => out.push(small("isothermic.dual_normals", "sup |N_G + N_F| and |R_G + R_F|", CheckKind::Residual, r.left.max(r.right), FD_TOL)),
            Err(e) => out.push(failed("isothermic.dual_normals", "dual normals", e)),
        }
    }
    (out, None)
}

fn constrained_suite(s: &Subject) -> SuiteOut {
    let Some(e) = &s.entry else { return (vec![], Some("multipliers are only known for catalog surfaces".into())) };
    let Some(pair) = &e.multipliers else { return (vec![], Some(format!("no multipliers recorded for {}", e.name))) };
    let mut out = vec![];
    match constrained_residual(&e.kodaira, pair) {
        Ok(r) => out.push(small("constrained.residual", "‖V⁻ − (υ*,υ) − (φ*,φ)‖/‖V⁻‖", CheckKind::Residual, r, 5e-2)),
        Err(err) => out.push(failed("constrained.residual", "certificate", err)),
    }
    if e.name == "catenoid" {
        match holo_residual(&pair.upsilon_star, e.kodaira.charts[0].v.field(), true) {
            Ok(r) => out.push(small("constrained.dagger_holomorphic", "‖(∂̄ − V†)υ*‖", CheckKind::Residual, r, FD_TOL)),
            Err(err) => out.push(failed("constrained.dagger_holomorphic", "V†-holomorphicity", err)),
        }
        match transform_multipliers(pair, &MoebiusCoeffs::sphere_map()) {
            Ok(t) => {
                let mut worst: f64 = 0.0;
                for i in pair.upsilon_star.included() {
                    let us = pair.upsilon_star.values[i];
                    worst = worst.max((t.upsilon_star.values[i] - us * Q::i() * 0.5).norm());
                    worst = worst.max((t.phi_star.values[i] - us * 0.5).norm());
                }
                out.push(small("constrained.transformed_closed_form", "sup |(υ̃*, φ̃*) − (½υ*i, ½υ*)|", CheckKind::ClosedForm, worst, 1e-14));
            }
            Err(err) => out.push(failed("constrained.transformed_closed_form", "transformed multipliers", err)),
        }
        let g = Arc::new(ChartGrid::p1_chart(1.5, s.h));
        for a in [0.0, 1.0, -0.5, 2.0] {
            let f = catenoid_forms();
            let (ups, phi) = (f.upsilon.clone(), f.phi.clone());
            let c = |z: C64| Q::from_complex(1.0 / (z * z));
            let fam = MultiplierPair {
                upsilon_star: QField::from_fn(&g, move |z| catenoid_upsilon_star(z) + c(z) * phi(z) * a),
                phi_star: QField::from_fn(&g, move |z| c(z) * ups(z) * a),
            };
            let id = format!("constrained.pole_at_end.{a}");
            let r = transform_multipliers(&fam, &MoebiusCoeffs::sphere_map())
                .map_err(|e| e.to_string())
                .and_then(|t| root_order(&t.upsilon_star, C64::new(0.0, 0.0)).map_err(|e| e.to_string()));
            out.push(match r {
                Ok(n) => bound(id, "order of υ̃* at z = 0 for the multipliers (υ* + a z⁻²φ, a z⁻²υ); negative is a pole", n as f64, n < 0),
                Err(err) => failed(id, "root order", err),
            });
        }
    }
    (out, None)
}

pub fn dirac_suite(h: f64) -> Vec<Check> {
    let (ls, rs) = dirac_p1::default_lattice();
    let rows = dirac_p1::bound_suite(&ls, &rs);
    let worst = |m: fn(&dirac_p1::BoundRow) -> f64| rows.iter().map(m).fold(f64::INFINITY, f64::min);
    let positive = rows.iter().all(|r| r.f > 0.0 && r.slope > 0.0);
    let finf = dirac_p1::finfty_forms(1.0);
    let blow = dirac_p1::blowup_limit(1.0);
    let weak = dirac_p1::weak_l2_check(h.min(0.01));
    vec![
        bound("dirac.bound_i", "min margin of F_λ(r) ≤ (1/π)e^{−2|λ|atan r}·ln((√(1+r²)+1)/(√(1+r²)−1)) over 40×40", worst(|r| r.margin_i), worst(|r| r.margin_i) >= 0.0),
        bound("dirac.bound_ii", "min margin of r|λ|F_λ(r) ≤ 1/(2e) over 40×40", worst(|r| r.margin_ii), worst(|r| r.margin_ii) >= 0.0),
        bound("dirac.bound_iv", "min margin of −r(1+r²)F_λ′(r) ≤ (2/π)b(|λ|, atan r) over 40×40", worst(|r| r.margin_iv), worst(|r| r.margin_iv) >= 0.0),
        bound("dirac.positivity", "F_λ > 0 and F_λ′ < 0 over 40×40", positive as u8 as f64, positive),
        close("dirac.finfty_bessel", "F_∞(1) against (2/π)K₀(2)", finf.radial, 2.0 / PI * BESSEL_K0_2, 1e-6),
        small("dirac.finfty_forms", "relative gap of the two integral forms of F_∞(1)", CheckKind::Residual, finf.rel_diff(), 1e-8),
        close("dirac.blowup", "Richardson limit of F_λ(1/λ) against F_∞(1)", blow.extrapolated, blow.limit, 1e-3),
        close("dirac.fubini_study_area", "Fubini–Study area of P¹", dirac_p1::fubini_study_area(h.min(0.02)), PI, 0.005 * PI),
        bound("dirac.weak_l2", "sup t·μ{√(1+|z|²)/|z| > t}^{1/2} ≤ √π (5% slack)", weak.sup, weak.sup <= weak.exact * 1.05),
    ]
}

fn plucker_suite(s: &Subject) -> SuiteOut {
    if !s.compact() {
        return (vec![], Some("Li–Yau and Plücker checks need a compact surface".into()));
    }
    let (Some(w), Some(k)) = (&s.weierstrass, &s.kodaira) else { return (vec![], Some("needs Kodaira and Weierstrass data".into())) };
    let f = k.surface();
    let mut out = vec![];
    match liyau_pluecker_check(&f, w, Some(k), s.deg, Q::i()) {
        Ok(r) => {
            let expected = s.entry.as_ref().map(|e| (e.expected_willmore / (4.0 * PI)).round());
            out.push(match expected {
                Some(m) => close("plucker.preimages", "Σ(1 + ord χ + ord ψ) over F⁻¹(i)", r.multiplicity as f64, m, 0.0),
                None => info("plucker.preimages", "Σ(1 + ord χ + ord ψ) over F⁻¹(i)", r.multiplicity as f64),
            });
            out.push(info("plucker.bound", "4π times the multiplicity", r.bound));
            out.push(bound("plucker.li_yau", "W ≥ 4π·multiplicity (2% slack)", r.willmore, r.holds));
            if let Some(gap) = r.gap {
                let sharp = s.entry.as_ref().is_some_and(|e| (e.expected_willmore - r.bound).abs() < 1e-9);
                if sharp {
                    out.push(small("plucker.sharp", "|W − bound|/bound", CheckKind::Residual, gap.abs(), 0.02));
                }
            }
            if let (Some(l), Some(rhs)) = (r.pluecker_lhs, r.pluecker_rhs) {
                out.push(bound("plucker.inequality", "‖V⁻‖²/π ≥ 2(1 − deg E)", l - rhs, l + 1e-9 >= rhs));
            }
        }
        Err(e) => out.push(failed("plucker.li_yau", "Li–Yau check", e)),
    }
    (out, None)
}
