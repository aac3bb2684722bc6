//! Kodaira data `(V, υ, φ)` and Weierstrass data `(U, B, χ, ψ)` on one or
//! two charts, and the Darboux transformation between them.
//!
//! On P¹ chart 0 is the `z₁` chart and chart 1 the `z₂ = 1/z₁` chart;
//! sections of `E` glue by `ξ₂(z₂) = f₂₁(z₂) ξ₁(1/z₂)`.

use std::collections::VecDeque;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conformal::{normals_from_df, ConformalError, SurfaceChart};
use crate::field::{
    loop_integral, neumann_resolve_right, partials, wirtinger, ChartGrid, Circle, Domain, FieldError, GridSpec,
    NeumannReport, Potential01, QField, Region,
};
use crate::Q;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RepError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Conformal(#[from] ConformalError),
    #[error("projection of the intertwiner solution vanishes for every seed")]
    TrivialProjection,
    #[error("υ⁻¹iυ differs from the left normal by {0:.3e}")]
    InconsistentNormal(f64),
    #[error("υ has {0} root(s) on included nodes")]
    RootInUpsilon(usize),
    #[error("form has period {period:.3e} on a test cycle (tolerance {tol:.3e})")]
    NonzeroPeriods { period: f64, tol: f64 },
    #[error("form fails the local closedness check (relative loop residual {0:.3e})")]
    NotClosed(f64),
    #[error("cocycle vanishes on the unit circle")]
    ZeroOnCircle,
    #[error("charts do not match: {0}")]
    ChartMismatch(String),
    #[error("bundle rejected: {0}")]
    BadBundle(String),
}

/// Transition function `f₂₁(z₂) = c·z₂ⁿ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cocycle {
    pub coeff: C64,
    pub power: i32,
}

impl Cocycle {
    pub fn monomial(power: i32) -> Self {
        Cocycle { coeff: C64::new(1.0, 0.0), power }
    }

    pub fn eval(&self, z2: C64) -> C64 {
        self.coeff * z2.powi(self.power)
    }

    /// Cocycle of the pull-back along `z ↦ zⁿ`.
    pub fn compose_power(&self, n: i32) -> Self {
        Cocycle { coeff: self.coeff, power: self.power * n }
    }
}

#[derive(Clone, Debug)]
pub struct KChart {
    pub v: Potential01,
    pub upsilon: QField,
    pub phi: QField,
    /// Part of the chart that belongs to the fundamental region.
    pub region: Region,
}

#[derive(Clone, Debug)]
pub struct KodairaData {
    pub charts: Vec<KChart>,
    pub cocycle: Option<Cocycle>,
}

#[derive(Clone, Debug)]
pub struct WChart {
    pub u: Potential01,
    pub b: QField,
    pub chi: QField,
    pub psi: QField,
    pub region: Region,
}

#[derive(Clone, Debug)]
pub struct WeierstrassData {
    pub charts: Vec<WChart>,
    pub cocycle: Option<Cocycle>,
}

impl KodairaData {
    pub fn single(chart: KChart) -> Self {
        KodairaData { charts: vec![chart], cocycle: None }
    }

    /// `F = υ⁻¹φ` per chart.
    pub fn surface(&self) -> Vec<QField> {
        self.charts.iter().map(|c| c.upsilon.zip(&c.phi, |_, u, p| u.inv() * p)).collect()
    }
}

pub fn dagger(q: Q) -> Q {
    Q::k() * q.conj() * Q::k()
}

/// `‖∂̄ξ − Wξ‖₂ / max(‖ξ‖₂, ε)` with `W = V` or `V†`.
pub fn holo_residual(xi: &QField, v: &QField, use_dagger: bool) -> Result<f64, FieldError> {
    let (_, dbar) = wirtinger(xi)?;
    let r = dbar.zip3(v, xi, |_, d, v, x| d - if use_dagger { dagger(v) * x } else { v * x });
    let denom = xi.clone().restrict(&r.mask).l2_norm_sq().sqrt();
    Ok(r.l2_norm_sq().sqrt() / denom.max(1e-300))
}

// ---------------------------------------------------------------------------
// Intertwiner

#[derive(Clone, Debug)]
pub struct Intertwiner {
    pub v: Potential01,
    pub upsilon: QField,
    pub xi: QField,
    pub neumann: NeumannReport,
}

/// Builds a local holomorphic trivialisation `υ` with `υ⁻¹iυ = N`.
///
/// Solves `∂̄ξ = ξW` with `W = −¼(N N_x + N_y)` by a Neumann series, projects
/// `υ = ½(ξ − iξN)` and sets `V = −υ·¼(N N_x − N_y)·υ⁻¹`.
pub fn solve_intertwiner(n: &QField, seed: Option<Q>) -> Result<Intertwiner, RepError> {
    let (nx, ny) = partials(n)?;
    let w = n.zip3(&nx, &ny, |_, n, nx, ny| -((n * nx + ny) * 0.25));
    let g = &n.grid;
    let centre = n
        .included()
        .min_by(|&a, &b| {
            let da = (g.node(a) - g.domain.center()).norm();
            let db = (g.node(b) - g.domain.center()).norm();
            da.partial_cmp(&db).unwrap()
        })
        .ok_or(RepError::TrivialProjection)?;
    let n0 = n.values[centre];
    let project = |a: Q| (a - Q::i() * a * n0) * 0.5;
    let mut candidates = vec![Q::one(), Q::j(), Q::k(), Q::i()];
    if let Some(s) = seed {
        candidates.insert(0, s);
    }
    for alpha in candidates {
        if project(alpha).norm() < 0.25 * alpha.norm() {
            continue;
        }
        let seed_field = QField::constant(g, alpha).restrict(&n.mask);
        let (xi, rep) = neumann_resolve_right(&w, &seed_field)?;
        let upsilon = xi.zip(n, |_, x, n| (x - Q::i() * x * n) * 0.5);
        let sup = upsilon.sup_norm();
        let min = upsilon.included().map(|i| upsilon.values[i].norm()).fold(f64::INFINITY, f64::min);
        if !(min > 1e-8 * sup) {
            continue;
        }
        let v = upsilon.zip3(&nx, &ny, |z, u, nx, ny| {
            let nn = n.at(z).unwrap_or(Q::zero());
            -(u * ((nn * nx - ny) * 0.25) * u.inv())
        });
        return Ok(Intertwiner { v: Potential01(v), upsilon, xi, neumann: rep });
    }
    Err(RepError::TrivialProjection)
}

// ---------------------------------------------------------------------------
// Kodaira representation

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KodairaReport {
    pub normal_residual: f64,
    pub upsilon_residual: f64,
    pub phi_residual: f64,
}

/// Completes `(V, υ)` to Kodaira data of `s` with `φ = υF`.
pub fn kodaira_of(s: &SurfaceChart, upsilon: &QField, v: &Potential01, tol: f64) -> Result<(KodairaData, KodairaReport), RepError> {
    let normals = normals_from_df(s)?;
    let dev = upsilon.zip(&normals.n, |_, u, n| u.inv() * Q::i() * u - n).sup_norm();
    if dev > tol {
        return Err(RepError::InconsistentNormal(dev));
    }
    let phi = upsilon.zip(&s.f, |_, u, f| u * f);
    let report = KodairaReport {
        normal_residual: dev,
        upsilon_residual: holo_residual(upsilon, v.field(), false)?,
        phi_residual: holo_residual(&phi, v.field(), false)?,
    };
    let chart = KChart { v: v.clone(), upsilon: upsilon.clone(), phi, region: Region::Whole };
    Ok((KodairaData::single(chart), report))
}

// ---------------------------------------------------------------------------
// (1,0) pairing

/// `conj(χ) j dz ψ` written three ways: the middle factor `conj(χ) j ψ`
/// and the coefficients of `dz` and `dz̄` with the differentials moved to
/// the left.
#[derive(Clone, Debug)]
pub struct Form10 {
    pub middle: QField,
    pub dz: QField,
    pub dzbar: QField,
}

pub fn pairing10_at(chi: Q, psi: Q) -> (Q, Q, Q) {
    let x = chi.conj() * Q::j();
    let (a, b) = x.to_pair();
    (x * psi, Q::from_complex(a) * psi, Q::from_complex(b) * Q::j() * psi)
}

pub fn pairing10(chi: &QField, psi: &QField) -> Form10 {
    Form10 {
        middle: chi.zip(psi, |_, c, p| pairing10_at(c, p).0),
        dz: chi.zip(psi, |_, c, p| pairing10_at(c, p).1),
        dzbar: chi.zip(psi, |_, c, p| pairing10_at(c, p).2),
    }
}

// ---------------------------------------------------------------------------
// Darboux transformation

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DarbouxReport {
    /// Per chart: `sup |(−(∂υ)υ⁻¹ − B)⁺|`, the part not absorbed by `B`.
    pub plus_residual: Vec<f64>,
    /// Per chart: `sup |(χ,ψ) − dF| / sup |dF|` on both Wirtinger components.
    pub pairing_residual: Vec<f64>,
}

/// Below this `|υ|` a node counts as a root.
pub const ROOT_THRESHOLD: f64 = 1e-8;

pub fn darboux(k: &KodairaData) -> Result<(WeierstrassData, DarbouxReport), RepError> {
    let mut charts = vec![];
    let mut report = DarbouxReport { plus_residual: vec![], pairing_residual: vec![] };
    for c in &k.charts {
        let ups = &c.upsilon;
        let roots = ups.included().filter(|&i| ups.values[i].norm() < ROOT_THRESHOLD).count();
        if roots > 0 {
            return Err(RepError::RootInUpsilon(roots));
        }
        let log_abs = ups.map(|_, u| Q::real(0.5 * u.norm_sq().ln()));
        let (dlog, _) = wirtinger(&log_abs)?;
        let b = dlog.scale(-2.0);
        let (dups, _) = wirtinger(ups)?;
        let full = dups.zip3(ups, &b, |_, d, u, b| -(d * u.inv()) - b);
        let u = full.minus();
        let chi = ups.map(|_, u| (Q::j() * u).conj().inv());
        let (dphi, _) = wirtinger(&c.phi)?;
        let psi = dphi.zip3(&b, &u, |z, d, b, u| {
            let p = c.phi.at(z).unwrap_or(Q::zero());
            d + b * p + u * p
        });
        report.plus_residual.push(full.plus().sup_norm());
        let f = ups.zip(&c.phi, |_, u, p| u.inv() * p);
        let (df, dbf) = wirtinger(&f)?;
        let form = pairing10(&chi, &psi);
        let scale = df.sup_norm().max(dbf.sup_norm()).max(1e-300);
        let r = form.dz.sub(&df).sup_norm().max(form.dzbar.sub(&dbf).sup_norm()) / scale;
        report.pairing_residual.push(r);
        charts.push(WChart { u: Potential01(u), b, chi, psi, region: c.region });
    }
    Ok((WeierstrassData { charts, cocycle: k.cocycle }, report))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseReport {
    /// Largest relative loop residual over the random small loops.
    pub closedness: f64,
    /// `|∮ dF|` over the test cycle, when the chart has one.
    pub period: Option<f64>,
    /// `‖(∂̄ − V)υ‖`, `‖(∂̄ − V)φ‖` per chart with `V = (∂̄υ)υ⁻¹`.
    pub upsilon_residual: Vec<f64>,
    pub phi_residual: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct InverseDarboux {
    pub kodaira: KodairaData,
    pub f: Vec<QField>,
    pub report: InverseReport,
}

/// Relative period tolerance on test cycles.
pub const PERIOD_TOL: f64 = 1e-2;
/// Relative tolerance of the small-loop closedness check.
pub const CLOSEDNESS_TOL: f64 = 1e-2;

/// Trapezoidal staircase integration of `dF = (χ,ψ)` from `basepoint`.
fn integrate_chart(fx: &QField, fy: &QField, start: usize, f0: Q) -> QField {
    let g = &fx.grid;
    let h = g.h;
    let ok = |i: usize| fx.mask[i] && fy.mask[i];
    let mut values = vec![Q::new(f64::NAN, f64::NAN, f64::NAN, f64::NAN); g.len()];
    let mut seen = vec![false; g.len()];
    let mut queue = VecDeque::new();
    values[start] = f0;
    seen[start] = true;
    queue.push_back(start);
    while let Some(i) = queue.pop_front() {
        let (ix, iy) = (i % g.nx, i / g.nx);
        // x steps first so paths run along rows, then up columns
        let steps = [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)];
        for (sx, sy) in steps {
            let (jx, jy) = (ix as isize + sx, iy as isize + sy);
            if jx < 0 || jy < 0 || jx >= g.nx as isize || jy >= g.ny as isize {
                continue;
            }
            let j = g.index(jx as usize, jy as usize);
            if seen[j] || !ok(j) {
                continue;
            }
            let d = if sx != 0 {
                (fx.values[i] + fx.values[j]) * (0.5 * h * sx as f64)
            } else {
                (fy.values[i] + fy.values[j]) * (0.5 * h * sy as f64)
            };
            values[j] = values[i] + d;
            seen[j] = true;
            queue.push_back(j);
        }
    }
    QField::from_values(g, values)
}

/// Largest relative residual of `∮ dF` around random small squares.
fn closedness(fx: &QField, fy: &QField, seed: u64) -> f64 {
    let g = &fx.grid;
    let ok = |i: usize| fx.mask[i] && fy.mask[i];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut found = 0;
    for _ in 0..2000 {
        if found == 8 {
            break;
        }
        let side = rng.gen_range(4..=10usize);
        if g.nx <= side + 1 || g.ny <= side + 1 {
            break;
        }
        let x0 = rng.gen_range(0..g.nx - side);
        let y0 = rng.gen_range(0..g.ny - side);
        let mut path = vec![];
        for t in 0..side {
            path.push((x0 + t, y0, 1.0, 0.0));
        }
        for t in 0..side {
            path.push((x0 + side, y0 + t, 0.0, 1.0));
        }
        for t in 0..side {
            path.push((x0 + side - t, y0 + side, -1.0, 0.0));
        }
        for t in 0..side {
            path.push((x0, y0 + side - t, 0.0, -1.0));
        }
        if !path.iter().all(|&(x, y, _, _)| ok(g.index(x, y))) {
            continue;
        }
        found += 1;
        let mut sum = Q::zero();
        let mut mag = 0.0;
        for &(x, y, dx, dy) in &path {
            let i = g.index(x, y);
            let j = g.index((x as f64 + dx) as usize, (y as f64 + dy) as usize);
            let seg = if dx != 0.0 {
                (fx.values[i] + fx.values[j]) * (0.5 * g.h * dx)
            } else {
                (fy.values[i] + fy.values[j]) * (0.5 * g.h * dy)
            };
            sum += seg;
            mag += seg.norm();
        }
        worst = worst.max(sum.norm() / mag.max(1e-300));
    }
    worst
}

/// Test cycle of a chart with a hole: the mid-radius circle of an annulus.
fn test_cycle(g: &ChartGrid) -> Option<Circle> {
    match g.domain {
        Domain::Annulus { center, inner, outer } => Some(Circle { center, radius: 0.5 * (inner + outer) }),
        _ if !g.punctures.is_empty() => Some(Circle { center: g.punctures[0], radius: 20.0 * g.h }),
        _ => None,
    }
}

/// Integrates `dF = (χ,ψ)` with `F(basepoint) = F0` and rebuilds Kodaira
/// data with `υ = −conj(jχ)⁻¹`, `φ = υF`.
///
/// Further charts are integrated from `1/basepoint` with the value already
/// found there, so `basepoint` must lie in the overlap of P¹ charts.
pub fn inverse_darboux(w: &WeierstrassData, basepoint: C64, f0: Q) -> Result<InverseDarboux, RepError> {
    let mut charts = vec![];
    let mut fs = vec![];
    let mut report = InverseReport { closedness: 0.0, period: None, upsilon_residual: vec![], phi_residual: vec![] };
    for (ci, c) in w.charts.iter().enumerate() {
        let form = pairing10(&c.chi, &c.psi);
        let fx = form.dz.add(&form.dzbar);
        let fy = form.dz.zip(&form.dzbar, |_, a, b| Q::i() * (a - b));
        let closed = closedness(&fx, &fy, 0x5eed + ci as u64);
        report.closedness = report.closedness.max(closed);
        if closed > CLOSEDNESS_TOL {
            return Err(RepError::NotClosed(closed));
        }
        if let Some(cycle) = test_cycle(&c.chi.grid) {
            let p = loop_integral((&form.dz, &form.dzbar), cycle)?;
            let n = 256;
            let scale: f64 = (0..n)
                .filter_map(|s| {
                    let z = cycle.center + C64::from_polar(cycle.radius, 2.0 * std::f64::consts::PI * s as f64 / n as f64);
                    fx.interpolate_cubic(z).map(|v| v.norm())
                })
                .sum::<f64>()
                * 2.0
                * std::f64::consts::PI
                * cycle.radius
                / n as f64;
            report.period = Some(report.period.unwrap_or(0.0).max(p.norm()));
            if p.norm() > PERIOD_TOL * scale {
                return Err(RepError::NonzeroPeriods { period: p.norm(), tol: PERIOD_TOL * scale });
            }
        }
        let (start, value) = if ci == 0 {
            (basepoint, f0)
        } else {
            (1.0 / basepoint, f0)
        };
        let idx = c.chi.grid.nearest(start).filter(|&i| fx.mask[i] && fy.mask[i]).ok_or_else(|| {
            RepError::ChartMismatch(format!("basepoint {start} is not an included node of chart {ci}"))
        })?;
        let f = integrate_chart(&fx, &fy, idx, value);
        let ups = c.chi.map(|_, x| -(Q::j() * x).conj().inv());
        let phi = ups.zip(&f, |_, u, f| u * f);
        let (_, dbar) = wirtinger(&ups)?;
        let v = dbar.zip(&ups, |_, d, u| d * u.inv());
        report.upsilon_residual.push(holo_residual(&ups, &v, false)?);
        report.phi_residual.push(holo_residual(&phi, &v, false)?);
        charts.push(KChart { v: Potential01(v), upsilon: ups, phi, region: c.region });
        fs.push(f);
    }
    Ok(InverseDarboux { kodaira: KodairaData { charts, cocycle: w.cocycle }, f: fs, report })
}

// ---------------------------------------------------------------------------
// Line bundles

/// Winding number of the cocycle around `|z| = 1` from 512 argument increments.
pub fn bundle_degree<F: Fn(C64) -> C64>(cocycle: F) -> Result<i32, RepError> {
    let n = 512;
    let at = |s: usize| cocycle(C64::from_polar(1.0, 2.0 * std::f64::consts::PI * s as f64 / n as f64));
    let mut total = 0.0;
    let mut prev = at(0);
    for s in 1..=n {
        let cur = at(s % n);
        if prev.norm() < 1e-12 || cur.norm() < 1e-12 || !cur.is_finite() {
            return Err(RepError::ZeroOnCircle);
        }
        total += (cur / prev).arg();
        prev = cur;
    }
    Ok((total / (2.0 * std::f64::consts::PI)).round() as i32)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub nodes: usize,
    pub upsilon: f64,
    pub phi: f64,
    pub v: f64,
}

/// Compares the two P¹ charts on the band `0.8 ≤ |z₁| ≤ 1.25`: relative sup
/// deviations of `υ₂ = f₂₁υ₁`, `φ₂ = f₂₁φ₁` and
/// `V₂ = f₂₁·conj(dz₁/dz₂)·V₁·f₂₁⁻¹`.
pub fn overlap_residual(k: &KodairaData) -> Result<OverlapReport, RepError> {
    let (c1, c2) = match k.charts.as_slice() {
        [a, b] => (a, b),
        _ => return Err(RepError::ChartMismatch("overlap check needs two charts".into())),
    };
    let cocycle = k.cocycle.ok_or_else(|| RepError::ChartMismatch("missing cocycle".into()))?;
    let mut rep = OverlapReport { nodes: 0, upsilon: 0.0, phi: 0.0, v: 0.0 };
    let (mut su, mut sp, mut sv) = (0.0f64, 0.0f64, 0.0f64);
    for i in c1.upsilon.included() {
        let z1 = c1.upsilon.grid.node(i);
        let r = z1.norm();
        if !(0.8..=1.25).contains(&r) {
            continue;
        }
        let z2 = 1.0 / z1;
        let (Some(u1), Some(p1), Some(v1)) = (c1.upsilon.get(i), c1.phi.get(i), c1.v.0.get(i)) else { continue };
        let (Some(u2), Some(p2), Some(v2)) =
            (c2.upsilon.interpolate_cubic(z2), c2.phi.interpolate_cubic(z2), c2.v.0.interpolate_cubic(z2))
        else {
            continue;
        };
        let f = Q::from_complex(cocycle.eval(z2));
        let jac = Q::from_complex((-1.0 / (z2 * z2)).conj());
        rep.nodes += 1;
        rep.upsilon = rep.upsilon.max((u2 - f * u1).norm());
        rep.phi = rep.phi.max((p2 - f * p1).norm());
        rep.v = rep.v.max((v2 - f * jac * v1 * f.inv()).norm());
        su = su.max(u2.norm());
        sp = sp.max(p2.norm());
        sv = sv.max(v2.norm());
    }
    if rep.nodes == 0 {
        return Err(RepError::ChartMismatch("charts share no sampled overlap".into()));
    }
    rep.upsilon /= su.max(1e-300);
    rep.phi /= sp.max(1e-300);
    rep.v /= sv.max(1.0);
    Ok(rep)
}

// ---------------------------------------------------------------------------
// JSON bundles

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDto {
    /// Row-major node values; `null` at excluded nodes.
    pub values: Vec<Option<[f64; 4]>>,
}

impl FieldDto {
    pub fn from_field(f: &QField) -> Self {
        FieldDto { values: (0..f.len()).map(|i| f.get(i).map(|q| q.to_array())).collect() }
    }

    pub fn to_field(&self, grid: &Arc<ChartGrid>) -> Result<QField, RepError> {
        if self.values.len() != grid.len() {
            return Err(RepError::BadBundle(format!("field has {} values, grid has {} nodes", self.values.len(), grid.len())));
        }
        let nan = Q::new(f64::NAN, f64::NAN, f64::NAN, f64::NAN);
        let values = self.values.iter().map(|v| v.map(Q::from_array).unwrap_or(nan)).collect();
        Ok(QField::from_values(grid, values))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartDto {
    pub grid: GridSpec,
    #[serde(default)]
    pub region: Region,
    pub fields: std::collections::BTreeMap<String, FieldDto>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum BundleKind {
    Kodaira,
    Weierstrass,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bundle {
    pub schema: u32,
    pub kind: BundleKind,
    #[serde(default)]
    pub name: Option<String>,
    pub charts: Vec<ChartDto>,
    #[serde(default)]
    pub cocycle: Option<Cocycle>,
}

fn chart_dto(grid: &Arc<ChartGrid>, region: Region, fields: &[(&str, &QField)]) -> ChartDto {
    ChartDto {
        grid: grid.spec(),
        region,
        fields: fields.iter().map(|(n, f)| (n.to_string(), FieldDto::from_field(f))).collect(),
    }
}

impl Bundle {
    pub fn from_kodaira(name: Option<String>, k: &KodairaData) -> Self {
        let charts = k
            .charts
            .iter()
            .map(|c| chart_dto(&c.upsilon.grid, c.region, &[("v", c.v.field()), ("upsilon", &c.upsilon), ("phi", &c.phi)]))
            .collect();
        Bundle { schema: SCHEMA_VERSION, kind: BundleKind::Kodaira, name, charts, cocycle: k.cocycle }
    }

    pub fn from_weierstrass(name: Option<String>, w: &WeierstrassData) -> Self {
        let charts = w
            .charts
            .iter()
            .map(|c| {
                chart_dto(&c.chi.grid, c.region, &[("u", c.u.field()), ("b", &c.b), ("chi", &c.chi), ("psi", &c.psi)])
            })
            .collect();
        Bundle { schema: SCHEMA_VERSION, kind: BundleKind::Weierstrass, name, charts, cocycle: w.cocycle }
    }

    pub fn from_json(text: &str) -> Result<Self, RepError> {
        let b: Bundle = serde_json::from_str(text).map_err(|e| RepError::BadBundle(e.to_string()))?;
        if b.schema != SCHEMA_VERSION {
            return Err(RepError::BadBundle(format!("unsupported schema {}", b.schema)));
        }
        if b.charts.is_empty() || b.charts.len() > 2 {
            return Err(RepError::BadBundle("expected one or two charts".into()));
        }
        Ok(b)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("bundle serializes")
    }

    fn take(c: &ChartDto, grid: &Arc<ChartGrid>, name: &str) -> Result<QField, RepError> {
        c.fields.get(name).ok_or_else(|| RepError::BadBundle(format!("missing field {name:?}")))?.to_field(grid)
    }

    fn check_names(c: &ChartDto, names: &[&str]) -> Result<(), RepError> {
        for k in c.fields.keys() {
            if !names.contains(&k.as_str()) {
                return Err(RepError::BadBundle(format!("unknown field {k:?}")));
            }
        }
        Ok(())
    }

    pub fn to_kodaira(&self) -> Result<KodairaData, RepError> {
        if self.kind != BundleKind::Kodaira {
            return Err(RepError::BadBundle("not a Kodaira bundle".into()));
        }
        let mut charts = vec![];
        for c in &self.charts {
            Self::check_names(c, &["v", "upsilon", "phi"])?;
            let grid = Arc::new(ChartGrid::from(c.grid.clone()));
            charts.push(KChart {
                v: Potential01(Self::take(c, &grid, "v")?),
                upsilon: Self::take(c, &grid, "upsilon")?,
                phi: Self::take(c, &grid, "phi")?,
                region: c.region,
            });
        }
        Ok(KodairaData { charts, cocycle: self.cocycle })
    }

    pub fn to_weierstrass(&self) -> Result<WeierstrassData, RepError> {
        if self.kind != BundleKind::Weierstrass {
            return Err(RepError::BadBundle("not a Weierstrass bundle".into()));
        }
        let mut charts = vec![];
        for c in &self.charts {
            Self::check_names(c, &["u", "b", "chi", "psi"])?;
            let grid = Arc::new(ChartGrid::from(c.grid.clone()));
            charts.push(WChart {
                u: Potential01(Self::take(c, &grid, "u")?),
                b: Self::take(c, &grid, "b")?,
                chi: Self::take(c, &grid, "chi")?,
                psi: Self::take(c, &grid, "psi")?,
                region: c.region,
            });
        }
        Ok(WeierstrassData { charts, cocycle: self.cocycle })
    }
}
