//! Möbius transformations, reflection, the conjugate surface and pullback
//! along holomorphic coverings, acting on Kodaira and Weierstrass data.
//!
//! A Möbius map `F ↦ (Fγ + δ)⁻¹(Fα + β)` acts on Kodaira data by right
//! multiplication of the row `(φ, υ)` with `[[α, γ], [β, δ]]`.

use std::sync::Arc;

use nalgebra::SMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{wirtinger, ChartGrid, Domain, FieldError, Potential01, QField};
use crate::representations::{dagger, pairing10, Cocycle, KChart, KodairaData, WChart, WeierstrassData};
use crate::Q;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("degenerate Möbius coefficients: {0}")]
    Degenerate(String),
    #[error("Fγ + δ vanishes on every node of chart {chart}")]
    HitsInfinity { chart: usize },
    #[error("covering maps {z} outside source chart {chart}")]
    ImageOutsideChart { chart: usize, z: C64 },
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
}

const DEGENERACY_TOL: f64 = 1e-12;

/// Inverse of the right action `x ↦ x·M` on rows `x ∈ H²`.
pub(crate) fn row_action_inverse(m: [[Q; 2]; 2]) -> Option<[[Q; 2]; 2]> {
    let mut a = SMatrix::<f64, 8, 8>::zeros();
    for (r, row) in m.iter().enumerate() {
        for (c, q) in row.iter().enumerate() {
            let rm = q.right_matrix();
            for (i, line) in rm.iter().enumerate() {
                for (j, v) in line.iter().enumerate() {
                    a[(4 * c + i, 4 * r + j)] = *v;
                }
            }
        }
    }
    let sv = a.singular_values();
    if sv.min() <= DEGENERACY_TOL * sv.max() {
        return None;
    }
    let inv = a.try_inverse()?;
    let row = |k: usize| {
        let q = |b: usize| Q::new(inv[(4 * b, 4 * k)], inv[(4 * b + 1, 4 * k)], inv[(4 * b + 2, 4 * k)], inv[(4 * b + 3, 4 * k)]);
        [q(0), q(1)]
    };
    Some([row(0), row(1)])
}

/// Coefficients of `F ↦ (Fγ + δ)⁻¹(Fα + β)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoebiusCoeffs {
    pub alpha: Q,
    pub beta: Q,
    pub gamma: Q,
    pub delta: Q,
}

impl MoebiusCoeffs {
    pub fn new(alpha: Q, beta: Q, gamma: Q, delta: Q) -> Result<Self, TransformError> {
        let m = MoebiusCoeffs { alpha, beta, gamma, delta };
        m.check()?;
        Ok(m)
    }

    pub fn identity() -> Self {
        MoebiusCoeffs { alpha: Q::one(), beta: Q::zero(), gamma: Q::zero(), delta: Q::one() }
    }

    /// `α = δ = i`, `β = γ = 1`: plane to sphere, catenoid to its inversion.
    pub fn sphere_map() -> Self {
        MoebiusCoeffs { alpha: Q::i(), beta: Q::one(), gamma: Q::one(), delta: Q::i() }
    }

    /// Sixteen reals `α, β, γ, δ` in `(w, x, y, z)` order.
    pub fn from_reals(p: &[f64]) -> Result<Self, TransformError> {
        if p.len() != 16 {
            return Err(TransformError::Degenerate(format!("expected 16 reals, got {}", p.len())));
        }
        let q = |k: usize| Q::new(p[4 * k], p[4 * k + 1], p[4 * k + 2], p[4 * k + 3]);
        Self::new(q(0), q(1), q(2), q(3))
    }

    fn scale(&self) -> f64 {
        [self.alpha, self.beta, self.gamma, self.delta].iter().map(|q| q.norm()).fold(0.0, f64::max)
    }

    /// Bijectivity: `α, δ ≠ 0` when `γ = 0`, else `δγ⁻¹α − β ≠ 0`.
    pub fn check(&self) -> Result<(), TransformError> {
        let s = self.scale();
        if !(s > 0.0) || ![self.alpha, self.beta, self.gamma, self.delta].iter().all(|q| q.is_finite()) {
            return Err(TransformError::Degenerate("coefficients vanish or are not finite".into()));
        }
        let eps = DEGENERACY_TOL * s;
        if self.gamma.norm() <= eps {
            if self.alpha.norm() <= eps || self.delta.norm() <= eps {
                return Err(TransformError::Degenerate("γ = 0 needs α, δ ≠ 0".into()));
            }
        } else {
            let d = self.delta * self.gamma.inv() * self.alpha - self.beta;
            if d.norm() <= eps {
                return Err(TransformError::Degenerate("δγ⁻¹α − β = 0".into()));
            }
        }
        Ok(())
    }

    pub fn matrix(&self) -> [[Q; 2]; 2] {
        [[self.alpha, self.gamma], [self.beta, self.delta]]
    }

    pub fn from_matrix(m: [[Q; 2]; 2]) -> Self {
        MoebiusCoeffs { alpha: m[0][0], gamma: m[0][1], beta: m[1][0], delta: m[1][1] }
    }

    /// `(xγ + δ)⁻¹(xα + β)`, `None` at the pole.
    pub fn apply(&self, x: Q) -> Option<Q> {
        let d = x * self.gamma + self.delta;
        if d.norm() <= 1e-14 * (1.0 + x.norm()) * self.scale() {
            return None;
        }
        Some(d.inv() * (x * self.alpha + self.beta))
    }

    pub fn inverse(&self) -> Result<Self, TransformError> {
        row_action_inverse(self.matrix())
            .map(Self::from_matrix)
            .ok_or_else(|| TransformError::Degenerate("coefficient matrix is singular".into()))
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &MoebiusCoeffs) -> Self {
        let (a, b) = (self.matrix(), next.matrix());
        let mut m = [[Q::zero(); 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Self::from_matrix(m)
    }
}

/// Whether the map sends Im H to itself: `αγ̄ = −γᾱ`, `αδ̄ = δᾱ`,
/// `βγ̄ = γβ̄`, `βδ̄ = −δβ̄`.
pub fn imaginary_preserving(m: &MoebiusCoeffs) -> bool {
    let MoebiusCoeffs { alpha: a, beta: b, gamma: c, delta: d } = *m;
    let tol = 1e-12 * m.scale().max(1.0).powi(2);
    let close = |x: Q, y: Q| (x - y).norm() <= tol;
    close(a * c.conj(), -(c * a.conj()))
        && close(a * d.conj(), d * a.conj())
        && close(b * c.conj(), c * b.conj())
        && close(b * d.conj(), -(d * b.conj()))
}

// ---------------------------------------------------------------------------
// Poles of Möbius images

/// A zero of `Fγ + δ`, located on the lattice and refined by bicubic
/// interpolation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleReport {
    pub chart: usize,
    pub z: C64,
    /// `|Fγ + δ|` at the refined location.
    pub residual: f64,
    pub masked: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MoebiusReport {
    pub poles: Vec<PoleReport>,
    /// Per chart: `sup |F̃ − (Fγ+δ)⁻¹(Fα+β)| / sup |F̃|` for Kodaira data,
    /// `sup |(χ̃,ψ̃) − dF̃| / sup |dF̃|` for Weierstrass data.
    pub residual: Vec<f64>,
}

/// Masking radius around poles, in grid spacings.
pub const POLE_MASK_RADIUS: f64 = 3.0;

fn refine_zero(den: &QField, z0: C64) -> (C64, f64) {
    let h = den.grid.h;
    let mut best = (z0, den.at(z0).map_or(f64::INFINITY, |q| q.norm()));
    let mut span = h;
    for _ in 0..4 {
        let centre = best.0;
        for a in -10..=10 {
            for b in -10..=10 {
                let z = centre + C64::new(a as f64, b as f64) * (span / 10.0);
                if let Some(v) = den.interpolate_cubic(z) {
                    if v.norm() < best.1 {
                        best = (z, v.norm());
                    }
                }
            }
        }
        span /= 5.0;
    }
    best
}

/// Lattice minima of `|den|` that look like zeros: the value is below the
/// largest jump to a neighbour.
fn find_zeros(den: &QField) -> Vec<C64> {
    let g = &den.grid;
    let mut out = vec![];
    for i in den.included() {
        let v = den.values[i].norm();
        let (ix, iy) = ((i % g.nx) as isize, (i / g.nx) as isize);
        let mut is_min = true;
        let mut jump: f64 = 0.0;
        for (dx, dy) in [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)] {
            let (jx, jy) = (ix + dx, iy + dy);
            if jx < 0 || jy < 0 || jx >= g.nx as isize || jy >= g.ny as isize {
                continue;
            }
            let Some(w) = den.get(g.index(jx as usize, jy as usize)) else { continue };
            is_min &= w.norm() >= v;
            jump = jump.max((w - den.values[i]).norm());
        }
        if is_min && v <= jump {
            out.push(g.node(i));
        }
    }
    out
}

fn mask_poles(den: &QField, chart: usize, report: &mut MoebiusReport) -> Vec<bool> {
    let g = &den.grid;
    let mut keep = vec![true; g.len()];
    for z0 in find_zeros(den) {
        let (z, residual) = refine_zero(den, z0);
        let mut masked = 0;
        for (i, k) in keep.iter_mut().enumerate() {
            if (g.node(i) - z).norm() < POLE_MASK_RADIUS * g.h && den.mask[i] {
                *k = false;
                masked += 1;
            }
        }
        report.poles.push(PoleReport { chart, z, residual, masked });
    }
    keep
}

/// `υ̃ = φγ + υδ`, `φ̃ = φα + υβ`, `Ṽ = V`. Nodes within
/// [`POLE_MASK_RADIUS`]`·h` of a zero of `Fγ + δ` are masked and reported.
pub fn moebius_kodaira(k: &KodairaData, m: &MoebiusCoeffs) -> Result<(KodairaData, MoebiusReport), TransformError> {
    m.check()?;
    let mut report = MoebiusReport::default();
    let mut charts = vec![];
    for (ci, c) in k.charts.iter().enumerate() {
        let f = c.upsilon.zip(&c.phi, |_, u, p| u.inv() * p);
        let den = f.map(|_, f| f * m.gamma + m.delta);
        let keep = mask_poles(&den, ci, &mut report);
        let ups = c.phi.zip(&c.upsilon, |_, p, u| p * m.gamma + u * m.delta).restrict(&keep);
        let phi = c.phi.zip(&c.upsilon, |_, p, u| p * m.alpha + u * m.beta).restrict(&keep);
        if ups.count() == 0 {
            return Err(TransformError::HitsInfinity { chart: ci });
        }
        let direct = f.zip(&den, |_, f, d| d.inv() * (f * m.alpha + m.beta));
        let ft = ups.zip(&phi, |_, u, p| u.inv() * p);
        report.residual.push(ft.sub(&direct).sup_norm() / ft.sup_norm().max(1e-300));
        charts.push(KChart { v: c.v.clone(), upsilon: ups, phi, region: c.region });
    }
    Ok((KodairaData { charts, cocycle: k.cocycle }, report))
}

/// `χ̃ = χ·conj(Fγ+δ)⁻¹`, `ψ̃ = ψ(α − γF̃)` and, with
/// `υ̃ = −j·conj(χ)⁻¹(Fγ+δ)`, `Ũ = U − (ψγυ̃⁻¹)⁻`, `B̃ = B − (ψγυ̃⁻¹)⁺`.
///
/// `f` holds the map on each chart. The report compares `(χ̃,ψ̃)` with a
/// finite-difference `dF̃`.
pub fn moebius_weierstrass(w: &WeierstrassData, m: &MoebiusCoeffs, f: &[QField]) -> Result<(WeierstrassData, MoebiusReport), TransformError> {
    m.check()?;
    if f.len() != w.charts.len() {
        return Err(TransformError::ChartMismatch(format!("{} maps for {} charts", f.len(), w.charts.len())));
    }
    let mut report = MoebiusReport::default();
    let mut charts = vec![];
    for (ci, (c, f)) in w.charts.iter().zip(f).enumerate() {
        let den = f.map(|_, f| f * m.gamma + m.delta);
        let keep = mask_poles(&den, ci, &mut report);
        let den = den.restrict(&keep);
        if den.count() == 0 {
            return Err(TransformError::HitsInfinity { chart: ci });
        }
        let ft = f.zip(&den, |_, f, d| d.inv() * (f * m.alpha + m.beta));
        let chi = c.chi.zip(&den, |_, x, d| x * d.conj().inv());
        let psi = c.psi.zip(&ft, |_, p, ft| p * (m.alpha - m.gamma * ft));
        let ups = c.chi.zip(&den, |_, x, d| -(Q::j() * x.conj().inv() * d));
        let shift = c.psi.zip(&ups, |_, p, u| p * m.gamma * u.inv());
        let u = c.u.field().zip(&shift, |_, u, s| u - s.minus());
        let b = c.b.zip(&shift, |_, b, s| b - s.plus());
        let (df, dbf) = wirtinger(&ft)?;
        let form = pairing10(&chi, &psi);
        let scale = df.sup_norm().max(dbf.sup_norm()).max(1e-300);
        report.residual.push(form.dz.sub(&df).sup_norm().max(form.dzbar.sub(&dbf).sup_norm()) / scale);
        charts.push(WChart { u: Potential01(u), b, chi, psi, region: c.region });
    }
    Ok((WeierstrassData { charts, cocycle: w.cocycle }, report))
}

// ---------------------------------------------------------------------------
// Reflection and conjugation

/// Weierstrass data of `−F̄`: `χ̃ = ψ`, `ψ̃ = χ`, `Ũ = U†` and
/// `B̃ = 2∂ln|ψ|` for the new trivialisation `υ̃ = −j·conj(ψ)⁻¹`.
pub fn reflect_weierstrass(w: &WeierstrassData) -> Result<WeierstrassData, TransformError> {
    let mut charts = vec![];
    for c in &w.charts {
        let log_abs = c.psi.map(|_, p| Q::real(p.norm().ln()));
        let (dlog, _) = wirtinger(&log_abs)?;
        charts.push(WChart {
            u: Potential01(c.u.field().map(|_, u| dagger(u))),
            b: dlog.scale(2.0),
            chi: c.psi.clone(),
            psi: c.chi.clone(),
            region: c.region,
        });
    }
    Ok(WeierstrassData { charts, cocycle: w.cocycle })
}

fn conj_domain(d: Domain) -> Domain {
    match d {
        Domain::Rectangle { x0, x1, y0, y1 } => Domain::Rectangle { x0, x1, y0: -y1, y1: -y0 },
        Domain::Disk { center, radius } => Domain::Disk { center: center.conj(), radius },
        Domain::Annulus { center, inner, outer } => Domain::Annulus { center: center.conj(), inner, outer },
        p @ Domain::P1Chart { .. } => p,
    }
}

/// Samples `f∘map` on `grid`, exactly at lattice nodes and bicubically
/// between them. `None` when an included node of `grid` maps outside the
/// domain of `f`.
fn resample(f: &QField, grid: &Arc<ChartGrid>, map: &(dyn Fn(C64) -> C64 + Sync)) -> Result<QField, C64> {
    let src = &f.grid;
    for i in grid.included() {
        let z = map(grid.node(i));
        if !src.domain.contains(z, 1e-9 * src.h) {
            return Err(z);
        }
    }
    Ok(QField::from_fn(grid, |z| {
        let w = map(z);
        let exact = src.nearest(w).filter(|&i| (src.node(i) - w).norm() < 1e-9 * src.h);
        let v = match exact {
            Some(i) => f.get(i),
            None => f.interpolate_cubic(w),
        };
        v.unwrap_or(Q::new(f64::NAN, f64::NAN, f64::NAN, f64::NAN))
    }))
}

/// Conjugate surface `F∘ρ` with `ρ(z) = z̄`: `υ̃ = j(υ∘ρ)`, `φ̃ = j(φ∘ρ)`,
/// `Ṽ = j(V∘ρ)j⁻¹`, sampled on the mirrored grids.
pub fn conjugate_kodaira(k: &KodairaData) -> Result<KodairaData, TransformError> {
    let mut charts = vec![];
    for (ci, c) in k.charts.iter().enumerate() {
        let g = &c.upsilon.grid;
        let punctures = g.punctures.iter().map(|p| p.conj()).collect();
        let grid = Arc::new(ChartGrid::build(conj_domain(g.domain), g.h, g.measure, punctures));
        let rho = |z: C64| z.conj();
        let pull = |f: &QField| resample(f, &grid, &rho).map_err(|z| TransformError::ImageOutsideChart { chart: ci, z });
        let ups = pull(&c.upsilon)?.map(|_, u| Q::j() * u);
        let phi = pull(&c.phi)?.map(|_, p| Q::j() * p);
        let v = pull(c.v.field())?.map(|_, v| -(Q::j() * v * Q::j()));
        charts.push(KChart { v: Potential01(v), upsilon: ups, phi, region: c.region });
    }
    let cocycle = k.cocycle.map(|c| Cocycle { coeff: c.coeff.conj(), power: c.power });
    Ok(KodairaData { charts, cocycle })
}

// ---------------------------------------------------------------------------
// Coverings

pub type ComplexMap = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

/// A holomorphic map between charts with its derivative in closed form.
#[derive(Clone)]
pub struct Covering {
    pub name: String,
    pub map: ComplexMap,
    pub jacobian: ComplexMap,
    /// `Some(n)` for `z ↦ zⁿ`, the only coverings compatible with the P¹ atlas.
    pub power: Option<i32>,
}

impl std::fmt::Debug for Covering {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Covering({})", self.name)
    }
}

impl Covering {
    pub fn identity() -> Self {
        Self::power(1)
    }

    /// `z ↦ zⁿ` on every chart.
    pub fn power(n: i32) -> Self {
        Covering {
            name: format!("z^{n}"),
            map: Arc::new(move |z| z.powi(n)),
            jacobian: Arc::new(move |z| z.powi(n - 1) * n as f64),
            power: Some(n),
        }
    }

    /// `z ↦ z + c`, planar charts only.
    pub fn translation(c: C64) -> Self {
        Covering { name: format!("z+{c}"), map: Arc::new(move |z| z + c), jacobian: Arc::new(|_| C64::new(1.0, 0.0)), power: None }
    }
}

fn covering_cocycle(cocycle: Option<Cocycle>, cov: &Covering) -> Result<Option<Cocycle>, TransformError> {
    match (cocycle, cov.power) {
        (None, _) => Ok(None),
        (Some(c), Some(n)) => Ok(Some(c.compose_power(n))),
        (Some(_), None) => Err(TransformError::ChartMismatch(format!("{} does not respect the P¹ atlas", cov.name))),
    }
}

fn check_targets(n: usize, targets: &[Arc<ChartGrid>]) -> Result<(), TransformError> {
    if targets.len() != n {
        return Err(TransformError::ChartMismatch(format!("{} target grids for {n} charts", targets.len())));
    }
    Ok(())
}

/// `υ̃ = υ∘f`, `φ̃ = φ∘f`, `Ṽ = conj(f′)·(V∘f)` on the target grids.
pub fn pullback_covering(k: &KodairaData, cov: &Covering, targets: &[Arc<ChartGrid>]) -> Result<KodairaData, TransformError> {
    check_targets(k.charts.len(), targets)?;
    let cocycle = covering_cocycle(k.cocycle, cov)?;
    let mut charts = vec![];
    for (ci, (c, grid)) in k.charts.iter().zip(targets).enumerate() {
        let map = cov.map.clone();
        let f = move |z: C64| map(z);
        let pull = |q: &QField| resample(q, grid, &f).map_err(|z| TransformError::ImageOutsideChart { chart: ci, z });
        let jac = cov.jacobian.clone();
        let v = pull(c.v.field())?.map(|z, v| Q::from_complex(jac(z).conj()) * v);
        charts.push(KChart { v: Potential01(v), upsilon: pull(&c.upsilon)?, phi: pull(&c.phi)?, region: c.region });
    }
    Ok(KodairaData { charts, cocycle })
}

/// `χ̃ = χ∘f`, `ψ̃ = f′·(ψ∘f)`, `Ũ = f′·conj(f′)·(U∘f)·f′⁻¹`,
/// `B̃ = f′·(B∘f)` on the target grids.
pub fn pullback_weierstrass(w: &WeierstrassData, cov: &Covering, targets: &[Arc<ChartGrid>]) -> Result<WeierstrassData, TransformError> {
    check_targets(w.charts.len(), targets)?;
    let cocycle = covering_cocycle(w.cocycle, cov)?;
    let mut charts = vec![];
    for (ci, (c, grid)) in w.charts.iter().zip(targets).enumerate() {
        let map = cov.map.clone();
        let f = move |z: C64| map(z);
        let pull = |q: &QField| resample(q, grid, &f).map_err(|z| TransformError::ImageOutsideChart { chart: ci, z });
        let jac = cov.jacobian.clone();
        let fp = move |z: C64| Q::from_complex(jac(z));
        let u = pull(c.u.field())?.map(|z, u| {
            let d = fp(z);
            d * d.conj() * u * d.inv()
        });
        let psi = pull(&c.psi)?.map(|z, p| fp(z) * p);
        let b = pull(&c.b)?.map(|z, b| fp(z) * b);
        charts.push(WChart { u: Potential01(u), b, chi: pull(&c.chi)?, psi, region: c.region });
    }
    Ok(WeierstrassData { charts, cocycle })
}
