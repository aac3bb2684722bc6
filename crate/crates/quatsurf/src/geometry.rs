//! Mean curvature, the Weingarten operators, Willmore energy in both
//! representations and the Li–Yau / Plücker bounds.
//!
//! The normal bundle is framed by `Ξ^α = conj(χ)·α·ψ`, `α ∈ C`: `α = 1`
//! and `α = i` are orthogonal normal fields of length `|χ||ψ|`, the square
//! root of the conformal factor. `A^α` is the shape operator in direction
//! `Ξ^α` on the coordinate frame `(∂x, ∂y)`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{partials, root_order, FieldError, QField};
use crate::isothermic::{check_roots, v_prime, IsoError};
use crate::representations::{pairing10, KodairaData, WeierstrassData};
use crate::Q;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("branch point at {z} on chart {chart}")]
    BranchPoint { chart: usize, z: C64 },
    #[error("preimage count inconclusive: {0}")]
    AmbiguousPreimage(String),
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
}

impl From<IsoError> for GeometryError {
    fn from(e: IsoError) -> Self {
        match e {
            IsoError::BranchPoint { chart, z } => GeometryError::BranchPoint { chart, z },
            IsoError::Field(f) => GeometryError::Field(f),
            other => GeometryError::ChartMismatch(other.to_string()),
        }
    }
}

fn sections_ok(w: &WeierstrassData) -> Result<(), GeometryError> {
    for (ci, c) in w.charts.iter().enumerate() {
        check_roots(&c.chi, ci)?;
        check_roots(&c.psi, ci)?;
    }
    Ok(())
}

/// `H = 2χ⁻¹·j·U·conj(ψ)⁻¹` per chart.
pub fn mean_curvature(w: &WeierstrassData) -> Result<Vec<QField>, GeometryError> {
    sections_ok(w)?;
    Ok(w.charts
        .iter()
        .map(|c| c.chi.zip3(c.u.field(), &c.psi, |_, x, u, p| x.inv() * Q::j() * u * p.conj().inv() * 2.0))
        .collect())
}

/// `Ξ^α = conj(χ)·α·ψ` per chart.
pub fn normal_field(w: &WeierstrassData, alpha: C64) -> Vec<QField> {
    w.charts.iter().map(|c| c.chi.zip(&c.psi, |_, x, p| x.conj() * Q::from_complex(alpha) * p)).collect()
}

/// Per-node real 2×2 matrices on a chart grid.
#[derive(Clone, Debug)]
pub struct MatrixField {
    pub values: Vec<Option<[[f64; 2]; 2]>>,
    pub grid: std::sync::Arc<crate::field::ChartGrid>,
}

impl MatrixField {
    pub fn at(&self, z: C64) -> Option<[[f64; 2]; 2]> {
        self.grid.nearest(z).and_then(|i| self.values[i])
    }

    pub fn included(&self) -> impl Iterator<Item = (usize, [[f64; 2]; 2])> + '_ {
        self.values.iter().enumerate().filter_map(|(i, m)| m.map(|m| (i, m)))
    }
}

/// Eigenvalues of a symmetric 2×2 matrix, ascending.
pub fn sym_eigenvalues(m: [[f64; 2]; 2]) -> [f64; 2] {
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let r = (0.25 * (m[0][0] - m[1][1]).powi(2) + m[0][1] * m[1][0]).max(0.0).sqrt();
    [mean - r, mean + r]
}

/// Weingarten matrices `A^α` per chart. With `a = 2Re(jαU)` and the complex
/// number `X = jαV′ − Vjα`,
///
/// ```text
/// A^α = [[a + Re X, Im X], [Im X, a − Re X]]
/// ```
///
/// so that `tr A^α = 4Re(jαU)`.
pub fn weingarten(w: &WeierstrassData, k: &KodairaData, alpha: C64) -> Result<Vec<MatrixField>, GeometryError> {
    if w.charts.len() != k.charts.len() {
        return Err(GeometryError::ChartMismatch(format!("{} vs {} charts", w.charts.len(), k.charts.len())));
    }
    sections_ok(w)?;
    let vp = v_prime(w)?;
    let a = Q::from_complex(alpha);
    let ja = Q::j() * a;
    let mut out = vec![];
    for ((wc, kc), vp) in w.charts.iter().zip(&k.charts).zip(&vp) {
        let x = vp.0.zip(kc.v.field(), |_, vp, v| ja * vp - v * ja);
        let tr = wc.u.field().map(|_, u| Q::real(2.0 * (ja * u).re()));
        let values = (0..x.len())
            .map(|i| {
                let (x, t) = (x.get(i)?, tr.get(i)?.w);
                Some([[t + x.w, x.x], [x.x, t - x.w]])
            })
            .collect();
        out.push(MatrixField { values, grid: x.grid.clone() });
    }
    Ok(out)
}

/// `½ Σ_{α ∈ {1, i}} tr(A^α)·Ξ^α / |Ξ^α|²`, which equals `H`.
pub fn mean_curvature_from_weingarten(w: &WeierstrassData, k: &KodairaData) -> Result<Vec<QField>, GeometryError> {
    let a1 = weingarten(w, k, C64::new(1.0, 0.0))?;
    let ai = weingarten(w, k, C64::new(0.0, 1.0))?;
    let x1 = normal_field(w, C64::new(1.0, 0.0));
    let xi = normal_field(w, C64::new(0.0, 1.0));
    let mut out = vec![];
    for c in 0..w.charts.len() {
        let g = &x1[c].grid;
        let values = (0..g.len())
            .map(|i| {
                let nan = Q::new(f64::NAN, f64::NAN, f64::NAN, f64::NAN);
                let (Some(m1), Some(mi), Some(n1), Some(ni)) = (a1[c].values[i], ai[c].values[i], x1[c].get(i), xi[c].get(i)) else {
                    return nan;
                };
                let t1 = m1[0][0] + m1[1][1];
                let ti = mi[0][0] + mi[1][1];
                (n1 * (t1 / n1.norm_sq()) + ni * (ti / ni.norm_sq())) * 0.5
            })
            .collect();
        out.push(QField::from_values(g, values));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Willmore energy

/// `4 Σ ‖U⁻‖²` over the chart regions.
pub fn willmore_w(w: &WeierstrassData) -> f64 {
    4.0 * w.charts.iter().map(|c| c.u.minus().l2_norm_sq_in(c.region)).sum::<f64>()
}

/// `4π·deg E + 4 Σ ‖V⁻‖²` over the chart regions.
pub fn willmore_k(k: &KodairaData, deg: i32) -> f64 {
    4.0 * PI * deg as f64 + 4.0 * k.charts.iter().map(|c| c.v.minus().l2_norm_sq_in(c.region)).sum::<f64>()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WillmoreReport {
    pub willmore_w: Option<f64>,
    pub willmore_k: Option<f64>,
    /// `|W_w − W_k| / max(W_w, W_k)` when both are available.
    pub discrepancy: Option<f64>,
    /// Set when the integral runs over a truncated noncompact chart.
    pub note: Option<String>,
}

pub fn willmore(k: Option<&KodairaData>, w: Option<&WeierstrassData>, deg: i32) -> WillmoreReport {
    let ww = w.map(willmore_w);
    let wk = k.map(|k| willmore_k(k, deg));
    let discrepancy = match (ww, wk) {
        (Some(a), Some(b)) => {
            let s = a.abs().max(b.abs());
            Some(if s > 0.0 { (a - b).abs() / s } else { 0.0 })
        }
        _ => None,
    };
    let compact = k.map(|k| k.cocycle.is_some()).or(w.map(|w| w.cocycle.is_some())).unwrap_or(false);
    let note = (!compact).then(|| "integrated over the sampled chart only; the surface is not compact".to_string());
    WillmoreReport { willmore_w: ww, willmore_k: wk, discrepancy, note }
}

/// Mean curvature, both Weingarten families and both Willmore forms.
#[derive(Clone, Debug)]
pub struct CurvatureReport {
    pub h: Vec<QField>,
    /// `[A^1, A^i]` per chart.
    pub weingarten: [Vec<MatrixField>; 2],
    pub willmore_w: f64,
    pub willmore_k: f64,
}

pub fn curvature(w: &WeierstrassData, k: &KodairaData, deg: i32) -> Result<CurvatureReport, GeometryError> {
    Ok(CurvatureReport {
        h: mean_curvature(w)?,
        weingarten: [weingarten(w, k, C64::new(1.0, 0.0))?, weingarten(w, k, C64::new(0.0, 1.0))?],
        willmore_w: willmore_w(w),
        willmore_k: willmore_k(k, deg),
    })
}

// ---------------------------------------------------------------------------
// Identities for dN

/// `sup |N_x − 2υ⁻¹i(V − U)υ| + |N_y − 2υ⁻¹(V + U)υ|`, relative to `sup |dN|`,
/// where `N = υ⁻¹iυ`. This is `dN = 2υ⁻¹i(dz̄V − dzU)υ` on `(∂x, ∂y)`.
pub fn dn_residual(k: &KodairaData, w: &WeierstrassData) -> Result<Vec<f64>, GeometryError> {
    let mut out = vec![];
    for (kc, wc) in k.charts.iter().zip(&w.charts) {
        let n = kc.upsilon.map(|_, u| u.inv() * Q::i() * u);
        let (nx, ny) = partials(&n)?;
        let vu = kc.v.field().zip(wc.u.field(), |_, v, u| v - u);
        let vpu = kc.v.field().zip(wc.u.field(), |_, v, u| v + u);
        let ex = kc.upsilon.zip(&vu, |_, y, d| y.inv() * Q::i() * d * y * 2.0);
        let ey = kc.upsilon.zip(&vpu, |_, y, s| y.inv() * s * y * 2.0);
        let scale = nx.sup_norm().max(ny.sup_norm()).max(1e-300);
        out.push(nx.sub(&ex).sup_norm().max(ny.sub(&ey).sup_norm()) / scale);
    }
    Ok(out)
}

/// `2dF·H̄ = *dN − N·dN` on `∂x`, that is `2F_x·H̄ = −N_y − N·N_x`, relative
/// to `sup |dN|`. `dF` comes from the pairing and `N` from `υ`.
pub fn mean_curvature_identity(k: &KodairaData, w: &WeierstrassData) -> Result<Vec<f64>, GeometryError> {
    let hs = mean_curvature(w)?;
    let mut out = vec![];
    for ((kc, wc), h) in k.charts.iter().zip(&w.charts).zip(&hs) {
        let n = kc.upsilon.map(|_, u| u.inv() * Q::i() * u);
        let (nx, ny) = partials(&n)?;
        let form = pairing10(&wc.chi, &wc.psi);
        let fx = form.dz.add(&form.dzbar);
        let lhs = fx.zip(h, |_, f, h| f * h.conj() * 2.0);
        let rhs = n.zip3(&nx, &ny, |_, n, nx, ny| -ny - n * nx);
        let scale = nx.sup_norm().max(ny.sup_norm()).max(1e-300);
        out.push(lhs.sub(&rhs).sup_norm() / scale);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Li–Yau and Plücker

/// Accept a refined minimum of `|F − probe|` below this as a preimage.
pub const PREIMAGE_TOL: f64 = 1e-3;
/// Refined minima between [`PREIMAGE_TOL`] and this are inconclusive.
pub const AMBIGUOUS_TOL: f64 = 1e-2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preimage {
    pub chart: usize,
    pub z: C64,
    pub distance: f64,
    pub ord_chi: i32,
    pub ord_psi: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiYauReport {
    pub probe: Q,
    pub preimages: Vec<Preimage>,
    /// `Σ (1 + ord χ + ord ψ)` over the preimages.
    pub multiplicity: i32,
    pub bound: f64,
    pub willmore: f64,
    /// `W ≥ 4π·multiplicity` up to the relative tolerance.
    pub holds: bool,
    /// Relative gap `(W − bound)/bound`.
    pub gap: Option<f64>,
    /// `‖V⁻‖²/π` and `2(1 − deg E)`: the Plücker bound for the linear
    /// system spanned by `υ` and `φ` over P¹, taking `ord H = 0`.
    pub pluecker_lhs: Option<f64>,
    pub pluecker_rhs: Option<f64>,
    /// `2 − W/4π ≤ deg E ≤ W/4π`
    pub degree_bounds: (f64, f64),
}

fn refine_min(f: &QField, probe: Q, z0: C64) -> (C64, f64) {
    let h = f.grid.h;
    let d = |z: C64| f.interpolate_cubic(z).map(|v| (v - probe).norm());
    let mut best = (z0, f.at(z0).map_or(f64::INFINITY, |v| (v - probe).norm()));
    let mut span = h;
    for _ in 0..4 {
        let c = best.0;
        for a in -8..=8 {
            for b in -8..=8 {
                let z = c + C64::new(a as f64, b as f64) * (span / 8.0);
                if let Some(v) = d(z) {
                    if v < best.1 {
                        best = (z, v);
                    }
                }
            }
        }
        span /= 4.0;
    }
    best
}

fn local_minima(f: &QField, probe: Q) -> Vec<(usize, f64)> {
    let g = &f.grid;
    let mut out = vec![];
    for i in f.included() {
        let v = (f.values[i] - probe).norm();
        let (ix, iy) = ((i % g.nx) as isize, (i / g.nx) as isize);
        let mut is_min = true;
        let mut jump: f64 = 0.0;
        for (dx, dy) in [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)] {
            let (jx, jy) = (ix + dx, iy + dy);
            if jx < 0 || jy < 0 || jx >= g.nx as isize || jy >= g.ny as isize {
                continue;
            }
            let Some(q) = f.get(g.index(jx as usize, jy as usize)) else { continue };
            is_min &= (q - probe).norm() >= v;
            jump = jump.max((q - f.values[i]).norm());
        }
        if is_min && v <= jump + AMBIGUOUS_TOL {
            out.push((i, v));
        }
    }
    out
}

/// Counts `F⁻¹(probe)` over the chart regions and checks
/// `W ≥ 4π Σ (1 + ord χ + ord ψ)`.
///
/// Candidates are lattice minima of `|F − probe|`, refined by bicubic
/// interpolation, merged within `10h`, and restricted to each chart's
/// region so overlapping P¹ charts count a point once.
pub fn liyau_pluecker_check(
    f: &[QField],
    w: &WeierstrassData,
    k: Option<&KodairaData>,
    deg: i32,
    probe: Q,
) -> Result<LiYauReport, GeometryError> {
    if f.len() != w.charts.len() {
        return Err(GeometryError::ChartMismatch(format!("{} maps for {} charts", f.len(), w.charts.len())));
    }
    let willmore = willmore_w(w);
    let mut preimages: Vec<Preimage> = vec![];
    for (ci, (fc, wc)) in f.iter().zip(&w.charts).enumerate() {
        let g = &fc.grid;
        let mut found: Vec<(C64, f64)> = vec![];
        for (i, _) in local_minima(fc, probe) {
            let (z, d) = refine_min(fc, probe, g.node(i));
            if !wc.region.contains(g, z) || d >= AMBIGUOUS_TOL {
                continue;
            }
            if d >= PREIMAGE_TOL {
                return Err(GeometryError::AmbiguousPreimage(format!("|F − probe| = {d:.2e} at {z} on chart {ci}")));
            }
            match found.iter_mut().find(|(z0, _)| (*z0 - z).norm() < 10.0 * g.h) {
                Some(prev) if prev.1 > d => *prev = (z, d),
                Some(_) => {}
                None => found.push((z, d)),
            }
        }
        for (z, d) in found {
            let ord_chi = root_order(&wc.chi, z)?;
            let ord_psi = root_order(&wc.psi, z)?;
            preimages.push(Preimage { chart: ci, z, distance: d, ord_chi, ord_psi });
        }
    }
    let multiplicity: i32 = preimages.iter().map(|p| 1 + p.ord_chi + p.ord_psi).sum();
    let bound = 4.0 * PI * multiplicity as f64;
    let compact = w.cocycle.is_some();
    let (pluecker_lhs, pluecker_rhs) = match (k, compact) {
        (Some(k), true) => {
            let v2: f64 = k.charts.iter().map(|c| c.v.minus().l2_norm_sq_in(c.region)).sum();
            (Some(v2 / PI), Some(2.0 * (1.0 - deg as f64)))
        }
        _ => (None, None),
    };
    Ok(LiYauReport {
        probe,
        preimages,
        multiplicity,
        bound,
        willmore,
        holds: willmore >= bound * (1.0 - 2e-2),
        gap: (bound > 0.0).then(|| (willmore - bound) / bound),
        pluecker_lhs,
        pluecker_rhs,
        degree_bounds: (2.0 - willmore / (4.0 * PI), willmore / (4.0 * PI)),
    })
}
