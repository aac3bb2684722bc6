//! Isothermic diagnostics, the (0,1) pairing and constrained Willmore
//! certificates.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conformal::{normals_from_df, ConformalError, SurfaceChart};
use crate::field::{wirtinger, FieldError, Potential01, QField};
use crate::representations::{pairing10, KodairaData, WeierstrassData, ROOT_THRESHOLD};
use crate::transforms::{row_action_inverse, MoebiusCoeffs};
use crate::Q;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IsoError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Conformal(#[from] ConformalError),
    #[error("branch point: ψ vanishes at {z} on chart {chart}")]
    BranchPoint { chart: usize, z: C64 },
    #[error("multiplier system is singular for these coefficients")]
    SingularSystem,
    #[error("fields live on different grids")]
    GridMismatch,
}

/// Lagrange multipliers `(υ*, φ*)`, or a dual pair of sections.
#[derive(Clone, Debug)]
pub struct MultiplierPair {
    pub upsilon_star: QField,
    pub phi_star: QField,
}

pub(crate) fn check_roots(f: &QField, chart: usize) -> Result<(), IsoError> {
    match f.included().find(|&i| f.values[i].norm() < ROOT_THRESHOLD) {
        Some(i) => Err(IsoError::BranchPoint { chart, z: f.grid.node(i) }),
        None => Ok(()),
    }
}

/// `V′ = ((∂ψ)ψ⁻¹)⁻` per chart.
pub fn v_prime(w: &WeierstrassData) -> Result<Vec<Potential01>, IsoError> {
    let mut out = vec![];
    for (ci, c) in w.charts.iter().enumerate() {
        check_roots(&c.psi, ci)?;
        let (d, _) = wirtinger(&c.psi)?;
        out.push(Potential01(d.zip(&c.psi, |_, d, p| (d * p.inv()).minus())));
    }
    Ok(out)
}

/// Per chart `‖V′ − V‖₂ / max(‖V‖₂, ε)` in the chart coordinate; zero only
/// when the coordinate is a curvature-line coordinate.
pub fn isothermic_residual(k: &KodairaData, w: &WeierstrassData) -> Result<Vec<f64>, IsoError> {
    let vp = v_prime(w)?;
    let mut out = vec![];
    for (c, vp) in k.charts.iter().zip(&vp) {
        let v = c.v.field().clone().restrict(&vp.0.mask);
        let diff = vp.0.sub(&v);
        let norm = v.restrict(&diff.mask).l2_norm_sq().sqrt();
        let d = diff.l2_norm_sq().sqrt();
        out.push(if norm > 1e-12 { d / norm } else { d });
    }
    Ok(out)
}

pub fn pairing01_at(eta: Q, xi: Q) -> Q {
    Q::k() * eta * xi.conj() * 2.0
}

/// `(η, ξ)^{(0,1)} = 2k·η·conj(ξ)` per node.
pub fn pairing01(eta: &QField, xi: &QField) -> Potential01 {
    Potential01(eta.zip(xi, |_, e, x| pairing01_at(e, x)))
}

fn chart0(k: &KodairaData, pair: &MultiplierPair) -> Result<(QField, QField), IsoError> {
    let c = k.charts.first().ok_or(IsoError::GridMismatch)?;
    if !crate::field::same_grid(&c.upsilon.grid, &pair.upsilon_star.grid) || !crate::field::same_grid(&c.upsilon.grid, &pair.phi_star.grid) {
        return Err(IsoError::GridMismatch);
    }
    Ok((c.upsilon.clone(), c.phi.clone()))
}

/// `sup |υ*ῡ + φ*φ̄| / (|υ*||υ| + |φ*||φ|)` over chart 0. A zero value makes
/// `(υ, φ*)^{(1,0)}` closed, the differential of a dual map.
pub fn dual_residual(k: &KodairaData, pair: &MultiplierPair) -> Result<f64, IsoError> {
    let (ups, phi) = chart0(k, pair)?;
    let mut worst: f64 = 0.0;
    for i in ups.included() {
        let (Some(us), Some(ps), Some(p)) = (pair.upsilon_star.get(i), pair.phi_star.get(i), phi.get(i)) else { continue };
        let u = ups.values[i];
        let scale = us.norm() * u.norm() + ps.norm() * p.norm();
        if scale > 0.0 {
            worst = worst.max((us * u.conj() + ps * p.conj()).norm() / scale);
        }
    }
    Ok(worst)
}

/// `‖V⁻ − (υ*,υ)^{(0,1)} − (φ*,φ)^{(0,1)}‖₂ / ‖V⁻‖₂` on chart 0, absolute
/// when `V⁻` vanishes.
pub fn constrained_residual(k: &KodairaData, pair: &MultiplierPair) -> Result<f64, IsoError> {
    let (ups, phi) = chart0(k, pair)?;
    let a = pairing01(&pair.upsilon_star, &ups).0;
    let b = pairing01(&pair.phi_star, &phi).0;
    let vm = k.charts[0].v.minus();
    let diff = vm.zip3(&a, &b, |_, v, a, b| v - a - b);
    let norm = vm.restrict(&diff.mask).l2_norm_sq().sqrt();
    let d = diff.l2_norm_sq().sqrt();
    Ok(if norm > 1e-12 { d / norm } else { d })
}

/// Multipliers after a Möbius map: solves `φ̃*ᾱ + υ̃*γ̄ = φ*` and
/// `φ̃*β̄ + υ̃*δ̄ = υ*` per node.
pub fn transform_multipliers(pair: &MultiplierPair, m: &MoebiusCoeffs) -> Result<MultiplierPair, IsoError> {
    let sys = [[m.alpha.conj(), m.beta.conj()], [m.gamma.conj(), m.delta.conj()]];
    let inv = row_action_inverse(sys).ok_or(IsoError::SingularSystem)?;
    let phi = pair.phi_star.zip(&pair.upsilon_star, |_, p, u| p * inv[0][0] + u * inv[1][0]);
    let ups = pair.phi_star.zip(&pair.upsilon_star, |_, p, u| p * inv[0][1] + u * inv[1][1]);
    Ok(MultiplierPair { upsilon_star: ups, phi_star: phi })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualNormalReport {
    /// `sup |N_G + N_F|`
    pub left: f64,
    /// `sup |R_G + R_F|`
    pub right: f64,
    pub nodes: usize,
}

/// Normals of the dual map `dG = (υ, φ*)^{(1,0)}` against those of
/// `F = υ⁻¹φ` on chart 0; a dual map has `(−N, −R)`.
pub fn dual_normals(k: &KodairaData, pair: &MultiplierPair) -> Result<DualNormalReport, IsoError> {
    let (ups, phi) = chart0(k, pair)?;
    let f = ups.zip(&phi, |_, u, p| u.inv() * p);
    let nf = normals_from_df(&SurfaceChart::new("F", f.clone()))?;
    let form = pairing10(&ups, &pair.phi_star);
    let g = SurfaceChart::new("G", QField::zeros(&f.grid)).with_exact_df(form.dz, form.dzbar);
    let ng = normals_from_df(&g)?;
    let left = ng.n.zip(&nf.n, |_, a, b| a + b);
    let right = ng.r.zip(&nf.r, |_, a, b| a + b);
    Ok(DualNormalReport { left: left.sup_norm(), right: right.sup_norm(), nodes: left.count().min(right.count()) })
}
