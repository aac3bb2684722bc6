//! Surface maps `F: chart → H`, their left and right normals and
//! conformality diagnostics.
//!
//! The Hodge star acts by `*dx = dy`, `*dy = −dx`, so the normal equations
//! `−*dF = N dF = dF R` read `F_y = N F_x = F_x R` on coordinate vectors.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{wirtinger, FieldError, QField};
use crate::Q;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConformalError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("surface leaves Im H (sup |Re F| = {0:.3e}); pass the projection flag to drop the real part")]
    NotImaginary(f64),
    #[error("no node has a nondegenerate differential")]
    RankDeficient,
    #[error("i/o: {0}")]
    Io(String),
}

/// Below this `|∂F| + |∂̄F|` a node counts as a branch point.
pub const BRANCH_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct SurfaceChart {
    pub name: String,
    pub f: QField,
    /// Closed-form `(∂F, ∂̄F)` when known.
    pub exact_df: Option<(QField, QField)>,
}

impl SurfaceChart {
    pub fn new(name: impl Into<String>, f: QField) -> Self {
        SurfaceChart { name: name.into(), f, exact_df: None }
    }

    pub fn with_exact_df(mut self, d: QField, dbar: QField) -> Self {
        self.exact_df = Some((d, dbar));
        self
    }

    /// `(∂F, ∂̄F)`, closed form if attached.
    pub fn df(&self) -> Result<(QField, QField), FieldError> {
        match &self.exact_df {
            Some((d, dbar)) => Ok((d.clone(), dbar.clone())),
            None => wirtinger(&self.f),
        }
    }

    /// `(F_x, F_y)` assembled from the Wirtinger pair.
    pub fn partials(&self) -> Result<(QField, QField), FieldError> {
        let (d, dbar) = self.df()?;
        let fx = d.zip(&dbar, |_, a, b| a + b);
        let fy = d.zip(&dbar, |_, a, b| Q::i() * (a - b));
        Ok((fx, fy))
    }

    /// `−conj(F)`.
    pub fn reflect(&self) -> SurfaceChart {
        SurfaceChart::new(format!("{}-reflected", self.name), self.f.map(|_, q| -q.conj()))
    }
}

#[derive(Clone, Debug)]
pub struct Normals {
    pub n: QField,
    pub r: QField,
    /// Nodes dropped as branch points.
    pub rank_deficient: usize,
}

fn unit_imag(q: Q) -> Q {
    let v = q.im();
    v / v.norm()
}

/// Left and right normals from `−*dF = N dF = dF R`.
///
/// Per node the larger of `F_x`, `F_y` is inverted, and the result is
/// projected to a unit imaginary quaternion.
pub fn normals_from_df(s: &SurfaceChart) -> Result<Normals, ConformalError> {
    let (d, dbar) = s.df()?;
    let (fx, fy) = s.partials()?;
    let degenerate = d.zip(&dbar, |_, a, b| if a.norm() + b.norm() < BRANCH_THRESHOLD { Q::one() } else { Q::zero() });
    let keep: Vec<bool> = (0..degenerate.len()).map(|i| degenerate.get(i) == Some(Q::zero())).collect();
    let rank_deficient = degenerate.count() - keep.iter().filter(|&&k| k).count();
    let pick = |x: Q, y: Q, left: bool| -> Q {
        let raw = if x.norm() >= y.norm() {
            if left {
                y * x.inv()
            } else {
                x.inv() * y
            }
        } else if left {
            -(x * y.inv())
        } else {
            -(y.inv() * x)
        };
        unit_imag(raw)
    };
    let n = fx.zip(&fy, |_, x, y| pick(x, y, true)).restrict(&keep);
    let r = fx.zip(&fy, |_, x, y| pick(x, y, false)).restrict(&keep);
    if n.count() == 0 {
        return Err(ConformalError::RankDeficient);
    }
    Ok(Normals { n, r, rank_deficient })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformalityReport {
    /// `sup |−*dF − N dF| / |dF|`
    pub normal_residual: f64,
    /// `sup ||F_x|² − |F_y|²| / (|F_x|² + |F_y|²)`
    pub metric_residual: f64,
    /// `sup |⟨F_x, F_y⟩| / (|F_x|² + |F_y|²)`
    pub orthogonality_residual: f64,
}

impl ConformalityReport {
    pub fn value(&self) -> f64 {
        self.normal_residual
    }
}

pub fn conformality_residual(s: &SurfaceChart, normals: &Normals) -> Result<ConformalityReport, ConformalError> {
    let (fx, fy) = s.partials()?;
    let mut rep = ConformalityReport { normal_residual: 0.0, metric_residual: 0.0, orthogonality_residual: 0.0 };
    for i in normals.n.included() {
        let (Some(x), Some(y)) = (fx.get(i), fy.get(i)) else { continue };
        let n = normals.n.values[i];
        let scale = x.norm_sq() + y.norm_sq();
        let res = ((y - n * x).norm_sq() + (-x - n * y).norm_sq()).sqrt() / scale.sqrt();
        let dot = x.w * y.w + x.x * y.x + x.y * y.y + x.z * y.z;
        rep.normal_residual = rep.normal_residual.max(res);
        rep.metric_residual = rep.metric_residual.max((x.norm_sq() - y.norm_sq()).abs() / scale);
        rep.orthogonality_residual = rep.orthogonality_residual.max(dot.abs() / scale);
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImaginaryReport {
    pub is_imaginary: bool,
    /// `sup |Re F|`
    pub re_residual: f64,
    /// `sup |(ψχ⁻¹)⁻| / |ψχ⁻¹|`: how far `g = ψχ⁻¹` is from complex.
    pub g_residual: Option<f64>,
    /// `g` averaged over included nodes.
    pub g_mean: Option<Q>,
    /// `sup |R + N|` with `N = −χ⁻¹iχ`, `R = ψ⁻¹iψ`.
    pub rn_residual: Option<f64>,
}

/// Checks `F ∈ Im H` and, given Weierstrass sections, that `ψ = gχ` with
/// complex `g` and `R = −N`.
pub fn imaginary_check(s: &SurfaceChart, sections: Option<(&QField, &QField)>, tol: f64) -> ImaginaryReport {
    let re_residual = s.f.included().map(|i| s.f.values[i].w.abs()).fold(0.0, f64::max);
    let mut rep = ImaginaryReport { is_imaginary: re_residual <= tol, re_residual, g_residual: None, g_mean: None, rn_residual: None };
    if let Some((chi, psi)) = sections {
        let g = psi.zip(chi, |_, p, c| p * c.inv());
        let gres = g.included().map(|i| g.values[i].minus().norm() / g.values[i].norm()).fold(0.0, f64::max);
        let count = g.count().max(1) as f64;
        let mean = g.included().map(|i| g.values[i]).sum::<Q>() / count;
        let rn = chi.zip(psi, |_, c, p| p.inv() * Q::i() * p - c.inv() * Q::i() * c);
        let rnres = rn.sup_norm();
        rep.is_imaginary &= gres <= tol && rnres <= tol;
        rep.g_residual = Some(gres);
        rep.g_mean = Some(mean);
        rep.rn_residual = Some(rnres);
    }
    rep
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjStats {
    pub vertices: usize,
    pub faces: usize,
    /// Range of the dropped real part when projecting.
    pub dropped_real: Option<(f64, f64)>,
}

/// Writes the chart as a quad mesh. Vertices are the `i, j, k` components;
/// a surface leaving Im H needs `project` set, and the range of the dropped
/// real part goes into the header.
pub fn write_obj<W: Write>(s: &SurfaceChart, project: bool, tol: f64, out: W) -> Result<ObjStats, ConformalError> {
    write_obj_charts(std::slice::from_ref(s), project, tol, out)
}

/// Like [`write_obj`] for several charts, one `g` group per chart. Charts
/// are written whole, so overlapping P¹ charts share a band of faces.
pub fn write_obj_charts<W: Write>(charts: &[SurfaceChart], project: bool, tol: f64, mut out: W) -> Result<ObjStats, ConformalError> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for f in charts.iter().map(|s| &s.f) {
        for i in f.included() {
            lo = lo.min(f.values[i].w);
            hi = hi.max(f.values[i].w);
        }
    }
    let sup_re = lo.abs().max(hi.abs());
    if !project && sup_re > tol {
        return Err(ConformalError::NotImaginary(sup_re));
    }
    let io = |e: std::io::Error| ConformalError::Io(e.to_string());
    let names: Vec<&str> = charts.iter().map(|s| s.name.as_str()).collect();
    writeln!(out, "# quatsurf mesh: {}", names.join(", ")).map_err(io)?;
    let dropped_real = project.then_some((lo, hi));
    if let Some((lo, hi)) = dropped_real {
        writeln!(out, "# projected along the real axis; dropped real part in [{lo:.6e}, {hi:.6e}]").map_err(io)?;
    }
    let (mut vertices, mut faces) = (0, 0);
    for (ci, s) in charts.iter().enumerate() {
        let f = &s.f;
        let g = &f.grid;
        writeln!(out, "# chart {ci}: spacing {} on {}x{} lattice", g.h, g.nx, g.ny).map_err(io)?;
        if charts.len() > 1 {
            writeln!(out, "g chart{ci}").map_err(io)?;
        }
        let mut index = vec![0usize; f.len()];
        for i in f.included() {
            let q = f.values[i];
            vertices += 1;
            index[i] = vertices;
            writeln!(out, "v {:.12} {:.12} {:.12}", q.x, q.y, q.z).map_err(io)?;
        }
        for iy in 0..g.ny.saturating_sub(1) {
            for ix in 0..g.nx.saturating_sub(1) {
                let quad = [g.index(ix, iy), g.index(ix + 1, iy), g.index(ix + 1, iy + 1), g.index(ix, iy + 1)];
                if quad.iter().all(|&q| f.mask[q]) {
                    faces += 1;
                    writeln!(out, "f {} {} {} {}", index[quad[0]], index[quad[1]], index[quad[2]], index[quad[3]]).map_err(io)?;
                }
            }
        }
    }
    Ok(ObjStats { vertices, faces, dropped_real })
}
