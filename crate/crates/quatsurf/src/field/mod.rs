//! Sampled charts and quaternion-valued fields on them.

mod cauchy;
mod io;

use std::sync::{Arc, OnceLock};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Q;

pub use cauchy::{
    cauchy_transform, cauchy_transform_direct, neumann_resolve, neumann_resolve_right,
    NeumannReport,
};
pub use io::{read_binary, read_csv, write_binary, write_csv};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("grid has fewer than 5 nodes along an axis")]
    GridTooSmall,
    #[error("Neumann series did not converge after {iterations} iterations (last relative update {last_update:.3e})")]
    NoConvergence { iterations: usize, last_update: f64 },
    #[error("root order inconclusive: slope {slope:.3}, regression residual {residual:.3}")]
    Inconclusive { slope: f64, residual: f64 },
    #[error("integration path leaves the sampled region")]
    PathOutsideGrid,
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("i/o: {0}")]
    Io(String),
    #[error("malformed field data: {0}")]
    Format(String),
}

impl From<std::io::Error> for FieldError {
    fn from(e: std::io::Error) -> Self {
        FieldError::Io(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Domain {
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    Disk { center: C64, radius: f64 },
    Annulus { center: C64, inner: f64, outer: f64 },
    /// Disk `|z| ≤ radius` in one of the two standard charts of P¹.
    P1Chart { radius: f64 },
}

impl Domain {
    pub fn contains(&self, z: C64, slack: f64) -> bool {
        match *self {
            Domain::Rectangle { x0, x1, y0, y1 } => {
                z.re >= x0 - slack && z.re <= x1 + slack && z.im >= y0 - slack && z.im <= y1 + slack
            }
            Domain::Disk { center, radius } => (z - center).norm() <= radius + slack,
            Domain::Annulus { center, inner, outer } => {
                let r = (z - center).norm();
                r >= inner - slack && r <= outer + slack
            }
            Domain::P1Chart { radius } => z.norm() <= radius + slack,
        }
    }

    pub fn center(&self) -> C64 {
        match *self {
            Domain::Rectangle { x0, x1, y0, y1 } => C64::new(0.5 * (x0 + x1), 0.5 * (y0 + y1)),
            Domain::Disk { center, .. } | Domain::Annulus { center, .. } => center,
            Domain::P1Chart { .. } => C64::new(0.0, 0.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    #[default]
    Lebesgue,
    /// `(1+|z|²)⁻² dμ`
    FubiniStudy,
}

/// Everything needed to rebuild a grid; this is the serialized form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub domain: Domain,
    pub h: f64,
    #[serde(default)]
    pub measure: Measure,
    #[serde(default)]
    pub punctures: Vec<C64>,
}

/// A uniform lattice over a chart domain with an inclusion mask and
/// quadrature weights.
#[derive(Debug, Serialize, Deserialize)]
#[serde(into = "GridSpec", from = "GridSpec")]
pub struct ChartGrid {
    pub domain: Domain,
    pub h: f64,
    pub measure: Measure,
    pub punctures: Vec<C64>,
    pub nx: usize,
    pub ny: usize,
    /// Position of node `(0, 0)`.
    pub origin: C64,
    /// Lattice anchor and its node index; nodes are `anchor + (ix−ax, iy−ay)·h`
    /// so that centred lattices are exactly symmetric.
    anchor: (C64, usize, usize),
    pub mask: Vec<bool>,
    pub weight: Vec<f64>,
    kernel: OnceLock<Arc<cauchy::KernelSpectrum>>,
}

impl Clone for ChartGrid {
    fn clone(&self) -> Self {
        ChartGrid::from(self.clone_spec())
    }
}

impl PartialEq for ChartGrid {
    fn eq(&self, other: &Self) -> bool {
        self.clone_spec() == other.clone_spec()
    }
}

impl From<ChartGrid> for GridSpec {
    fn from(g: ChartGrid) -> Self {
        g.clone_spec()
    }
}

impl From<GridSpec> for ChartGrid {
    fn from(s: GridSpec) -> Self {
        ChartGrid::build(s.domain, s.h, s.measure, s.punctures)
    }
}

/// Radius in units of `h` around a puncture inside which nodes are dropped.
pub const PUNCTURE_RADIUS: f64 = 3.0;

impl ChartGrid {
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64, h: f64) -> Self {
        Self::build(Domain::Rectangle { x0, x1, y0, y1 }, h, Measure::Lebesgue, vec![])
    }

    pub fn disk(center: C64, radius: f64, h: f64) -> Self {
        Self::build(Domain::Disk { center, radius }, h, Measure::Lebesgue, vec![])
    }

    pub fn annulus(center: C64, inner: f64, outer: f64, h: f64) -> Self {
        Self::build(Domain::Annulus { center, inner, outer }, h, Measure::Lebesgue, vec![])
    }

    pub fn p1_chart(radius: f64, h: f64) -> Self {
        Self::build(Domain::P1Chart { radius }, h, Measure::Lebesgue, vec![])
    }

    pub fn with_measure(self, measure: Measure) -> Self {
        Self::build(self.domain, self.h, measure, self.punctures)
    }

    /// Drops the nodes within `3h` of `z0`.
    pub fn with_puncture(self, z0: C64) -> Self {
        let mut p = self.punctures;
        p.push(z0);
        Self::build(self.domain, self.h, self.measure, p)
    }

    pub fn spec(&self) -> GridSpec {
        self.clone_spec()
    }

    fn clone_spec(&self) -> GridSpec {
        GridSpec {
            domain: self.domain,
            h: self.h,
            measure: self.measure,
            punctures: self.punctures.clone(),
        }
    }

    pub fn build(domain: Domain, h: f64, measure: Measure, punctures: Vec<C64>) -> Self {
        assert!(h > 0.0 && h.is_finite(), "grid spacing must be positive");
        let (anchor, nx, ny) = match domain {
            Domain::Rectangle { x0, x1, y0, y1 } => {
                let nx = ((x1 - x0) / h + 1e-9).floor() as usize + 1;
                let ny = ((y1 - y0) / h + 1e-9).floor() as usize + 1;
                ((C64::new(x0, y0), 0, 0), nx, ny)
            }
            _ => {
                let c = domain.center();
                let r = match domain {
                    Domain::Disk { radius, .. } => radius,
                    Domain::Annulus { outer, .. } => outer,
                    Domain::P1Chart { radius } => radius,
                    Domain::Rectangle { .. } => unreachable!(),
                };
                // centred lattice so that the centre itself is a node
                let n = (r / h + 1e-9).floor() as usize;
                ((c, n, n), 2 * n + 1, 2 * n + 1)
            }
        };
        let at = |ix: usize, iy: usize| {
            anchor.0 + C64::new((ix as f64 - anchor.1 as f64) * h, (iy as f64 - anchor.2 as f64) * h)
        };
        let origin = at(0, 0);
        let slack = 1e-9 * h;
        let mut mask = vec![false; nx * ny];
        let mut weight = vec![0.0; nx * ny];
        for iy in 0..ny {
            for ix in 0..nx {
                let idx = iy * nx + ix;
                let z = at(ix, iy);
                let inside = domain.contains(z, slack)
                    && punctures.iter().all(|p| (z - p).norm() >= PUNCTURE_RADIUS * h - slack);
                mask[idx] = inside;
                if inside {
                    weight[idx] = match measure {
                        Measure::Lebesgue => h * h,
                        Measure::FubiniStudy => h * h / (1.0 + z.norm_sqr()).powi(2),
                    };
                }
            }
        }
        ChartGrid {
            domain,
            h,
            measure,
            punctures,
            nx,
            ny,
            origin,
            anchor,
            mask,
            weight,
            kernel: OnceLock::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, idx: usize) -> C64 {
        let (ix, iy) = (idx % self.nx, idx / self.nx);
        let (a, ax, ay) = self.anchor;
        a + C64::new((ix as f64 - ax as f64) * self.h, (iy as f64 - ay as f64) * self.h)
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    /// Index of the lattice node closest to `z`, if it is on the lattice.
    pub fn nearest(&self, z: C64) -> Option<usize> {
        let u = (z - self.origin) / self.h;
        let (ix, iy) = (u.re.round(), u.im.round());
        if ix < 0.0 || iy < 0.0 || ix >= self.nx as f64 || iy >= self.ny as f64 {
            return None;
        }
        Some(self.index(ix as usize, iy as usize))
    }

    pub fn included(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.mask[i])
    }

    pub fn total_weight(&self) -> f64 {
        self.weight.iter().sum()
    }

    pub(crate) fn kernel(&self) -> Arc<cauchy::KernelSpectrum> {
        self.kernel.get_or_init(|| Arc::new(cauchy::KernelSpectrum::new(self))).clone()
    }
}

/// Part of a chart over which integrals are accumulated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Region {
    #[default]
    Whole,
    /// `|z − c| ≤ r` (closed) or `< r` around the domain centre.
    Disk { radius: f64, closed: bool },
}

impl Region {
    pub fn contains(&self, grid: &ChartGrid, z: C64) -> bool {
        match *self {
            Region::Whole => true,
            Region::Disk { radius, closed } => {
                let r = (z - grid.domain.center()).norm();
                let eps = 1e-9 * grid.h;
                if closed {
                    r <= radius + eps
                } else {
                    r < radius - eps
                }
            }
        }
    }
}

/// Quaternion samples on a grid. Nodes without a value hold NaN and are
/// excluded from `mask`.
#[derive(Clone, Debug)]
pub struct QField {
    pub grid: Arc<ChartGrid>,
    pub values: Vec<Q>,
    pub mask: Vec<bool>,
}

fn nan_q() -> Q {
    Q::new(f64::NAN, f64::NAN, f64::NAN, f64::NAN)
}

impl QField {
    /// Samples `f` at every lattice node; non-finite samples and nodes
    /// outside the grid mask are excluded.
    pub fn from_fn<F>(grid: &Arc<ChartGrid>, f: F) -> Self
    where
        F: Fn(C64) -> Q + Sync,
    {
        let values: Vec<Q> = (0..grid.len()).into_par_iter().map(|i| f(grid.node(i))).collect();
        Self::from_values(grid, values)
    }

    pub fn from_values(grid: &Arc<ChartGrid>, values: Vec<Q>) -> Self {
        assert_eq!(values.len(), grid.len());
        let mask = values.iter().zip(&grid.mask).map(|(v, &m)| m && v.is_finite()).collect();
        QField { grid: grid.clone(), values, mask }
    }

    pub fn constant(grid: &Arc<ChartGrid>, q: Q) -> Self {
        Self::from_fn(grid, |_| q)
    }

    pub fn zeros(grid: &Arc<ChartGrid>) -> Self {
        Self::constant(grid, Q::zero())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, idx: usize) -> Option<Q> {
        self.mask[idx].then(|| self.values[idx])
    }

    /// Value at the lattice node nearest `z`.
    pub fn at(&self, z: C64) -> Option<Q> {
        self.grid.nearest(z).and_then(|i| self.get(i))
    }

    pub fn included(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.mask[i])
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Pointwise map over included nodes; results that are not finite drop out.
    pub fn map<F>(&self, f: F) -> QField
    where
        F: Fn(C64, Q) -> Q + Sync,
    {
        let g = &self.grid;
        let values: Vec<Q> = (0..self.len())
            .into_par_iter()
            .map(|i| if self.mask[i] { f(g.node(i), self.values[i]) } else { nan_q() })
            .collect();
        QField::from_values(g, values).restrict(&self.mask)
    }

    /// Pointwise combination over nodes included in both fields.
    pub fn zip<F>(&self, other: &QField, f: F) -> QField
    where
        F: Fn(C64, Q, Q) -> Q + Sync,
    {
        assert!(same_grid(&self.grid, &other.grid), "fields live on different grids");
        let g = &self.grid;
        let values: Vec<Q> = (0..self.len())
            .into_par_iter()
            .map(|i| {
                if self.mask[i] && other.mask[i] {
                    f(g.node(i), self.values[i], other.values[i])
                } else {
                    nan_q()
                }
            })
            .collect();
        QField::from_values(g, values)
    }

    pub fn zip3<F>(&self, b: &QField, c: &QField, f: F) -> QField
    where
        F: Fn(C64, Q, Q, Q) -> Q + Sync,
    {
        assert!(same_grid(&self.grid, &b.grid) && same_grid(&self.grid, &c.grid));
        let g = &self.grid;
        let values: Vec<Q> = (0..self.len())
            .into_par_iter()
            .map(|i| {
                if self.mask[i] && b.mask[i] && c.mask[i] {
                    f(g.node(i), self.values[i], b.values[i], c.values[i])
                } else {
                    nan_q()
                }
            })
            .collect();
        QField::from_values(g, values)
    }

    /// Keeps only nodes where `keep` is set.
    pub fn restrict(mut self, keep: &[bool]) -> QField {
        for (i, m) in self.mask.iter_mut().enumerate() {
            if *m && !keep[i] {
                *m = false;
                self.values[i] = nan_q();
            }
        }
        self
    }

    /// Drops the nodes within `radius` of `z0`.
    pub fn punctured(self, z0: C64, radius: f64) -> QField {
        let keep: Vec<bool> = (0..self.len()).map(|i| (self.grid.node(i) - z0).norm() >= radius).collect();
        self.restrict(&keep)
    }

    pub fn add(&self, o: &QField) -> QField {
        self.zip(o, |_, a, b| a + b)
    }

    pub fn sub(&self, o: &QField) -> QField {
        self.zip(o, |_, a, b| a - b)
    }

    pub fn mul(&self, o: &QField) -> QField {
        self.zip(o, |_, a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> QField {
        self.map(|_, a| a * s)
    }

    pub fn plus(&self) -> QField {
        self.map(|_, a| a.plus())
    }

    pub fn minus(&self) -> QField {
        self.map(|_, a| a.minus())
    }

    /// `Σ |f|² w` over included nodes.
    pub fn l2_norm_sq(&self) -> f64 {
        self.l2_norm_sq_in(Region::Whole)
    }

    pub fn l2_norm_sq_in(&self, region: Region) -> f64 {
        self.included()
            .filter(|&i| region.contains(&self.grid, self.grid.node(i)))
            .map(|i| self.values[i].norm_sq() * self.grid.weight[i])
            .sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.included().map(|i| self.values[i].norm()).fold(0.0, f64::max)
    }

    /// Bilinear interpolation from the four surrounding nodes, all of
    /// which must be included.
    pub fn interpolate(&self, z: C64) -> Option<Q> {
        self.interpolate_with(z, true)
    }

    /// Like [`interpolate`](Self::interpolate), but accepts any finite
    /// stored sample when `strict` is false.
    pub fn interpolate_with(&self, z: C64, strict: bool) -> Option<Q> {
        let g = &self.grid;
        let u = (z - g.origin) / g.h;
        let (fx, fy) = (u.re.floor(), u.im.floor());
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let (ix, iy) = (fx as usize, fy as usize);
        if ix + 1 >= g.nx || iy + 1 >= g.ny {
            // exactly on the last row or column
            if (ix + 1 == g.nx || iy + 1 == g.ny) && (u.re - fx).abs() < 1e-12 && (u.im - fy).abs() < 1e-12 {
                return self.sample(g.index(ix, iy), strict);
            }
            return None;
        }
        let (s, t) = (u.re - fx, u.im - fy);
        let q00 = self.sample(g.index(ix, iy), strict)?;
        let q10 = self.sample(g.index(ix + 1, iy), strict)?;
        let q01 = self.sample(g.index(ix, iy + 1), strict)?;
        let q11 = self.sample(g.index(ix + 1, iy + 1), strict)?;
        Some(q00 * ((1.0 - s) * (1.0 - t)) + q10 * (s * (1.0 - t)) + q01 * ((1.0 - s) * t) + q11 * (s * t))
    }

    /// Bicubic Lagrange interpolation on the surrounding 4×4 block of
    /// included nodes, falling back to bilinear where the block is cut by
    /// the mask.
    pub fn interpolate_cubic(&self, z: C64) -> Option<Q> {
        let g = &self.grid;
        let u = (z - g.origin) / g.h;
        let (fx, fy) = (u.re.floor(), u.im.floor());
        if fx < 1.0 || fy < 1.0 || fx + 2.0 >= g.nx as f64 || fy + 2.0 >= g.ny as f64 {
            return self.interpolate(z);
        }
        let (ix, iy) = (fx as usize, fy as usize);
        let (s, t) = (u.re - fx, u.im - fy);
        let weights = |p: f64| {
            [
                -p * (p - 1.0) * (p - 2.0) / 6.0,
                (p + 1.0) * (p - 1.0) * (p - 2.0) / 2.0,
                -(p + 1.0) * p * (p - 2.0) / 2.0,
                (p + 1.0) * p * (p - 1.0) / 6.0,
            ]
        };
        let (wx, wy) = (weights(s), weights(t));
        let mut acc = Q::zero();
        for (b, wyb) in wy.iter().enumerate() {
            for (a, wxa) in wx.iter().enumerate() {
                let idx = g.index(ix + a - 1, iy + b - 1);
                if !self.mask[idx] {
                    return self.interpolate(z);
                }
                acc += self.values[idx] * (wxa * wyb);
            }
        }
        Some(acc)
    }

    fn sample(&self, idx: usize, strict: bool) -> Option<Q> {
        let v = self.values[idx];
        if strict {
            self.mask[idx].then_some(v)
        } else {
            v.is_finite().then_some(v)
        }
    }
}

pub fn same_grid(a: &Arc<ChartGrid>, b: &Arc<ChartGrid>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Fourth-order central differences `(∂x f, ∂y f)`. Nodes lacking a full
/// stencil inside the field mask are dropped.
pub fn partials(f: &QField) -> Result<(QField, QField), FieldError> {
    let g = &f.grid;
    if g.nx < 5 || g.ny < 5 {
        return Err(FieldError::GridTooSmall);
    }
    let inv = 1.0 / (12.0 * g.h);
    let stencil = |i: usize, step: isize, n: usize, pos: usize| -> Option<Q> {
        if pos < 2 || pos + 2 >= n {
            return None;
        }
        let at = |k: isize| -> Option<Q> {
            let j = (i as isize + k * step) as usize;
            f.mask[j].then(|| f.values[j])
        };
        let (m2, m1, p1, p2) = (at(-2)?, at(-1)?, at(1)?, at(2)?);
        Some((m2 - p2 + (p1 - m1) * 8.0) * inv)
    };
    let results: Vec<(Q, Q)> = (0..f.len())
        .into_par_iter()
        .map(|i| {
            if !f.mask[i] {
                return (nan_q(), nan_q());
            }
            let (ix, iy) = (i % g.nx, i / g.nx);
            let dx = stencil(i, 1, g.nx, ix);
            let dy = stencil(i, g.nx as isize, g.ny, iy);
            match (dx, dy) {
                (Some(a), Some(b)) => (a, b),
                _ => (nan_q(), nan_q()),
            }
        })
        .collect();
    let (fx, fy): (Vec<Q>, Vec<Q>) = results.into_iter().unzip();
    Ok((QField::from_values(g, fx), QField::from_values(g, fy)))
}

/// `(∂f, ∂̄f)` with `∂ = ½(∂x − i∂y)` and `∂̄ = ½(∂x + i∂y)`, `i` acting on the left.
pub fn wirtinger(f: &QField) -> Result<(QField, QField), FieldError> {
    let (fx, fy) = partials(f)?;
    let i = Q::i();
    let d = fx.zip(&fy, |_, a, b| (a - i * b) * 0.5);
    let dbar = fx.zip(&fy, |_, a, b| (a + i * b) * 0.5);
    Ok((d, dbar))
}

/// Potential `V` of `dz̄`, split into the parts commuting and
/// anticommuting with `i`.
#[derive(Clone, Debug)]
pub struct Potential01(pub QField);

impl Potential01 {
    pub fn field(&self) -> &QField {
        &self.0
    }

    pub fn plus(&self) -> QField {
        self.0.plus()
    }

    pub fn minus(&self) -> QField {
        self.0.minus()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.0.l2_norm_sq()
    }
}

pub fn l2_norm_sq(v: &Potential01) -> f64 {
    v.l2_norm_sq()
}

/// Least-squares slope of `ln mean|f|` against `ln r` on four circles
/// around `z0`, with its RMS residual.
pub fn root_order_fit(f: &QField, z0: C64) -> Result<(f64, f64), FieldError> {
    let h = f.grid.h;
    let samples = 64;
    let mut pts = Vec::with_capacity(4);
    for m in [4.0, 8.0, 16.0, 32.0] {
        let r = m * h;
        let mut acc = 0.0;
        for s in 0..samples {
            let t = 2.0 * std::f64::consts::PI * (s as f64 + 0.5) / samples as f64;
            let z = z0 + C64::from_polar(r, t);
            acc += f.interpolate_with(z, false).ok_or(FieldError::PathOutsideGrid)?.norm();
        }
        pts.push((r.ln(), (acc / samples as f64).ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let rms = (pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum::<f64>() / n).sqrt();
    if !slope.is_finite() {
        return Err(FieldError::Inconclusive { slope, residual: f64::INFINITY });
    }
    Ok((slope, rms))
}

/// Order of the root (positive) or pole (negative) of `f` at `z0`.
pub fn root_order(f: &QField, z0: C64) -> Result<i32, FieldError> {
    let (slope, residual) = root_order_fit(f, z0)?;
    if residual > 0.25 {
        return Err(FieldError::Inconclusive { slope, residual });
    }
    Ok(slope.round() as i32)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: C64,
    pub radius: f64,
}

/// `∮ dz·A + dz̄·B` along a counter-clockwise circle, with the complex
/// differential on the left. Coefficients are sampled by bicubic
/// interpolation where the stencil allows it.
pub fn loop_integral(omega: (&QField, &QField), path: Circle) -> Result<Q, FieldError> {
    let (a, b) = omega;
    let h = a.grid.h;
    let n = 256usize.max((4.0 * std::f64::consts::PI * path.radius / h).ceil() as usize);
    let dt = 2.0 * std::f64::consts::PI / n as f64;
    let mut sum = Q::zero();
    for s in 0..n {
        let e = C64::from_polar(1.0, s as f64 * dt);
        let z = path.center + e * path.radius;
        let zdot = C64::i() * e * path.radius;
        let av = a.interpolate_cubic(z).ok_or(FieldError::PathOutsideGrid)?;
        let bv = b.interpolate_cubic(z).ok_or(FieldError::PathOutsideGrid)?;
        sum += Q::cmul(zdot, av) + Q::cmul(zdot.conj(), bv);
    }
    Ok(sum * dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_is_centred() {
        let g = ChartGrid::disk(C64::new(0.5, -0.25), 1.0, 0.1);
        assert_eq!(g.nx, 21);
        let c = g.nearest(C64::new(0.5, -0.25)).unwrap();
        assert!((g.node(c) - C64::new(0.5, -0.25)).norm() < 1e-12);
        assert!(g.mask[c]);
    }

    #[test]
    fn punctures_are_masked() {
        let g = ChartGrid::disk(C64::new(0.0, 0.0), 1.0, 0.1).with_puncture(C64::new(0.0, 0.0));
        for i in g.included() {
            assert!(g.node(i).norm() >= 0.3 - 1e-9);
        }
    }
}
