//! Discrete Cauchy transform and Neumann resolvents.
//!
//! The transform is `I(f)(z) = Σ_w (z−w)⁻¹ f(w) h²/π`, the complex kernel
//! acting from the left. On the lattice this is a convolution, evaluated
//! either directly or through a zero-padded FFT; both compute the same sum.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{nan_q, wirtinger, ChartGrid, FieldError, QField};
use crate::Q;

pub(crate) struct KernelSpectrum {
    px: usize,
    py: usize,
    spec: Vec<C64>,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for KernelSpectrum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "KernelSpectrum({}x{})", self.px, self.py)
    }
}

impl KernelSpectrum {
    pub(crate) fn new(g: &ChartGrid) -> Self {
        let (px, py) = (2 * g.nx, 2 * g.ny);
        let mut planner = FftPlanner::new();
        let mut k = Self {
            px,
            py,
            spec: vec![C64::new(0.0, 0.0); px * py],
            fwd_x: planner.plan_fft_forward(px),
            inv_x: planner.plan_fft_inverse(px),
            fwd_y: planner.plan_fft_forward(py),
            inv_y: planner.plan_fft_inverse(py),
        };
        let c = g.h / std::f64::consts::PI;
        let (nx, ny) = (g.nx as isize, g.ny as isize);
        for dy in -(ny - 1)..ny {
            for dx in -(nx - 1)..nx {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let ix = dx.rem_euclid(px as isize) as usize;
                let iy = dy.rem_euclid(py as isize) as usize;
                k.spec[iy * px + ix] = c / C64::new(dx as f64, dy as f64);
            }
        }
        let mut spec = std::mem::take(&mut k.spec);
        k.fft2(&mut spec, true);
        k.spec = spec;
        k
    }

    fn fft2(&self, data: &mut [C64], forward: bool) {
        let (fx, fy) = if forward { (&self.fwd_x, &self.fwd_y) } else { (&self.inv_x, &self.inv_y) };
        fx.process(data);
        let mut col = vec![C64::new(0.0, 0.0); self.py];
        for x in 0..self.px {
            for (y, c) in col.iter_mut().enumerate() {
                *c = data[y * self.px + x];
            }
            fy.process(&mut col);
            for (y, c) in col.iter().enumerate() {
                data[y * self.px + x] = *c;
            }
        }
    }

    fn convolve(&self, g: &ChartGrid, src: &[Option<C64>]) -> Vec<C64> {
        let mut buf = vec![C64::new(0.0, 0.0); self.px * self.py];
        for iy in 0..g.ny {
            for ix in 0..g.nx {
                if let Some(v) = src[iy * g.nx + ix] {
                    buf[iy * self.px + ix] = v;
                }
            }
        }
        self.fft2(&mut buf, true);
        for (b, k) in buf.iter_mut().zip(&self.spec) {
            *b *= k;
        }
        self.fft2(&mut buf, false);
        let norm = 1.0 / (self.px * self.py) as f64;
        let mut out = vec![C64::new(0.0, 0.0); g.len()];
        for iy in 0..g.ny {
            for ix in 0..g.nx {
                out[iy * g.nx + ix] = buf[iy * self.px + ix] * norm;
            }
        }
        out
    }
}

/// Reference evaluation of the transform as an explicit double sum.
pub fn cauchy_transform_direct(f: &QField) -> QField {
    let g = &f.grid;
    let c = g.h * g.h / std::f64::consts::PI;
    let src: Vec<usize> = f.included().collect();
    let values: Vec<Q> = (0..g.len())
        .into_par_iter()
        .map(|i| {
            if !g.mask[i] {
                return nan_q();
            }
            let z = g.node(i);
            let mut acc = Q::zero();
            for &j in &src {
                if j != i {
                    acc += Q::cmul(c / (z - g.node(j)), f.values[j]);
                }
            }
            acc
        })
        .collect();
    QField::from_values(g, values)
}

/// `I(f)` on every included node of the grid.
pub fn cauchy_transform(f: &QField) -> QField {
    let g = &f.grid;
    let n_src = f.count();
    let n_out = g.included().count();
    if (n_src as f64) * (n_out as f64) < 4.0e6 {
        return cauchy_transform_direct(f);
    }
    let kernel = g.kernel();
    let (a, b): (Vec<Option<C64>>, Vec<Option<C64>>) = (0..g.len())
        .map(|i| match f.get(i) {
            Some(q) => {
                let (a, b) = q.to_pair();
                (Some(a), Some(b))
            }
            None => (None, None),
        })
        .unzip();
    let ga = kernel.convolve(g, &a);
    let gb = kernel.convolve(g, &b);
    let values = (0..g.len())
        .map(|i| if g.mask[i] { Q::from_pair(ga[i], gb[i]) } else { nan_q() })
        .collect();
    QField::from_values(g, values)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeumannReport {
    pub iterations: usize,
    pub last_update: f64,
    /// `‖∂̄ξ − Vξ‖ / ‖ξ‖` in L² over nodes with a full stencil.
    pub residual: f64,
}

const MAX_ITER: usize = 200;
const TOL: f64 = 1e-10;
const BLOWUP: f64 = 1e8;

fn plain_norm(f: &QField) -> f64 {
    f.included().map(|i| f.values[i].norm_sq()).sum::<f64>().sqrt()
}

fn iterate<F>(seed: &QField, apply: F) -> Result<(QField, usize, f64), FieldError>
where
    F: Fn(&QField) -> QField,
{
    let seed_norm = plain_norm(seed).max(f64::MIN_POSITIVE);
    let mut xi = seed.clone();
    let mut update = f64::INFINITY;
    for it in 1..=MAX_ITER {
        let next = seed.add(&apply(&xi));
        let n = plain_norm(&next);
        update = plain_norm(&next.sub(&xi)) / n.max(f64::MIN_POSITIVE);
        if !n.is_finite() || n > BLOWUP * seed_norm {
            return Err(FieldError::NoConvergence { iterations: it, last_update: update });
        }
        xi = next;
        if update < TOL {
            return Ok((xi, it, update));
        }
    }
    Err(FieldError::NoConvergence { iterations: MAX_ITER, last_update: update })
}

fn residual(xi: &QField, target: impl Fn(&QField) -> QField) -> Result<f64, FieldError> {
    let (_, dbar) = wirtinger(xi)?;
    let r = dbar.sub(&target(xi));
    let denom = xi.clone().restrict(&r.mask).l2_norm_sq().sqrt();
    Ok(r.l2_norm_sq().sqrt() / denom.max(f64::MIN_POSITIVE))
}

/// Solves `ξ = seed + I(Vξ)`, a solution of `∂̄ξ = Vξ`.
pub fn neumann_resolve(v: &QField, seed: &QField) -> Result<(QField, NeumannReport), FieldError> {
    let (xi, iterations, last_update) = iterate(seed, |x| cauchy_transform(&v.mul(x)))?;
    let residual = residual(&xi, |x| v.mul(x))?;
    Ok((xi, NeumannReport { iterations, last_update, residual }))
}

/// Solves `ξ = seed + I(ξW)`, a solution of `∂̄ξ = ξW`.
pub fn neumann_resolve_right(w: &QField, seed: &QField) -> Result<(QField, NeumannReport), FieldError> {
    let (xi, iterations, last_update) = iterate(seed, |x| cauchy_transform(&x.mul(w)))?;
    let residual = residual(&xi, |x| x.mul(w))?;
    Ok((xi, NeumannReport { iterations, last_update, residual }))
}
