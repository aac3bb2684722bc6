//! The free Dirac operator on P¹: the fundamental solution `F_λ` of
//! `λ² + (J∂̄)²`, its kernel `K_λ`, the S³ action on sections of the
//! tautological bundle, and the estimates that control the kernel.
//!
//! Sections live on the `z₁` chart. Their length is
//! `|ξ|_E(z) = √(1+|z|²)·|ξ(z)|` and norms integrate against the
//! Fubini–Study measure `(1+|z|²)⁻² dμ`.

use std::f64::consts::{E, PI};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use quadrature::double_exponential::integrate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{ChartGrid, Measure, QField};
use crate::Q;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiracError {
    #[error("antipodal pair: 1 + z·w̄ = 0 for z = {z}, w = {w}")]
    AntipodalPair { z: C64, w: C64 },
    #[error("α must be a unit quaternion, |α| = {0}")]
    NotUnit(f64),
}

/// Below this `|λ|π` the sinh and cosh ratios switch to their series.
const SMALL_LAMBDA: f64 = 1e-4;
const PANEL_TOL: f64 = 1e-14;

/// `sinh(λx) / sinh(λπ)` for `x ∈ [0, π]`.
fn sinh_ratio(lambda: f64, x: f64) -> f64 {
    let l = lambda.abs();
    if l * PI < SMALL_LAMBDA {
        let a2 = l * l;
        return (x / PI) * (1.0 + a2 * x * x / 6.0) / (1.0 + a2 * PI * PI / 6.0);
    }
    (-l * (PI - x)).exp() * (-(-2.0 * l * x).exp_m1()) / (-(-2.0 * l * PI).exp_m1())
}

/// `2λ·cosh(λx) / sinh(λπ)` for `x ∈ [0, π]`.
fn cosh_ratio(lambda: f64, x: f64) -> f64 {
    let l = lambda.abs();
    if l * PI < SMALL_LAMBDA {
        let a2 = l * l;
        return (2.0 / PI) * (1.0 + a2 * x * x / 2.0) / (1.0 + a2 * PI * PI / 6.0);
    }
    2.0 * l * (-l * (PI - x)).exp() * (1.0 + (-2.0 * l * x).exp()) / (-(-2.0 * l * PI).exp_m1())
}

/// `∫₀^∞ g(r·cosh u) du`, on panels that double `s = r·cosh u`, stopping
/// once a panel adds less than `1e-17` of the total.
fn cosh_substituted(r: f64, g: impl Fn(f64) -> f64) -> f64 {
    let f = |u: f64| g(r * u.cosh());
    let (mut total, mut a, mut s) = (0.0, 0.0, r);
    for _ in 0..400 {
        let s_next = 2.0 * s;
        let b = (s_next / r).acosh();
        let scale = f(a).abs().max(f(b).abs()) * (b - a);
        let part = if scale > 0.0 { integrate(f, a, b, PANEL_TOL * scale).integral } else { 0.0 };
        total += part;
        (a, s) = (b, s_next);
        if s > 8.0 * r.max(1.0) && part.abs() <= 1e-17 * total.abs() {
            break;
        }
    }
    total
}

/// `F_λ(r) = (2/π) ∫_r^∞ sinh(λ(π − 2 arctan s))/sinh(λπ) · √(1+r²)/√(s²−r²) · ds/(1+s²)`,
/// evaluated after `s = r·cosh u`. `F_λ(0) = +∞` (logarithmic divergence).
pub fn flambda(lambda: f64, r: f64) -> f64 {
    if r.is_nan() || r < 0.0 || !lambda.is_finite() {
        return f64::NAN;
    }
    if r == 0.0 {
        return f64::INFINITY;
    }
    let c = (1.0 + r * r).sqrt();
    2.0 / PI * cosh_substituted(r, |s| sinh_ratio(lambda, PI - 2.0 * s.atan()) * c / (1.0 + s * s))
}

/// `F_λ′(r)` from the differentiated integral
/// `(π/2)F_λ′(r) = −(r√(1+r²))⁻¹ ∫_r^∞ 2λcosh(λ(π − 2 arctan s))/sinh(λπ) · s/√(s²−r²) · ds/(1+s²)`.
pub fn flambda_prime(lambda: f64, r: f64) -> f64 {
    if r.is_nan() || r < 0.0 || !lambda.is_finite() {
        return f64::NAN;
    }
    if r == 0.0 {
        return f64::NEG_INFINITY;
    }
    let i = cosh_substituted(r, |s| cosh_ratio(lambda, PI - 2.0 * s.atan()) * s / (1.0 + s * s));
    -2.0 / PI * i / (r * (1.0 + r * r).sqrt())
}

/// Five-point central difference of [`flambda`] with step `1e-3·r`.
pub fn flambda_prime_fd(lambda: f64, r: f64) -> f64 {
    let d = 1e-3 * r;
    let f = |k: f64| flambda(lambda, r + k * d);
    (f(-2.0) - 8.0 * f(-1.0) + 8.0 * f(1.0) - f(2.0)) / (12.0 * d)
}

/// Both integral forms of the Euclidean fundamental solution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FInfty {
    /// `(2/π) ∫_r^∞ e^{−2s}/√(s²−r²) ds`
    pub radial: f64,
    /// `(1/π) ∫₀^∞ e^{−t} e^{−r²/t} dt/t`
    pub heat: f64,
}

impl FInfty {
    pub fn rel_diff(&self) -> f64 {
        (self.radial - self.heat).abs() / self.radial.abs().max(self.heat.abs())
    }
}

pub fn finfty_forms(r: f64) -> FInfty {
    if r.is_nan() || r < 0.0 {
        return FInfty { radial: f64::NAN, heat: f64::NAN };
    }
    if r == 0.0 {
        return FInfty { radial: f64::INFINITY, heat: f64::INFINITY };
    }
    // radial form with s = r + x²: (4/π)e^{−2r} ∫₀^∞ e^{−2x²}/√(2r + x²) dx
    let g = |x: f64| (-2.0 * x * x).exp() / (2.0 * r + x * x).sqrt();
    let mut radial = 0.0;
    let mut a = 0.0;
    let mut b = (2.0 * r).sqrt().min(0.5);
    while a < 7.0 {
        let b1 = b.min(7.0);
        radial += integrate(g, a, b1, PANEL_TOL * g(a) * (b1 - a)).integral;
        (a, b) = (b1, 2.0 * b1);
    }
    let radial = 4.0 / PI * (-2.0 * r).exp() * radial;

    // heat form with t = r·e^y: (2/π)e^{−2r} ∫₀^∞ exp(−4r·sinh²(y/2)) dy
    let h = |y: f64| (-4.0 * r * (0.5 * y).sinh().powi(2)).exp();
    let ymax = (1.0 + 45.0 / r).acosh();
    let mut heat = 0.0;
    let panels = 16;
    for k in 0..panels {
        let (a, b) = (ymax * k as f64 / panels as f64, ymax * (k + 1) as f64 / panels as f64);
        heat += integrate(h, a, b, PANEL_TOL * ymax).integral;
    }
    let heat = 2.0 / PI * (-2.0 * r).exp() * heat;
    FInfty { radial, heat }
}

/// `F_∞(r)`, the radial form.
pub fn finfty(r: f64) -> f64 {
    finfty_forms(r).radial
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub r: f64,
    pub lambdas: Vec<f64>,
    /// `F_λ(r/λ)` at each λ.
    pub values: Vec<f64>,
    pub extrapolated: f64,
    pub limit: f64,
    pub error: f64,
}

/// `F_λ(r/λ)` at λ = 10, 40, 160 and its Richardson extrapolation, which
/// removes the `λ⁻²` and `λ⁻⁴` terms.
pub fn blowup_limit(r: f64) -> BlowupReport {
    let lambdas = vec![10.0, 40.0, 160.0];
    let values: Vec<f64> = lambdas.iter().map(|&l| flambda(l, r / l)).collect();
    let r1 = |a: f64, b: f64| (16.0 * b - a) / 15.0;
    let (p, q) = (r1(values[0], values[1]), r1(values[1], values[2]));
    let extrapolated = (256.0 * q - p) / 255.0;
    let limit = finfty(r);
    BlowupReport { r, lambdas, values, extrapolated, limit, error: (extrapolated - limit).abs() }
}

// ---------------------------------------------------------------------------
// kernel and S³ action

/// `K_λ(z, w) = (1 + z·w̄)⁻¹ F_λ(|(w − z)/(1 + z̄w)|)`. On the diagonal the
/// value is `+∞`.
pub fn kernel_k(lambda: f64, z: C64, w: C64) -> Result<Q, DiracError> {
    let den = C64::new(1.0, 0.0) + z * w.conj();
    if den.norm() <= 1e-12 * (1.0 + z.norm() * w.norm()) {
        return Err(DiracError::AntipodalPair { z, w });
    }
    let d = ((w - z) / den).norm();
    if d == 0.0 {
        return Ok(Q::real(f64::INFINITY));
    }
    Ok(Q::from_complex(flambda(lambda, d) / den))
}

/// `√((1+|z|²)(1+|w|²))·|K_λ(z, w)|`, which depends only on the chordal
/// distance of `z` and `w`.
pub fn kernel_length(lambda: f64, z: C64, w: C64) -> Result<f64, DiracError> {
    Ok(kernel_k(lambda, z, w)?.norm() * ((1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr())).sqrt())
}

/// `(α₁, α₂)` with `α = α₁ + jα₂`.
fn split(alpha: Q) -> (C64, C64) {
    (C64::new(alpha.w, alpha.x), C64::new(alpha.y, -alpha.z))
}

fn check_unit(alpha: Q) -> Result<(C64, C64), DiracError> {
    if (alpha.norm() - 1.0).abs() > 1e-9 {
        return Err(DiracError::NotUnit(alpha.norm()));
    }
    Ok(split(alpha))
}

/// `α⁻¹z = (α₁z − α₂)/(ᾱ₁ + ᾱ₂z)`; `None` at the pole.
pub fn su2_point(alpha: Q, z: C64) -> Option<C64> {
    let (a1, a2) = split(alpha);
    let den = a1.conj() + a2.conj() * z;
    (den.norm() > 1e-14).then(|| (a1 * z - a2) / den)
}

/// A section of the tautological bundle on the `z₁` chart.
#[derive(Clone, Debug)]
pub struct SpinorField {
    pub values: QField,
}

impl SpinorField {
    pub fn new(values: QField) -> Self {
        SpinorField { values }
    }

    /// `|ξ|_E = √(1+|z|²)·|ξ|` per node.
    pub fn length(&self) -> Vec<Option<f64>> {
        let g = &self.values.grid;
        (0..g.len()).map(|i| self.values.get(i).map(|v| (1.0 + g.node(i).norm_sqr()).sqrt() * v.norm())).collect()
    }

    /// `‖ξ‖_p = (∫ |ξ|^p (1+|z|²)^{p/2−2} dμ)^{1/p}` over the sampled chart.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let g = &self.values.grid;
        let h2 = g.h * g.h;
        let s: f64 = self
            .values
            .included()
            .map(|i| self.values.values[i].norm().powf(p) * (1.0 + g.node(i).norm_sqr()).powf(0.5 * p - 2.0) * h2)
            .sum();
        s.powf(1.0 / p)
    }
}

/// `(α·ξ)(z) = (ᾱ₁ + ᾱ₂z)⁻¹ ξ(α⁻¹z)`, resampled bilinearly. Nodes whose
/// preimage leaves the chart are masked.
pub fn su2_act(alpha: Q, xi: &SpinorField) -> Result<SpinorField, DiracError> {
    let (a1, a2) = check_unit(alpha)?;
    let src = &xi.values;
    let out = QField::from_fn(&src.grid, |z| {
        let nan = Q::new(f64::NAN, f64::NAN, f64::NAN, f64::NAN);
        let den = a1.conj() + a2.conj() * z;
        if den.norm() <= 1e-14 {
            return nan;
        }
        let pre = (a1 * z - a2) / den;
        // preimages on a node (rotations by quarter turns, the identity) are read directly
        let on_node = src.grid.nearest(pre).filter(|&i| (src.grid.node(i) - pre).norm() < 1e-9 * src.grid.h);
        let v = match on_node {
            Some(i) => src.get(i),
            None => src.interpolate(pre),
        };
        match v {
            Some(v) => Q::from_complex(den.inv()) * v,
            None => nan,
        }
    });
    Ok(SpinorField { values: out })
}

/// Smooth partition of unity on P¹: `ρ(z₁) + ρ(z₂) = 1` with `z₂ = 1/z₁`.
fn partition(z: C64) -> f64 {
    1.0 / (1.0 + z.norm_sqr().powi(8))
}

/// Fubini–Study area of P¹ from lattice sums on both charts (radius 3),
/// glued by a smooth partition of unity.
pub fn fubini_study_area(h: f64) -> f64 {
    let g = ChartGrid::p1_chart(3.0, h).with_measure(Measure::FubiniStudy);
    // the partition is symmetric under z ↦ 1/z, so both charts contribute equally
    2.0 * g.included().map(|i| g.weight[i] * partition(g.node(i))).sum::<f64>()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakL2Report {
    /// `sup_t t·μ{f > t}^{1/2}` over resolved levels.
    pub sup: f64,
    /// `√π`, the exact value.
    pub exact: f64,
    /// Largest level used: level sets below radius `10h` are not resolved.
    pub t_max: f64,
    pub total_measure: f64,
}

/// Weak-L² quasi-norm of `f(z) = √(1+|z|²)/|z|` on P¹ (chart 1 for
/// `|z| ≤ 1`, chart 2 with `f = √(1+|z₂|²)` for the rest).
pub fn weak_l2_check(h: f64) -> WeakL2Report {
    let g = ChartGrid::p1_chart(1.0, h).with_measure(Measure::FubiniStudy);
    let mut samples: Vec<(f64, f64)> = vec![];
    for i in g.included() {
        let z = g.node(i);
        let r2 = z.norm_sqr();
        if r2 > 0.0 {
            samples.push((((1.0 + r2) / r2).sqrt(), g.weight[i]));
        }
        if r2 < 1.0 - 1e-12 {
            samples.push(((1.0 + r2).sqrt(), g.weight[i]));
        }
    }
    samples.sort_by(|a, b| b.0.total_cmp(&a.0));
    let t_max = (1.0 + 100.0 * h * h).sqrt() / (10.0 * h);
    let mut mass: f64 = 0.0;
    let mut sup: f64 = 0.0;
    let mut k = 0;
    while k < samples.len() {
        let t = samples[k].0;
        if t <= t_max {
            sup = sup.max(t * mass.sqrt());
        }
        while k < samples.len() && samples[k].0 == t {
            mass += samples[k].1;
            k += 1;
        }
    }
    WeakL2Report { sup, exact: PI.sqrt(), t_max, total_measure: mass }
}

// ---------------------------------------------------------------------------
// estimates

/// `b(λ, y) = (λy·cosh(λ(π−y)) + sinh(λ(π−y))) / sinh(λπ)`, `λ ≥ 0`.
pub fn b_bound(lambda: f64, y: f64) -> f64 {
    let l = lambda.abs();
    if l * PI < SMALL_LAMBDA {
        return 1.0 - l * l * (0.5 * y * y - y * y * y / (3.0 * PI));
    }
    let (e1, e2) = ((-l * y).exp(), (-l * (2.0 * PI - y)).exp());
    (l * y * (e1 + e2) + (e1 - e2)) / (-(-2.0 * l * PI).exp_m1())
}

/// `(1/π) e^{−2|λ| arctan r} ln((√(1+r²)+1)/(√(1+r²)−1))`
pub fn bound_i(lambda: f64, r: f64) -> f64 {
    let c = (1.0 + r * r).sqrt();
    let log = 2.0 * ((c + 1.0) / r).ln();
    (-2.0 * lambda.abs() * r.atan()).exp() * log / PI
}

/// The bound on `F_λ(r)` implied by `r|λ|F_λ(r) ≤ 1/(2e)`.
pub fn bound_ii(lambda: f64, r: f64) -> f64 {
    1.0 / (2.0 * E * r * lambda.abs())
}

/// `(2/π)·b(|λ|, arctan r)`, bounding `−r(1+r²)F_λ′(r)`.
pub fn bound_iv(lambda: f64, r: f64) -> f64 {
    2.0 / PI * b_bound(lambda, r.atan())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub lambda: f64,
    pub r: f64,
    pub f: f64,
    pub bound_i: f64,
    pub bound_ii: f64,
    /// `−r(1+r²)F_λ′(r)`
    pub slope: f64,
    pub bound_iv: f64,
    /// Relative margins `1 − value/bound`.
    pub margin_i: f64,
    pub margin_ii: f64,
    pub margin_iv: f64,
}

impl BoundRow {
    pub fn new(lambda: f64, r: f64) -> Self {
        let f = flambda(lambda, r);
        let slope = -r * (1.0 + r * r) * flambda_prime(lambda, r);
        let (bi, bii, biv) = (bound_i(lambda, r), bound_ii(lambda, r), bound_iv(lambda, r));
        BoundRow {
            lambda,
            r,
            f,
            bound_i: bi,
            bound_ii: bii,
            slope,
            bound_iv: biv,
            margin_i: 1.0 - f / bi,
            margin_ii: 1.0 - 2.0 * E * r * lambda.abs() * f,
            margin_iv: 1.0 - slope / biv,
        }
    }

    pub fn margin(&self) -> f64 {
        self.margin_i.min(self.margin_ii).min(self.margin_iv)
    }

    /// Strict positivity of `F` and of `−F′` and all three upper bounds.
    pub fn holds(&self) -> bool {
        self.f > 0.0 && self.slope > 0.0 && self.margin() >= 0.0
    }
}

/// The 40×40 lattice: λ geometric on `[0.1, 50]`, r geometric on `[0.01, 20]`.
pub fn default_lattice() -> (Vec<f64>, Vec<f64>) {
    let geo = |a: f64, b: f64, n: usize| (0..n).map(|k| a * (b / a).powf(k as f64 / (n - 1) as f64)).collect::<Vec<_>>();
    (geo(0.1, 50.0, 40), geo(0.01, 20.0, 40))
}

pub fn bound_suite(lambdas: &[f64], rs: &[f64]) -> Vec<BoundRow> {
    let pairs: Vec<(f64, f64)> = lambdas.iter().flat_map(|&l| rs.iter().map(move |&r| (l, r))).collect();
    pairs.par_iter().map(|&(l, r)| BoundRow::new(l, r)).collect()
}

/// `e^{λε/2}·b(λ, ε)` at each λ.
pub fn b_decay(eps: f64, lambdas: &[f64]) -> Vec<f64> {
    lambdas.iter().map(|&l| (0.5 * l * eps).exp() * b_bound(l, eps)).collect()
}

/// A smooth bump `e^{−|z−c|²/σ²}·q` on a P¹ chart grid, for action checks.
pub fn bump(grid: &Arc<ChartGrid>, center: C64, sigma: f64, q: Q) -> SpinorField {
    SpinorField::new(QField::from_fn(grid, |z| q * (-(z - center).norm_sqr() / (sigma * sigma)).exp()))
}
