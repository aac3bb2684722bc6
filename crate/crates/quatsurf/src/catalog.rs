//! Closed-form surfaces with their Kodaira and Weierstrass data sampled
//! onto default grids.
//!
//! | name                 | domain                        | deg E | W   |
//! |----------------------|-------------------------------|-------|-----|
//! | `plane`              | `[−1,1]²`                     | 0     | 0   |
//! | `catenoid`           | annulus `0.3 ≤ |z| ≤ 3`       | 0     | 0   |
//! | `associated`         | annulus, slit along `z < 0`   | 0     | 0   |
//! | `sphere`             | both P¹ charts, `|z| ≤ 1.5`   | 1     | 4π  |
//! | `inverted_catenoid`  | both P¹ charts, `|z| ≤ 1.5`   | 1     | 8π  |

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::conformal::SurfaceChart;
use crate::field::{ChartGrid, Potential01, QField, Region};
use crate::isothermic::MultiplierPair;
use crate::representations::{pairing10_at, Cocycle, KChart, KodairaData, WChart, WeierstrassData};
use crate::Q;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("unknown surface {0:?} (known: {})", NAMES.join(", "))]
    UnknownSurface(String),
    #[error("bad parameters for {name}: {reason}")]
    BadParams { name: String, reason: String },
}

pub const NAMES: [&str; 5] = ["plane", "catenoid", "associated", "sphere", "inverted_catenoid"];

pub type Form = Arc<dyn Fn(C64) -> Q + Send + Sync>;

/// Closed forms of one chart.
#[derive(Clone)]
pub struct ChartForms {
    pub f: Form,
    pub upsilon: Form,
    pub phi: Form,
    pub v: Form,
    pub chi: Form,
    pub psi: Form,
    pub u: Form,
    pub b: Form,
}

impl std::fmt::Debug for ChartForms {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ChartForms")
    }
}

impl ChartForms {
    pub fn n(&self, z: C64) -> Q {
        let u = (self.upsilon)(z);
        u.inv() * Q::i() * u
    }

    /// Right normal from the exact differential.
    pub fn r(&self, z: C64) -> Q {
        let (_, a, b) = pairing10_at((self.chi)(z), (self.psi)(z));
        let fx = a + b;
        let fy = Q::i() * (a - b);
        let raw = if fx.norm() >= fy.norm() { fx.inv() * fy } else { -(fy.inv() * fx) };
        let v = raw.im();
        v / v.norm()
    }
}

#[derive(Clone, Debug)]
pub struct EntryChart {
    pub surface: SurfaceChart,
    pub n: QField,
    pub r: QField,
    pub forms: ChartForms,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub h: f64,
    pub charts: Vec<EntryChart>,
    pub kodaira: KodairaData,
    pub weierstrass: WeierstrassData,
    /// `ψ = gχ` for surfaces in Im H with constant complex `g`.
    pub g: Option<C64>,
    /// Constrained Willmore multipliers on chart 0.
    pub multipliers: Option<MultiplierPair>,
    /// Pair `(υ*, φ*)` with `υ*ῡ + φ*φ̄ = 0` on chart 0.
    pub dual_pair: Option<MultiplierPair>,
    pub deg: i32,
    pub expected_willmore: f64,
}

fn c(z: C64) -> Q {
    Q::from_complex(z)
}

/// Replaces the value at `z = 0` by the mean over four nearby points, for
/// forms whose formula is singular there but whose section is not.
fn regular<F: Fn(C64) -> Q + Send + Sync + 'static>(f: F) -> Form {
    Arc::new(move |z: C64| {
        if z.norm() > 1e-12 {
            return f(z);
        }
        let e = 1e-7;
        let pts = [C64::new(e, 0.0), C64::new(0.0, e), C64::new(-e, 0.0), C64::new(0.0, -e)];
        pts.iter().map(|&p| f(p)).sum::<Q>() * 0.25
    })
}

/// Form with a logarithmic singularity at `z = 0`: the node there is left
/// out of the sampled field.
fn unbounded_at_zero<F: Fn(C64) -> Q + Send + Sync + 'static>(f: F) -> Form {
    Arc::new(move |z: C64| if z.norm() > 1e-12 { f(z) } else { Q::new(f64::NAN, f64::NAN, f64::NAN, f64::NAN) })
}

fn form<F: Fn(C64) -> Q + Send + Sync + 'static>(f: F) -> Form {
    Arc::new(f)
}

// ---------------------------------------------------------------------------
// closed forms

/// `F = αzβ`.
pub fn plane_forms(alpha: Q, beta: Q) -> ChartForms {
    let ai = alpha.inv();
    ChartForms {
        f: form(move |z| alpha * c(z) * beta),
        upsilon: form(move |_| ai),
        phi: form(move |z| c(z) * beta),
        v: form(|_| Q::zero()),
        chi: form(move |_| Q::j() * alpha.conj()),
        psi: form(move |_| beta),
        u: form(|_| Q::zero()),
        b: form(|_| Q::zero()),
    }
}

fn catenoid_f(z: C64) -> Q {
    Q::i() * z.norm_sqr().ln() + c(z.conj() + 1.0 / z) * Q::j()
}

fn catenoid_upsilon(z: C64) -> Q {
    -(Q::j() * (Q::one() - c(1.0 / z) * Q::k()).inv())
}

fn catenoid_chi(z: C64) -> Q {
    Q::one() + c(1.0 / z) * Q::k()
}

fn catenoid_v(z: C64) -> Q {
    Q::k() * c(z.conj() / z / (1.0 + z.norm_sqr()))
}

fn catenoid_b(z: C64) -> Q {
    c(-1.0 / z / (1.0 + z.norm_sqr()))
}

/// Associated family member `h ∈ S¹`; `h = 1` is the catenoid
/// `F = ln(zz̄)i + (z̄ + z⁻¹)j`. For other `h` the map is multivalued and
/// is cut along the negative real axis.
pub fn associated_forms(h: C64) -> ChartForms {
    let f = move |z: C64| Q::i() * (2.0 * (h * z.ln()).re) + c(h / z + h.conj() * z.conj()) * Q::j();
    ChartForms {
        f: form(f),
        upsilon: form(catenoid_upsilon),
        phi: form(move |z| catenoid_upsilon(z) * f(z)),
        v: form(catenoid_v),
        chi: form(catenoid_chi),
        psi: form(move |z| c(h) * catenoid_chi(z)),
        u: form(|_| Q::zero()),
        b: form(catenoid_b),
    }
}

pub fn catenoid_forms() -> ChartForms {
    let mut f = associated_forms(C64::new(1.0, 0.0));
    f.f = form(catenoid_f);
    f.phi = form(|z| catenoid_upsilon(z) * catenoid_f(z));
    f
}

/// `υ* = −½z⁻¹j(z + k)(1 + |z|²)⁻¹`.
pub fn catenoid_upsilon_star(z: C64) -> Q {
    -(c(0.5 / z) * Q::j() * (c(z) + Q::k())) * (1.0 / (1.0 + z.norm_sqr()))
}

fn sphere_chart1() -> ChartForms {
    let jzi = |z: C64| Q::j() * c(z) + Q::i();
    ChartForms {
        f: form(|z| {
            let r2 = z.norm_sqr();
            (Q::i() * (r2 - 1.0) - Q::j() * c(z) * 2.0) / (r2 + 1.0)
        }),
        upsilon: form(|z| c(z) + Q::k()),
        phi: form(|z| c(z) * Q::i() - Q::j()),
        v: form(|_| Q::zero()),
        chi: form(move |z| -jzi(z).inv()),
        psi: form(move |z| -(jzi(z).inv() * 2.0)),
        u: form(|z| Q::k() / (1.0 + z.norm_sqr())),
        b: form(|z| c(-z.conj() / (1.0 + z.norm_sqr()))),
    }
}

fn sphere_chart2() -> ChartForms {
    let ups = |z: C64| Q::one() + c(z) * Q::k();
    ChartForms {
        f: form(|z| {
            let r2 = z.norm_sqr();
            (Q::i() * (1.0 - r2) - Q::j() * c(z.conj()) * 2.0) / (1.0 + r2)
        }),
        upsilon: form(ups),
        phi: form(|z| Q::i() - Q::j() * c(z.conj())),
        v: form(|_| Q::zero()),
        chi: form(move |z| (Q::j() * ups(z)).conj().inv()),
        psi: form(|z| (Q::j() + Q::i() * c(z)).inv() * 2.0),
        u: form(|z| -(Q::k() / (1.0 + z.norm_sqr()))),
        b: form(|z| c(-z.conj() / (1.0 + z.norm_sqr()))),
    }
}

/// `zF` for the catenoid, finite at 0.
fn catenoid_zf(z: C64) -> Q {
    if z.norm() == 0.0 {
        return Q::j();
    }
    Q::i() * c(z * z.norm_sqr().ln()) + Q::j() * (z.norm_sqr() + 1.0)
}

/// `z̄₂·F(1/z₂)`, finite at 0.
fn catenoid_zf2(z2: C64) -> Q {
    if z2.norm() == 0.0 {
        return Q::j();
    }
    c(-z2.conj() * z2.norm_sqr().ln()) * Q::i() + Q::j() * (z2.norm_sqr() + 1.0)
}

fn inv_cat_upsilon1(z: C64) -> Q {
    -(Q::j() * (c(z) - Q::k()).inv()) * (catenoid_zf(z) + c(z) * Q::i())
}

fn inv_cat_phi1(z: C64) -> Q {
    -(Q::j() * (c(z) - Q::k()).inv()) * (catenoid_zf(z) * Q::i() + c(z))
}

fn inv_cat_upsilon2(z2: C64) -> Q {
    let l = -(Q::j() * (Q::one() - c(z2.conj()) * Q::k()).inv());
    l * (catenoid_zf2(z2) + c(z2.conj()) * Q::i())
}

fn inv_cat_phi2(z2: C64) -> Q {
    let l = -(Q::j() * (Q::one() - c(z2.conj()) * Q::k()).inv());
    l * (catenoid_zf2(z2) * Q::i() + c(z2.conj()))
}

/// `ψ̃ = −2ψ(F + i)⁻¹` on chart 1.
fn inv_cat_psi1(z: C64) -> Q {
    -(catenoid_chi(z) * (catenoid_f(z) + Q::i()).inv() * 2.0)
}

/// `(ψυ̃⁻¹)` on chart 1, whose parts shift `U` and `B`.
fn inv_cat_shift(z: C64) -> Q {
    catenoid_chi(z) * inv_cat_upsilon1(z).inv()
}

fn inv_cat_u1(z: C64) -> Q {
    -inv_cat_shift(z).minus()
}

fn inv_cat_b1(z: C64) -> Q {
    catenoid_b(z) - inv_cat_shift(z).plus()
}

fn inverted_catenoid_chart1() -> ChartForms {
    ChartForms {
        f: regular(|z| inv_cat_upsilon1(z).inv() * inv_cat_phi1(z)),
        upsilon: form(inv_cat_upsilon1),
        phi: form(inv_cat_phi1),
        v: regular(catenoid_v),
        chi: form(|z| (Q::j() * inv_cat_upsilon1(z)).conj().inv()),
        psi: regular(inv_cat_psi1),
        u: unbounded_at_zero(inv_cat_u1),
        b: regular(inv_cat_b1),
    }
}

/// Chart 2 through the gluing rules with `f₂₁ = z₂`: `ψ₂ = −z₂⁻¹ψ₁`,
/// `U₂ = (dz₁/dz₂)‾·f′U₁f′⁻¹` with `f′ = −z₂⁻¹`, `B₂ = −z₂⁻¹ − z₂⁻²B₁`.
fn inverted_catenoid_chart2() -> ChartForms {
    ChartForms {
        f: regular(|z2| inv_cat_upsilon2(z2).inv() * inv_cat_phi2(z2)),
        upsilon: form(inv_cat_upsilon2),
        phi: form(inv_cat_phi2),
        v: regular(|z2| -(Q::k() * c(z2.conj() / z2 / (1.0 + z2.norm_sqr())))),
        chi: form(|z2| (Q::j() * inv_cat_upsilon2(z2)).conj().inv()),
        psi: regular(|z2| -(c(1.0 / z2) * inv_cat_psi1(1.0 / z2))),
        u: unbounded_at_zero(|z2| {
            let fp = c(-1.0 / z2);
            c((-1.0 / (z2 * z2)).conj()) * fp * inv_cat_u1(1.0 / z2) * fp.inv()
        }),
        b: regular(|z2| c(-1.0 / z2) - c(1.0 / (z2 * z2)) * inv_cat_b1(1.0 / z2)),
    }
}

// ---------------------------------------------------------------------------
// sampling

fn sample_chart(name: &str, grid: &Arc<ChartGrid>, forms: ChartForms, region: Region) -> (EntryChart, KChart, WChart) {
    let s = |f: &Form| {
        let f = f.clone();
        QField::from_fn(grid, move |z| f(z))
    };
    let chi = s(&forms.chi);
    let psi = s(&forms.psi);
    let d = chi.zip(&psi, |_, a, b| pairing10_at(a, b).1);
    let dbar = chi.zip(&psi, |_, a, b| pairing10_at(a, b).2);
    let surface = SurfaceChart::new(name, s(&forms.f)).with_exact_df(d, dbar);
    let fc = forms.clone();
    let n = QField::from_fn(grid, move |z| fc.n(z));
    let fc = forms.clone();
    let r = QField::from_fn(grid, move |z| fc.r(z));
    let k = KChart { v: Potential01(s(&forms.v)), upsilon: s(&forms.upsilon), phi: s(&forms.phi), region };
    let w = WChart { u: Potential01(s(&forms.u)), b: s(&forms.b), chi, psi, region };
    (EntryChart { surface, n, r, forms }, k, w)
}

struct Assembly {
    charts: Vec<EntryChart>,
    kodaira: KodairaData,
    weierstrass: WeierstrassData,
}

fn assemble(name: &str, charts: Vec<(Arc<ChartGrid>, ChartForms, Region)>, cocycle: Option<Cocycle>) -> Assembly {
    let mut out = Assembly {
        charts: vec![],
        kodaira: KodairaData { charts: vec![], cocycle },
        weierstrass: WeierstrassData { charts: vec![], cocycle },
    };
    for (i, (grid, forms, region)) in charts.into_iter().enumerate() {
        let label = if out.kodaira.cocycle.is_some() { format!("{name}/chart{}", i + 1) } else { name.to_string() };
        let (e, k, w) = sample_chart(&label, &grid, forms, region);
        out.charts.push(e);
        out.kodaira.charts.push(k);
        out.weierstrass.charts.push(w);
    }
    out
}

fn p1_atlas(h: f64) -> (Arc<ChartGrid>, Arc<ChartGrid>) {
    (Arc::new(ChartGrid::p1_chart(1.5, h)), Arc::new(ChartGrid::p1_chart(1.5, h)))
}

pub const CHART1_REGION: Region = Region::Disk { radius: 1.0, closed: true };
pub const CHART2_REGION: Region = Region::Disk { radius: 1.0, closed: false };

fn quat_param(p: &[f64]) -> Q {
    Q::new(p[0], p[1], p[2], p[3])
}

/// Builds a catalog entry at spacing `h`.
///
/// Parameters: `plane` takes eight reals `(α, β)` for `F = αzβ`
/// (default `α = j`, `β = 1`); `associated` takes `(Re h, Im h)` with
/// `|h| = 1` (default `h = 1`). The rest take none.
pub fn make(name: &str, params: &[f64], h: f64) -> Result<CatalogEntry, CatalogError> {
    let bad = |reason: &str| CatalogError::BadParams { name: name.to_string(), reason: reason.to_string() };
    let no_params = || if params.is_empty() { Ok(()) } else { Err(bad("takes no parameters")) };
    let annulus = || Arc::new(ChartGrid::annulus(C64::new(0.0, 0.0), 0.3, 3.0, h));
    match name {
        "plane" => {
            let (alpha, beta) = match params.len() {
                0 => (Q::j(), Q::one()),
                8 => (quat_param(&params[..4]), quat_param(&params[4..])),
                _ => return Err(bad("expected eight reals (alpha, beta)")),
            };
            if alpha.norm() < 1e-12 || beta.norm() < 1e-12 {
                return Err(bad("alpha and beta must be nonzero"));
            }
            let grid = Arc::new(ChartGrid::rectangle(-1.0, 1.0, -1.0, 1.0, h));
            let a = assemble(name, vec![(grid, plane_forms(alpha, beta), Region::Whole)], None);
            Ok(finish(name, h, a, None, None, None, 0, 0.0))
        }
        "catenoid" => {
            no_params()?;
            let a = assemble(name, vec![(annulus(), catenoid_forms(), Region::Whole)], None);
            let grid = a.charts[0].surface.f.grid.clone();
            let ups = a.kodaira.charts[0].upsilon.clone();
            let phi = a.kodaira.charts[0].phi.clone();
            let multipliers = MultiplierPair {
                upsilon_star: QField::from_fn(&grid, catenoid_upsilon_star),
                phi_star: QField::zeros(&grid),
            };
            let dual = MultiplierPair {
                upsilon_star: phi.map(|z, p| c(1.0 / (z * z)) * p),
                phi_star: ups.map(|z, u| c(1.0 / (z * z)) * u),
            };
            Ok(finish(name, h, a, Some(C64::new(1.0, 0.0)), Some(multipliers), Some(dual), 0, 0.0))
        }
        "associated" => {
            let hh = match params.len() {
                0 => C64::new(1.0, 0.0),
                2 => C64::new(params[0], params[1]),
                _ => return Err(bad("expected (re, im) of a unit complex number")),
            };
            if (hh.norm() - 1.0).abs() > 1e-9 {
                return Err(bad("h must have modulus 1"));
            }
            let a = assemble(name, vec![(annulus(), associated_forms(hh), Region::Whole)], None);
            Ok(finish(name, h, a, Some(hh), None, None, 0, 0.0))
        }
        "sphere" => {
            no_params()?;
            let (g1, g2) = p1_atlas(h);
            let a = assemble(
                name,
                vec![(g1, sphere_chart1(), CHART1_REGION), (g2, sphere_chart2(), CHART2_REGION)],
                Some(Cocycle::monomial(1)),
            );
            Ok(finish(name, h, a, Some(C64::new(2.0, 0.0)), None, None, 1, 4.0 * PI))
        }
        "inverted_catenoid" => {
            no_params()?;
            let (g1, g2) = p1_atlas(h);
            let a = assemble(
                name,
                vec![(g1.clone(), inverted_catenoid_chart1(), CHART1_REGION), (g2, inverted_catenoid_chart2(), CHART2_REGION)],
                Some(Cocycle::monomial(1)),
            );
            let multipliers = MultiplierPair {
                upsilon_star: QField::from_fn(&g1, |z| catenoid_upsilon_star(z) * Q::i() * 0.5),
                phi_star: QField::from_fn(&g1, |z| catenoid_upsilon_star(z) * 0.5),
            };
            Ok(finish(name, h, a, None, Some(multipliers), None, 1, 8.0 * PI))
        }
        _ => Err(CatalogError::UnknownSurface(name.to_string())),
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    name: &str,
    h: f64,
    a: Assembly,
    g: Option<C64>,
    multipliers: Option<MultiplierPair>,
    dual_pair: Option<MultiplierPair>,
    deg: i32,
    expected_willmore: f64,
) -> CatalogEntry {
    CatalogEntry {
        name: name.to_string(),
        h,
        charts: a.charts,
        kodaira: a.kodaira,
        weierstrass: a.weierstrass,
        g,
        multipliers,
        dual_pair,
        deg,
        expected_willmore,
    }
}

/// One line per entry for listings.
pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        "plane" => "F = αzβ on [-1,1]², default α = j, β = 1",
        "catenoid" => "F = ln(zz̄)i + (z̄ + 1/z)j on the annulus 0.3 ≤ |z| ≤ 3",
        "associated" => "associated family (χ, hψ) of the catenoid, |h| = 1",
        "sphere" => "round sphere by stereographic projection, two P¹ charts",
        "inverted_catenoid" => "catenoid under the Möbius map (i, 1, 1, i), compactified on P¹",
        _ => return None,
    })
}
