//! `φ_t = Σ ω_i ∧ δ_i + δ₁₂₃` and `v_t` on a product chart `(4-chart) × T³`, and the torsion
//! `*ψ_t = Θ(φ_t) − v_t`.
//!
//! Chart coordinates are `(p₀ … p₃, s₁, s₂, s₃)`; the `ω_i` depend on the first four only and
//! `δ_i = Σ_j D_ij ds_j` for an orthogonal `D`.

use rayon::prelude::*;
use serde::Serialize;

use super::G2Form;
use crate::error::{GeomError, Result};
use crate::fit::{loglog_slope, SlopeFit};
use crate::gibbons_hawking::estimates::{region_sup, validate_ts};
use crate::gibbons_hawking::{EstimateRegion, GHConfig, GhTriple, Shell};
use crate::kummer_gluing::{gh_blend, GhBlend, GluingSchedule};
use crate::scalar::Scalar;
use crate::tensor::forms::{multi_indices, rank};
use crate::tensor::{form_at, jacobian, DerivativeScheme, Field, Form, FormField, Sampled};

/// Three 2-forms on a 4-chart and three constant orthonormal 1-forms on `T³`.
#[derive(Debug, Clone)]
pub struct TripleWithFlat<W> {
    pub omegas: [W; 3],
    delta: [[f64; 3]; 3],
}

impl<W: FormField> TripleWithFlat<W> {
    /// `delta[i]` holds the components of `δ_i` in `ds₁, ds₂, ds₃`.
    pub fn new(omegas: [W; 3], delta: [[f64; 3]; 3]) -> Result<Self> {
        for w in &omegas {
            if w.dim() != 4 || w.degree() != 2 {
                return Err(GeomError::DomainError("ω_i must be 2-forms on a 4-chart".into()));
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| delta[i][k] * delta[j][k]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot - want).abs() > 1e-12 {
                    return Err(GeomError::Config(format!(
                        "δ_i must be orthonormal: ⟨δ{}, δ{}⟩ = {dot}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self { omegas, delta })
    }

    /// `δ_i = ds_i`.
    pub fn standard(omegas: [W; 3]) -> Self {
        Self { omegas, delta: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] }
    }

    /// A Gibbons–Hawking triple `(ω₁, ω₂, ω₃)` with `ω_α = dx_α ∧ (dτ + A) + U dx_β ∧ dx_γ` enters
    /// as `(ω₃, ω₂, ω₁)`: with the frame `(−e⁰, e¹, e², e³)` this is the pattern of `φ₀`.
    pub fn from_gh_order(gh: [W; 3]) -> Self {
        let [a, b, c] = gh;
        Self::standard([c, b, a])
    }

    pub fn delta(&self) -> &[[f64; 3]; 3] {
        &self.delta
    }

    fn det(&self) -> f64 {
        let d = &self.delta;
        d[0][0] * (d[1][1] * d[2][2] - d[1][2] * d[2][1]) - d[0][1] * (d[1][0] * d[2][2] - d[1][2] * d[2][0])
            + d[0][2] * (d[1][0] * d[2][1] - d[1][1] * d[2][0])
    }

    fn omegas_at<S: Scalar>(&self, x: &[S]) -> Result<[Vec<S>; 3]> {
        Ok([self.omegas[0].eval(&x[..4])?, self.omegas[1].eval(&x[..4])?, self.omegas[2].eval(&x[..4])?])
    }

    fn phi_coeffs<S: Scalar>(&self, w: &[Vec<S>; 3]) -> Vec<S> {
        let mut out = vec![S::zero(); 35];
        for (r, ab) in multi_indices(4, 2).iter().enumerate() {
            for (i, wi) in w.iter().enumerate() {
                for j in 0..3 {
                    let c = self.delta[i][j];
                    if c != 0.0 {
                        out[rank(7, &[ab[0], ab[1], 4 + j])] += wi[r] * c;
                    }
                }
            }
        }
        out[rank(7, &[4, 5, 6])] += S::cst(self.det());
        out
    }

    fn v_coeffs<S: Scalar>(&self, w: &[Vec<S>; 3]) -> Vec<S> {
        let d = &self.delta;
        let mut out = vec![S::zero(); 35];
        let pairs = multi_indices(4, 2);
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            for (p, q) in [(0, 1), (0, 2), (1, 2)] {
                let c = d[j][p] * d[k][q] - d[j][q] * d[k][p];
                if c == 0.0 {
                    continue;
                }
                for (r, ab) in pairs.iter().enumerate() {
                    out[rank(7, &[ab[0], ab[1], 4 + p, 4 + q])] += w[i][r] * c;
                }
            }
        }
        // ½ ω₁ ∧ ω₁ = (w₀₁ w₂₃ − w₀₂ w₁₃ + w₀₃ w₁₂) dp₀₁₂₃
        let a = &w[0];
        out[0] += a[0] * a[5] - a[1] * a[4] + a[2] * a[3];
        out
    }
}

/// `φ_t` as a 3-form field on the 7-chart.
#[derive(Debug, Clone, Copy)]
pub struct PhiT<'a, W>(pub &'a TripleWithFlat<W>);

/// `v_t` as a 4-form field on the 7-chart.
#[derive(Debug, Clone, Copy)]
pub struct VT<'a, W>(pub &'a TripleWithFlat<W>);

impl<W: FormField> Field for PhiT<'_, W> {
    fn input_dim(&self) -> usize {
        7
    }
    fn output_len(&self) -> usize {
        35
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        Ok(self.0.phi_coeffs(&self.0.omegas_at(x)?))
    }
    fn length_scale(&self, x: &[f64]) -> f64 {
        self.0.omegas[0].length_scale(&x[..4])
    }
    fn ad_capable(&self) -> bool {
        self.0.omegas.iter().all(|w| w.ad_capable())
    }
}

impl<W: FormField> FormField for PhiT<'_, W> {
    fn degree(&self) -> usize {
        3
    }
}

impl<W: FormField> Field for VT<'_, W> {
    fn input_dim(&self) -> usize {
        7
    }
    fn output_len(&self) -> usize {
        35
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        Ok(self.0.v_coeffs(&self.0.omegas_at(x)?))
    }
    fn length_scale(&self, x: &[f64]) -> f64 {
        self.0.omegas[0].length_scale(&x[..4])
    }
    fn ad_capable(&self) -> bool {
        self.0.omegas.iter().all(|w| w.ad_capable())
    }
}

impl<W: FormField> FormField for VT<'_, W> {
    fn degree(&self) -> usize {
        4
    }
}

pub fn build_phi_t<W: FormField>(triple: &TripleWithFlat<W>) -> (PhiT<'_, W>, VT<'_, W>) {
    (PhiT(triple), VT(triple))
}

/// The flat triple on `R⁴`: `ω₁ = dp₀₃ + dp₁₂`, `ω₂ = dp₀₂ − dp₁₃`, `ω₃ = dp₀₁ + dp₂₃`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlatTriple(pub usize);

const FLAT: [[f64; 6]; 3] =
    [[0.0, 0.0, 1.0, 1.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0, -1.0, 0.0], [1.0, 0.0, 0.0, 0.0, 0.0, 1.0]];

impl Field for FlatTriple {
    fn input_dim(&self) -> usize {
        4
    }
    fn output_len(&self) -> usize {
        6
    }
    fn eval<S: Scalar>(&self, _x: &[S]) -> Result<Vec<S>> {
        Ok(FLAT[self.0].iter().map(|c| S::cst(*c)).collect())
    }
}

impl FormField for FlatTriple {
    fn degree(&self) -> usize {
        2
    }
}

pub fn flat_triple() -> TripleWithFlat<FlatTriple> {
    TripleWithFlat::standard([FlatTriple(0), FlatTriple(1), FlatTriple(2)])
}

/// The hyperkähler triple of a Gibbons–Hawking configuration in `φ₀` order.
pub fn gh_triple(cfg: &GHConfig) -> TripleWithFlat<GhTriple> {
    TripleWithFlat::from_gh_order([0, 1, 2].map(|alpha| GhTriple { cfg: cfg.clone(), alpha }))
}

struct Pointwise {
    g2: G2Form,
    /// `Θ(φ_t) − v_t`
    defect: Form,
}

fn pointwise<W: FormField>(triple: &TripleWithFlat<W>, x: &[f64]) -> Result<Pointwise> {
    let (phi, v) = build_phi_t(triple);
    let g2 = G2Form::new(form_at(&phi, x)?)?;
    let defect = g2.theta().sub(&form_at(&v, x)?);
    Ok(Pointwise { g2, defect })
}

/// `|ψ_t|` in the metric of `φ_t` (the Hodge star is an isometry, so this is `|Θ(φ_t) − v_t|`).
pub fn torsion_at<W: FormField>(triple: &TripleWithFlat<W>, x: &[f64]) -> Result<f64> {
    let p = pointwise(triple, x)?;
    Ok(p.defect.norm(&p.g2.inverse_metric()))
}

/// `ψ_t = *(Θ(φ_t) − v_t)`; `** = 1` on 4-forms in dimension 7.
pub fn psi_at<W: FormField>(triple: &TripleWithFlat<W>, x: &[f64]) -> Result<Form> {
    let p = pointwise(triple, x)?;
    Ok(p.g2.star(&p.defect))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorsionNorms {
    pub sup: f64,
    /// Root mean square over the points.
    pub l2: f64,
}

pub fn torsion_norms<W: FormField>(triple: &TripleWithFlat<W>, points: &[Vec<f64>]) -> Result<TorsionNorms> {
    let vals: Vec<f64> = points.par_iter().map(|x| torsion_at(triple, x)).collect::<Result<_>>()?;
    let sup = vals.iter().copied().fold(0.0, f64::max);
    let l2 = if vals.is_empty() { 0.0 } else { (vals.iter().map(|v| v * v).sum::<f64>() / vals.len() as f64).sqrt() };
    Ok(TorsionNorms { sup, l2 })
}

/// `(|d*ψ_t − d*φ_t|, |d*φ_t|)` at `x`, both codifferentials by differencing `*ψ_t` (the star of
/// `ψ_t`) and `*φ_t = Θ(φ_t)`.
pub fn codifferential_defect<W: FormField>(
    triple: &TripleWithFlat<W>,
    x: &[f64],
    scheme: &DerivativeScheme,
) -> Result<(f64, f64)> {
    let star_psi = Sampled::new(7, 35, |y: &[f64]| {
        let p = pointwise(triple, y)?;
        Ok(p.g2.star(&p.g2.star(&p.defect)).coeffs)
    });
    let star_phi = Sampled::new(7, 35, |y: &[f64]| Ok(pointwise(triple, y)?.g2.theta().coeffs));
    let g2 = pointwise(triple, x)?.g2;
    // d* = (−1)^{n(p+1)+1} * d * on 3-forms in dimension 7
    let codiff = |f: &dyn Fn() -> Result<Vec<Vec<f64>>>| -> Result<Form> {
        Ok(g2.star(&Form::exterior_from_jacobian(7, 4, &f()?)).scaled(-1.0))
    };
    let a = codiff(&|| jacobian(&star_psi, x, scheme))?;
    let b = codiff(&|| jacobian(&star_phi, x, scheme))?;
    Ok((a.sub(&b).max_abs(), b.max_abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorsionRow {
    pub t: f64,
    pub sup_norm: f64,
    pub l2_norm: f64,
}

/// Theorem-hypothesis flags; `None` where not evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Hypotheses {
    #[serde(rename = "A_i")]
    pub a_i: Option<bool>,
    #[serde(rename = "B_ii")]
    pub b_ii: &'static str,
    #[serde(rename = "B_iii")]
    pub b_iii: Option<bool>,
    #[serde(rename = "B_iv")]
    pub b_iv: Option<bool>,
    #[serde(rename = "B_v")]
    pub b_v: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorsionReport {
    /// Values at the smallest `t`.
    pub sup_norm: f64,
    pub l2_norm: f64,
    pub t: f64,
    /// Fit of the sup norms.
    pub slope: SlopeFit,
    pub l2_slope: SlopeFit,
    pub rows: Vec<TorsionRow>,
    pub hypotheses: Hypotheses,
}

/// Accepted range of the torsion slope.
pub const TORSION_SLOPE: (f64, f64) = (3.7, 4.3);

/// The blend annulus `ζ²/9 ≤ |x| ≤ ζ²/4` at the resolution of `grid`.
pub fn blend_shell(schedule: &GluingSchedule, grid: &EstimateRegion) -> Shell {
    let (inner, outer) = schedule.blend_shell();
    Shell { inner, outer, ..grid.shell() }
}

pub(crate) fn blended(t: f64, eps_split: f64, schedule: &GluingSchedule) -> Result<TripleWithFlat<GhBlend>> {
    Ok(TripleWithFlat::from_gh_order(gh_blend(t, eps_split, schedule)?))
}

/// Sup (grid plus local refinement) and RMS of `|ψ_t|` over the blend annulus at `τ = 0.3`,
/// `s = 0`, for each `t`, with log-log slopes.
pub fn torsion_sweep(
    ts: &[f64],
    schedule: &GluingSchedule,
    grid: &EstimateRegion,
    eps_split: f64,
) -> Result<TorsionReport> {
    validate_ts(ts)?;
    schedule.validate()?;
    let shell = blend_shell(schedule, grid);
    let embed = |p: &[f64; 3]| vec![0.3, p[0], p[1], p[2], 0.0, 0.0, 0.0];
    let pts: Vec<Vec<f64>> = shell.points()?.iter().map(embed).collect();
    let mut rows = Vec::with_capacity(ts.len());
    for &t in ts {
        let triple = blended(t, eps_split, schedule)?;
        let norm = Sampled::new(7, 1, |x: &[f64]| Ok(vec![torsion_at(&triple, x)?]));
        let sup = region_sup(&norm, &shell, embed, 0, &DerivativeScheme::default())?;
        let l2 = torsion_norms(&triple, &pts)?.l2;
        rows.push(TorsionRow { t, sup_norm: sup, l2_norm: l2 });
    }
    let t: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let slope = loglog_slope(&t, &rows.iter().map(|r| r.sup_norm).collect::<Vec<_>>())?;
    let l2_slope = loglog_slope(&t, &rows.iter().map(|r| r.l2_norm).collect::<Vec<_>>())?;
    let last = *rows.last().expect("validated");
    let hypotheses = Hypotheses {
        a_i: Some([slope.slope, l2_slope.slope].iter().all(|s| (TORSION_SLOPE.0..=TORSION_SLOPE.1).contains(s))),
        b_ii: super::INJECTIVITY_RADIUS,
        ..Default::default()
    };
    Ok(TorsionReport { sup_norm: last.sup_norm, l2_norm: last.l2_norm, t: last.t, slope, l2_slope, rows, hypotheses })
}
