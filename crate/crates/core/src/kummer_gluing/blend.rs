//! Cutoff blending of closed forms through their primitives, and primitives on annuli.

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::gibbons_hawking::estimates::{check_region, sweep};
use crate::gibbons_hawking::{EstimateRegion, GHConfig, GhTriple, SlopeReport, TriplePrimitive};
use crate::scalar::{HyperDual, Scalar};
use crate::tensor::forms::multi_indices;
use crate::tensor::{exterior_derivative, form_at, DerivativeScheme, Field, FormField};

/// Concentric radii of the two gluing stages and the local-model scale `ζ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GluingSchedule {
    pub zeta: f64,
    pub eps: f64,
    pub eps_prime: f64,
    pub delta: f64,
    pub delta_prime: f64,
}

impl Default for GluingSchedule {
    fn default() -> Self {
        Self::scaled(1.0)
    }
}

impl GluingSchedule {
    /// Default radii for a given `ζ`.
    pub fn scaled(zeta: f64) -> Self {
        Self { zeta, eps: 0.9 * zeta, eps_prime: 0.5 * zeta, delta: 0.3 * zeta, delta_prime: 0.15 * zeta }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.zeta > 0.0
            && 0.0 < self.delta_prime
            && self.delta_prime < self.delta
            && self.delta < self.eps_prime
            && self.eps_prime < self.eps;
        if !ok {
            return Err(GeomError::Config(format!("schedule needs ζ > 0 and 0 < δ' < δ < ε' < ε, got {:?}", self)));
        }
        Ok(())
    }

    pub fn cutoff(&self) -> Cutoff {
        Cutoff::Radial { zeta: self.zeta }
    }

    /// `|x|` range of the annulus `ζ/3 < r < ζ/2`, `r = √|x|`, where the cutoff varies.
    pub fn blend_shell(&self) -> (f64, f64) {
        let z2 = self.zeta * self.zeta;
        (z2 / 9.0, z2 / 4.0)
    }
}

/// Cutoff `u` on the 4-chart `(τ, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Cutoff {
    Constant(f64),
    /// `u(r)`, `r = √|x|`: zero on `[0, ζ/3]`, one on `[ζ/2, ∞)`, quintic smoothstep in between.
    Radial {
        zeta: f64,
    },
}

/// Quintic smoothstep and its derivative.
fn smoothstep<S: Scalar>(s: S) -> (S, S) {
    if s.re() <= 0.0 {
        (S::zero(), S::zero())
    } else if s.re() >= 1.0 {
        (S::one(), S::zero())
    } else {
        let s2 = s * s;
        let om = S::one() - s;
        (s2 * s * (s2 * 6.0 - s * 15.0 + 10.0), s2 * om * om * 30.0)
    }
}

impl Cutoff {
    /// `u(r)` and `u'(r)`.
    pub fn profile<S: Scalar>(&self, r: S) -> (S, S) {
        match *self {
            Cutoff::Constant(c) => (S::cst(c), S::zero()),
            Cutoff::Radial { zeta } => {
                let w = zeta / 6.0;
                let (u, du) = smoothstep((r - zeta / 3.0) / w);
                (u, du / w)
            }
        }
    }

    /// `u` and `du` at a chart point `(τ, x)`.
    pub fn at<S: Scalar>(&self, p: &[S]) -> (S, [S; 4]) {
        match self {
            Cutoff::Constant(c) => (S::cst(*c), [S::zero(); 4]),
            Cutoff::Radial { .. } => {
                let x2 = p[1] * p[1] + p[2] * p[2] + p[3] * p[3];
                let rx = x2.sqrt();
                let r = rx.sqrt();
                let (u, ur) = self.profile(r);
                // dr/dx_j = x_j / (2 r |x|)
                let f = ur / (r * rx * 2.0);
                (u, [S::zero(), p[1] * f, p[2] * f, p[3] * f])
            }
        }
    }
}

/// `ω(t) = d(u η̄ + (1 − u) η′) = u ω̄ + (1 − u) ω′ + du ∧ (η̄ − η′)` on the 4-chart `(τ, x)`.
#[derive(Debug, Clone)]
pub struct BlendedForm<A, B, C, D> {
    pub omega_bar: A,
    pub omega_t: B,
    pub eta_bar: C,
    pub eta_t: D,
    pub cutoff: Cutoff,
}

fn primitive_defect<W: FormField, E: FormField>(
    w: &W,
    e: &E,
    points: &[[f64; 4]],
    scheme: &DerivativeScheme,
) -> Result<f64> {
    crate::report::sweep_max(points, |p| Ok(exterior_derivative(e, p, scheme)?.sub(&form_at(w, p)?).max_abs()))
}

/// Precondition tolerance for `dη = ω` on the annulus.
pub const PRIMITIVE_TOL: f64 = 1e-8;

/// Build the blended form after checking `dη̄ = ω̄` and `dη′ = ω′` at `points`.
pub fn blend_forms<A, B, C, D>(
    omega_bar: A,
    omega_t: B,
    eta_bar: C,
    eta_t: D,
    cutoff: Cutoff,
    points: &[[f64; 4]],
    scheme: &DerivativeScheme,
) -> Result<BlendedForm<A, B, C, D>>
where
    A: FormField,
    B: FormField,
    C: FormField,
    D: FormField,
{
    if [omega_bar.dim(), omega_t.dim(), eta_bar.dim(), eta_t.dim()] != [4; 4]
        || omega_bar.degree() != 2
        || omega_t.degree() != 2
        || eta_bar.degree() != 1
        || eta_t.degree() != 1
    {
        return Err(GeomError::Config("blend_forms expects 2-forms and 1-forms on a 4-chart".into()));
    }
    let d = primitive_defect(&omega_bar, &eta_bar, points, scheme)?
        .max(primitive_defect(&omega_t, &eta_t, points, scheme)?);
    if !(d <= PRIMITIVE_TOL) {
        return Err(GeomError::BadPrimitive(d));
    }
    Ok(BlendedForm { omega_bar, omega_t, eta_bar, eta_t, cutoff })
}

impl<A: FormField, B: FormField, C: FormField, D: FormField> Field for BlendedForm<A, B, C, D> {
    fn input_dim(&self) -> usize {
        4
    }
    fn output_len(&self) -> usize {
        6
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        let (u, du) = self.cutoff.at(x);
        let wb = self.omega_bar.eval(x)?;
        let wt = self.omega_t.eval(x)?;
        let eb = self.eta_bar.eval(x)?;
        let et = self.eta_t.eval(x)?;
        let de: Vec<S> = eb.iter().zip(&et).map(|(a, b)| *a - *b).collect();
        let one_minus = S::one() - u;
        Ok(multi_indices(4, 2)
            .iter()
            .enumerate()
            .map(|(r, ij)| {
                let (i, j) = (ij[0], ij[1]);
                u * wb[r] + one_minus * wt[r] + du[i] * de[j] - du[j] * de[i]
            })
            .collect())
    }
    fn length_scale(&self, x: &[f64]) -> f64 {
        self.omega_t.length_scale(x)
    }
    fn ad_capable(&self) -> bool {
        self.omega_bar.ad_capable() && self.omega_t.ad_capable() && self.eta_bar.ad_capable() && self.eta_t.ad_capable()
    }
}

impl<A: FormField, B: FormField, C: FormField, D: FormField> FormField for BlendedForm<A, B, C, D> {
    fn degree(&self) -> usize {
        2
    }
}

/// Blend of the centre-of-mass triple (`Ū = 3/|x|`) into the three-centre triple, component `alpha`.
pub type GhBlend = BlendedForm<GhTriple, GhTriple, TriplePrimitive, TriplePrimitive>;

/// Radial-gauge configurations `(Ū, U_t)` with strings along `−e₃`.
pub fn blend_configs(t: f64, eps_split: f64) -> Result<(GHConfig, GHConfig)> {
    let dir = crate::gibbons_hawking::estimates::STRING;
    Ok((GHConfig::single(3).with_radial_gauge(dir)?, GHConfig::three_center(t, eps_split)?.with_radial_gauge(dir)?))
}

/// Points `(0, x)` with `|x|` spread over the blend shell, away from the `−e₃` string.
pub fn blend_check_points(schedule: &GluingSchedule) -> Vec<[f64; 4]> {
    let (a, b) = schedule.blend_shell();
    let dirs = [[0.6, 0.0, 0.8], [-0.48, 0.6, 0.64], [0.0, -0.8, 0.6], [0.8, 0.6, 0.0], [-0.6, -0.64, -0.48]];
    let mut out = Vec::new();
    for (k, d) in dirs.iter().enumerate() {
        let r = a + (b - a) * (k as f64 + 0.5) / dirs.len() as f64;
        out.push([0.3, r * d[0], r * d[1], r * d[2]]);
    }
    out
}

/// The three blended forms `ω_α(t)`.
pub fn gh_blend(t: f64, eps_split: f64, schedule: &GluingSchedule) -> Result<[GhBlend; 3]> {
    schedule.validate()?;
    let (bar, cfg) = blend_configs(t, eps_split)?;
    let pts = blend_check_points(schedule);
    let ad = DerivativeScheme::ad();
    let make = |alpha: usize| {
        blend_forms(
            GhTriple { cfg: bar.clone(), alpha },
            GhTriple { cfg: cfg.clone(), alpha },
            TriplePrimitive { cfg: bar.clone(), alpha },
            TriplePrimitive { cfg: cfg.clone(), alpha },
            schedule.cutoff(),
            &pts,
            &ad,
        )
    };
    Ok([make(0)?, make(1)?, make(2)?])
}

/// `ω_α(t) − ω̄_α` for all three `α`, concatenated.
struct BlendDifference {
    blends: [GhBlend; 3],
}

impl Field for BlendDifference {
    fn input_dim(&self) -> usize {
        4
    }
    fn output_len(&self) -> usize {
        18
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        let mut out = Vec::with_capacity(18);
        for b in &self.blends {
            let w = b.eval(x)?;
            let bar = b.omega_bar.eval(x)?;
            out.extend(w.iter().zip(&bar).map(|(p, q)| *p - *q));
        }
        Ok(out)
    }
    fn length_scale(&self, x: &[f64]) -> f64 {
        (x[1] * x[1] + x[2] * x[2] + x[3] * x[3]).sqrt().min(1.0)
    }
}

/// Sup over the estimate shell of all order-`i` partials of `ω_α(t) − ω̄_α`, and the slope in `t`.
pub fn blend_difference_norms(
    ts: &[f64],
    region: &EstimateRegion,
    schedule: &GluingSchedule,
    order: usize,
    eps_split: f64,
    scheme: &DerivativeScheme,
) -> Result<SlopeReport> {
    let build = |t: f64| {
        let blends = gh_blend(t, eps_split, schedule)?;
        check_region(&blends[0].omega_t.cfg, region)?;
        Ok(BlendDifference { blends })
    };
    sweep(ts, "blended triple", order, build, region, |p| vec![0.3, p[0], p[1], p[2]], scheme)
}

/// Region `r₀ < |y| < r₁` of the spatial coordinates `y = x[passive..]`, contracted onto the
/// point `r₀ · pole` along great circles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub r0: f64,
    pub r1: f64,
    pub passive: usize,
    pub pole: Vec<f64>,
}

impl Annulus {
    /// The `(τ, x)` shell `r₀ < |x| < r₁` with pole `+e₃` (away from the `−e₃` strings).
    pub fn gh(r0: f64, r1: f64) -> Self {
        Self { r0, r1, passive: 1, pole: vec![0.0, 0.0, 1.0] }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        let n = self.pole.len();
        let pn = self.pole.iter().map(|v| v * v).sum::<f64>().sqrt();
        if self.passive + n != dim || !(0.0 < self.r0 && self.r0 < self.r1) || (pn - 1.0).abs() > 1e-12 {
            return Err(GeomError::Config("annulus needs 0 < r₀ < r₁, a unit pole and matching dimension".into()));
        }
        Ok(())
    }

    /// `H(s, y) = ρ(s) · slerp(pole, ŷ, s)` with `ρ(s) = r₀ + s(|y| − r₀)`.
    fn path<S: Scalar>(&self, s: S, y: &[S]) -> Result<Vec<S>> {
        let r = y.iter().fold(S::zero(), |a, v| a + *v * *v).sqrt();
        let yh: Vec<S> = y.iter().map(|v| *v / r).collect();
        let c = yh.iter().zip(&self.pole).fold(S::zero(), |a, (v, p)| a + *v * *p);
        let v: Vec<S> = yh.iter().zip(&self.pole).map(|(v, p)| *v - c * *p).collect();
        let vn = v.iter().fold(S::zero(), |a, w| a + *w * *w).sqrt();
        if c.re() < -1.0 + 1e-10 {
            return Err(GeomError::DomainError("point antipodal to the annulus pole".into()));
        }
        let rho = (r - self.r0) * s + self.r0;
        let omega = vn.atan2(c);
        let so = s * omega;
        // sin(sΩ)/sin Ω → s as Ω → 0
        let ratio = if vn.re() < 1e-9 { s } else { so.sin() / vn };
        Ok(self.pole.iter().zip(&v).map(|(p, w)| rho * (so.cos() * *p + ratio * *w)).collect())
    }
}

/// `η = ∫₀¹ ι_{∂s} H*F ds` for the great-circle contraction of an [`Annulus`]; `dη = F` for closed `F`.
/// Evaluated in `f64` only (Gauss–Legendre in `s`, forward-mode derivatives of the path).
#[derive(Debug, Clone)]
pub struct HomotopyPrimitive<F> {
    pub form: F,
    pub annulus: Annulus,
}

impl<F: FormField> HomotopyPrimitive<F> {
    pub fn eval_f64(&self, x: &[f64]) -> Result<Vec<f64>> {
        let p = self.annulus.passive;
        let n = x.len() - p;
        let dim = x.len();
        let y = &x[p..];
        let (nodes, weights) = crate::quad::gl32();
        let idx = multi_indices(dim, 2);
        let mut eta = vec![0.0; dim];
        for (s, w) in nodes.iter().zip(weights) {
            let ys: Vec<HyperDual> = y.iter().map(|v| HyperDual::new(*v, 0.0, 0.0, 0.0)).collect();
            let ds = self.annulus.path(HyperDual::new(*s, 1.0, 0.0, 0.0), &ys)?;
            let pos: Vec<f64> = x[..p].iter().copied().chain(ds.iter().map(|d| d.a)).collect();
            let mut hs = vec![0.0; dim];
            for a in 0..n {
                hs[p + a] = ds[a].b;
            }
            // columns ∂_k H for every chart direction k
            let mut dk = vec![vec![0.0; dim]; dim];
            for (k, col) in dk.iter_mut().enumerate().take(p) {
                col[k] = 1.0;
            }
            for k in 0..n {
                let seeded = crate::scalar::seed(y, k, usize::MAX);
                let out = self.annulus.path(HyperDual::new(*s, 0.0, 0.0, 0.0), &seeded)?;
                for a in 0..n {
                    dk[p + k][p + a] = out[a].b;
                }
            }
            let f = self.form.eval::<f64>(&pos)?;
            for (k, col) in dk.iter().enumerate() {
                let mut acc = 0.0;
                for (r, ij) in idx.iter().enumerate() {
                    let (i, j) = (ij[0], ij[1]);
                    acc += f[r] * (hs[i] * col[j] - hs[j] * col[i]);
                }
                eta[k] += w * acc;
            }
        }
        Ok(eta)
    }
}

impl<F: FormField> Field for HomotopyPrimitive<F> {
    fn input_dim(&self) -> usize {
        self.form.dim()
    }
    fn output_len(&self) -> usize {
        self.form.dim()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        let xf: Vec<f64> = x.iter().map(|v| v.re()).collect();
        Ok(self.eval_f64(&xf)?.into_iter().map(S::cst).collect())
    }
    fn length_scale(&self, x: &[f64]) -> f64 {
        self.form.length_scale(x)
    }
    fn ad_capable(&self) -> bool {
        false
    }
}

impl<F: FormField> FormField for HomotopyPrimitive<F> {
    fn degree(&self) -> usize {
        1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrimitiveReport {
    pub residual: f64,
    pub points: usize,
}

/// Residual limit for [`primitive_on_annulus`].
pub const RESIDUAL_TOL: f64 = 1e-6;

/// Primitive of a closed 2-form on an annulus, with `sup |dη − F|` over `points`.
pub fn primitive_on_annulus<F: FormField>(
    form: F,
    annulus: Annulus,
    points: &[Vec<f64>],
    scheme: &DerivativeScheme,
) -> Result<(HomotopyPrimitive<F>, PrimitiveReport)> {
    if form.degree() != 2 {
        return Err(GeomError::Config("primitive_on_annulus expects a 2-form".into()));
    }
    annulus.validate(form.dim())?;
    let eta = HomotopyPrimitive { form, annulus };
    let residual = crate::report::sweep_max(points, |p| {
        let r = p[eta.annulus.passive..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(eta.annulus.r0 <= r && r <= eta.annulus.r1) {
            return Err(GeomError::DomainError(format!("sample radius {r:.3e} outside the annulus")));
        }
        Ok(exterior_derivative(&eta, p, scheme)?.sub(&form_at(&eta.form, p)?).max_abs())
    })?;
    if !(residual <= RESIDUAL_TOL) {
        return Err(GeomError::ResidualTooLarge(residual));
    }
    Ok((eta, PrimitiveReport { residual, points: points.len() }))
}

/// `F − G` for two forms on the same chart.
#[derive(Debug, Clone)]
pub struct FormDifference<A, B>(pub A, pub B);

impl<A: FormField, B: FormField> Field for FormDifference<A, B> {
    fn input_dim(&self) -> usize {
        self.0.input_dim()
    }
    fn output_len(&self) -> usize {
        self.0.output_len()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        let a = self.0.eval(x)?;
        let b = self.1.eval(x)?;
        Ok(a.iter().zip(&b).map(|(p, q)| *p - *q).collect())
    }
    fn length_scale(&self, x: &[f64]) -> f64 {
        self.0.length_scale(x)
    }
    fn ad_capable(&self) -> bool {
        self.0.ad_capable() && self.1.ad_capable()
    }
}

impl<A: FormField, B: FormField> FormField for FormDifference<A, B> {
    fn degree(&self) -> usize {
        self.0.degree()
    }
}
