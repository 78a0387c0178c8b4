//! Gibbons–Hawking multi-instantons `ds² = U⁻¹(dτ + A)² + U dx·dx` with
//! `U = Σ mᵢ/|x − xᵢ|` and `rot A = grad U`.
//!
//! Coordinates on the 4-dimensional chart are `(τ, x₁, x₂, x₃)`.

mod checks;
pub(crate) mod estimates;

pub use checks::{
    curl_defect, gauge_difference_defect, gh_curl_check, laplacian, level_set_defects, limit_coincidence,
    limit_coincidence_check, safe_points, triple_defects, LimitFit, TripleDefects,
};
pub use estimates::{
    metric_difference_norms, potential_difference_norms, shell_points, ConvergenceRow, EstimateRegion, Shell,
    SlopeReport,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::chart_atlas::{SpecialCoords, WeightPair};
use crate::error::{GeomError, Result};
use crate::scalar::Scalar;
use crate::tensor::{Field, FormField, MetricField};

/// Angular half-width of the excluded cone around a Dirac string, in radians.
pub const STRING_TOL: f64 = 1e-6;
/// `|grad U|` below this makes the level-set form degenerate.
/// Default second-stage splitting `ε` of the three-centre configuration.
pub const DEFAULT_EPS_SPLIT: f64 = 0.1;

pub const CRITICAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Source {
    pub x: [f64; 3],
    pub m: u32,
}

/// Gauge of the monopole form.
///
/// * `Strings`: one Dirac string per source, along the given direction.
/// * `Symmetric`: `m cos Θ dΦ` about one axis through each source (singular on the whole axis line).
/// * `Radial`: every source uses the Dirac potential of a charge at the origin with its string along
///   `radial_string`, plus `m (x × xᵢ) ∫₀¹ du/|x − u xᵢ|³`. Singular on that string and on the
///   segments from the origin to the sources; outside a ball containing the sources the
///   configuration-dependent part is smooth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Gauge {
    Strings(Vec<[f64; 3]>),
    Symmetric { symmetric_axis: [f64; 3] },
    Radial { radial_string: [f64; 3] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RawConfig {
    sources: Vec<Source>,
    #[serde(default)]
    gauge: Option<Gauge>,
    #[serde(default = "default_period")]
    period: f64,
}

fn default_period() -> f64 {
    4.0 * std::f64::consts::PI
}

/// Sources with multiplicities, gauge and fiber period. Construct through [`GHConfig::new`]
/// or deserialization, both of which validate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig", into = "RawConfig")]
pub struct GHConfig {
    sources: Vec<Source>,
    gauge: Gauge,
    period: f64,
}

impl TryFrom<RawConfig> for GHConfig {
    type Error = GeomError;
    fn try_from(r: RawConfig) -> Result<Self> {
        GHConfig::new(r.sources, r.gauge, r.period)
    }
}

impl From<GHConfig> for RawConfig {
    fn from(c: GHConfig) -> Self {
        RawConfig { sources: c.sources, gauge: Some(c.gauge), period: c.period }
    }
}

fn unit(v: [f64; 3]) -> Result<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return Err(GeomError::Config("gauge direction must be a nonzero vector".into()));
    }
    Ok([v[0] / n, v[1] / n, v[2] / n])
}

impl GHConfig {
    /// Validates sources and normalizes gauge directions. Without a gauge every string runs along `−e₃`.
    pub fn new(sources: Vec<Source>, gauge: Option<Gauge>, period: f64) -> Result<Self> {
        if sources.is_empty() {
            return Err(GeomError::Config("at least one source is required".into()));
        }
        if sources.iter().any(|s| s.m == 0 || s.x.iter().any(|v| !v.is_finite())) {
            return Err(GeomError::Config("multiplicities must be ≥ 1 and positions finite".into()));
        }
        for (i, a) in sources.iter().enumerate() {
            for b in &sources[i + 1..] {
                if a.x == b.x {
                    return Err(GeomError::Config(format!("coincident sources at {:?}", a.x)));
                }
            }
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(GeomError::Config(format!("fiber period must be > 0, got {period}")));
        }
        let gauge = match gauge {
            None => Gauge::Strings(vec![[0.0, 0.0, -1.0]; sources.len()]),
            Some(Gauge::Strings(dirs)) => {
                if dirs.len() != sources.len() {
                    return Err(GeomError::Config(format!(
                        "{} string directions for {} sources",
                        dirs.len(),
                        sources.len()
                    )));
                }
                Gauge::Strings(dirs.into_iter().map(unit).collect::<Result<_>>()?)
            }
            Some(Gauge::Symmetric { symmetric_axis }) => Gauge::Symmetric { symmetric_axis: unit(symmetric_axis)? },
            Some(Gauge::Radial { radial_string }) => Gauge::Radial { radial_string: unit(radial_string)? },
        };
        Ok(Self { sources, gauge, period })
    }

    pub fn sources(&self) -> &[Source] {
        &self.sources
    }
    pub fn gauge(&self) -> &Gauge {
        &self.gauge
    }
    pub fn period(&self) -> f64 {
        self.period
    }
    /// Distance from `x` to the nearest source.
    pub fn source_distance(&self, x: &[f64]) -> f64 {
        self.sources
            .iter()
            .map(|s| ((x[0] - s.x[0]).powi(2) + (x[1] - s.x[1]).powi(2) + (x[2] - s.x[2]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min)
    }
    /// Distance from `x` to the nearest source or gauge singularity (string, axis or segment).
    pub fn singular_distance(&self, x: &[f64]) -> f64 {
        let mut d = self.source_distance(x);
        let origin = [0.0; 3];
        match &self.gauge {
            Gauge::Strings(dirs) => {
                for (s, dir) in self.sources.iter().zip(dirs) {
                    d = d.min(segment_distance(x, &s.x, dir, 0.0, f64::INFINITY));
                }
            }
            Gauge::Symmetric { symmetric_axis } => {
                for s in &self.sources {
                    d = d.min(segment_distance(x, &s.x, symmetric_axis, f64::NEG_INFINITY, f64::INFINITY));
                }
            }
            Gauge::Radial { radial_string } => {
                d = d.min(segment_distance(x, &origin, radial_string, 0.0, f64::INFINITY));
                for s in &self.sources {
                    d = d.min(segment_distance(x, &origin, &s.x, 0.0, 1.0));
                }
            }
        }
        d
    }
    pub fn total_mass(&self) -> u32 {
        self.sources.iter().map(|s| s.m).sum()
    }

    /// Same sources with each string pointing from its source directly away from `x`, so that
    /// `x` is no closer to any string than to the sources. Curvature is gauge independent.
    pub fn with_strings_away_from(&self, x: &[f64]) -> Result<Self> {
        let dirs = self
            .sources
            .iter()
            .map(|s| {
                let d = [s.x[0] - x[0], s.x[1] - x[1], s.x[2] - x[2]];
                let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                if n == 0.0 {
                    Err(GeomError::AtSource)
                } else {
                    Ok([d[0] / n, d[1] / n, d[2] / n])
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.sources.clone(), Some(Gauge::Strings(dirs)), self.period)
    }

    /// Same sources with every string along `dir`.
    pub fn with_strings(&self, dir: [f64; 3]) -> Result<Self> {
        Self::new(self.sources.clone(), Some(Gauge::Strings(vec![dir; self.sources.len()])), self.period)
    }

    /// Same sources in the radial gauge with string direction `dir`.
    pub fn with_radial_gauge(&self, dir: [f64; 3]) -> Result<Self> {
        Self::new(self.sources.clone(), Some(Gauge::Radial { radial_string: dir }), self.period)
    }

    /// Multiplicities multiplied by `factor`.
    pub fn scaled(&self, factor: u32) -> Result<Self> {
        let sources = self.sources.iter().map(|s| Source { x: s.x, m: s.m * factor }).collect();
        Self::new(sources, Some(self.gauge.clone()), self.period)
    }

    /// One source of multiplicity `m` at the origin.
    pub fn single(m: u32) -> Self {
        Self::new(vec![Source { x: [0.0; 3], m }], None, default_period()).expect("valid single source")
    }

    /// Multiplicity `l` at `(−1, 0, 0)` and `k` at `(1, 0, 0)`, in the symmetric gauge about `e₁`.
    pub fn two_center(kp: WeightPair) -> Self {
        let sources = vec![Source { x: [-1.0, 0.0, 0.0], m: kp.l() }, Source { x: [1.0, 0.0, 0.0], m: kp.k() }];
        Self::new(sources, Some(Gauge::Symmetric { symmetric_axis: [1.0, 0.0, 0.0] }), default_period())
            .expect("valid two-center configuration")
    }

    /// Unit sources at `(−4t²/3, 0, 0)` and `(2t²/3, ±t²ε, 0)`; their centre of mass is the origin.
    pub fn three_center(t: f64, eps: f64) -> Result<Self> {
        let t2 = t * t;
        let sources = vec![
            Source { x: [-4.0 * t2 / 3.0, 0.0, 0.0], m: 1 },
            Source { x: [2.0 * t2 / 3.0, t2 * eps, 0.0], m: 1 },
            Source { x: [2.0 * t2 / 3.0, -t2 * eps, 0.0], m: 1 },
        ];
        Self::new(sources, None, default_period())
    }
}

type V3<S> = [S; 3];

fn sub3<S: Scalar>(x: &[S], c: [f64; 3]) -> V3<S> {
    [x[0] - c[0], x[1] - c[1], x[2] - c[2]]
}

fn norm3<S: Scalar>(y: &V3<S>) -> S {
    (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt()
}

fn cross_c<S: Scalar>(s: [f64; 3], y: &V3<S>) -> V3<S> {
    [y[2] * s[1] - y[1] * s[2], y[0] * s[2] - y[2] * s[0], y[1] * s[0] - y[0] * s[1]]
}

fn dot_c<S: Scalar>(s: [f64; 3], y: &V3<S>) -> S {
    y[0] * s[0] + y[1] * s[1] + y[2] * s[2]
}

fn offset<S: Scalar>(x: &[S], src: &Source) -> Result<(V3<S>, S)> {
    let y = sub3(x, src.x);
    let r = norm3(&y);
    if !(r.re() > 1e-12 * (1.0 + src.x.iter().fold(0.0f64, |m, v| m.max(v.abs())))) {
        return Err(GeomError::AtSource);
    }
    Ok((y, r))
}

/// `U(x) = Σ mᵢ/|x − xᵢ|`.
pub fn potential_s<S: Scalar>(cfg: &GHConfig, x: &[S]) -> Result<S> {
    let mut u = S::zero();
    for src in &cfg.sources {
        let (_, r) = offset(x, src)?;
        u += r.recip() * src.m as f64;
    }
    Ok(u)
}

pub fn potential(cfg: &GHConfig, x: [f64; 3]) -> Result<f64> {
    potential_s(cfg, &x)
}

/// `grad U`, analytically.
pub fn grad_potential_s<S: Scalar>(cfg: &GHConfig, x: &[S]) -> Result<V3<S>> {
    let mut g = [S::zero(); 3];
    for src in &cfg.sources {
        let (y, r) = offset(x, src)?;
        let c = (r * r * r).recip() * -(src.m as f64);
        for a in 0..3 {
            g[a] += y[a] * c;
        }
    }
    Ok(g)
}

/// Dirac potential `(s×y)/(r(r − s·y))` of a unit charge at the origin of `y`, string along `s`.
fn dirac<S: Scalar>(s: [f64; 3], y: &V3<S>, r: S) -> Result<V3<S>> {
    let sy = dot_c(s, y);
    let sxy = cross_c(s, y);
    let perp2 = sxy[0] * sxy[0] + sxy[1] * sxy[1] + sxy[2] * sxy[2];
    if sy.re() > 0.0 && perp2.re().sqrt() < STRING_TOL.sin() * r.re() {
        return Err(GeomError::OnString);
    }
    // written without cancellation on either side of the axis
    let c = if sy.re() >= 0.0 { (r + sy) / (r * perp2) } else { (r * (r - sy)).recip() };
    Ok([sxy[0] * c, sxy[1] * c, sxy[2] * c])
}

/// Unit-charge potential of source `i` in the configured gauge.
fn unit_monopole<S: Scalar>(cfg: &GHConfig, i: usize, x: &[S]) -> Result<V3<S>> {
    let src = &cfg.sources[i];
    let (y, r) = offset(x, src)?;
    match &cfg.gauge {
        Gauge::Strings(dirs) => dirac(dirs[i], &y, r),
        Gauge::Symmetric { symmetric_axis: n } => {
            let ny = dot_c(*n, &y);
            let nxy = cross_c(*n, &y);
            let perp2 = nxy[0] * nxy[0] + nxy[1] * nxy[1] + nxy[2] * nxy[2];
            if perp2.re().sqrt() < STRING_TOL.sin() * r.re() {
                return Err(GeomError::OnString);
            }
            // cos Θ dΦ about n: differs from the string along −n by the closed form dΦ
            let c = ny / (r * perp2);
            Ok([nxy[0] * c, nxy[1] * c, nxy[2] * c])
        }
        Gauge::Radial { radial_string } => {
            let x3 = [x[0], x[1], x[2]];
            let r0 = norm3(&x3);
            let a = src.x;
            let amag = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
            if amag > 0.0 && !(r0.re() > 2.0 * amag) {
                return Err(GeomError::DomainError(format!(
                    "radial gauge needs |x| > 2|xᵢ| (|x| = {:.3e}, |xᵢ| = {amag:.3e})",
                    r0.re()
                )));
            }
            if !(r0.re() > 0.0) {
                return Err(GeomError::OnString);
            }
            let mut out = dirac(*radial_string, &x3, r0)?;
            if amag > 0.0 {
                // homotopy-from-infinity correction: (x × a) ∫₀¹ du / |x − u a|³
                let (nodes, weights) = crate::quad::gl16();
                let mut integral = S::zero();
                for (u, w) in nodes.iter().zip(weights) {
                    let d = [x[0] - a[0] * u, x[1] - a[1] * u, x[2] - a[2] * u];
                    let q = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                    integral += (q * q.sqrt()).recip() * *w;
                }
                let xa = [x[1] * a[2] - x[2] * a[1], x[2] * a[0] - x[0] * a[2], x[0] * a[1] - x[1] * a[0]];
                for c in 0..3 {
                    out[c] += xa[c] * integral;
                }
            }
            Ok(out)
        }
    }
}

/// Monopole 1-form `A` with `rot A = grad U`.
pub fn monopole_s<S: Scalar>(cfg: &GHConfig, x: &[S]) -> Result<V3<S>> {
    let mut a = [S::zero(); 3];
    for (i, src) in cfg.sources.iter().enumerate() {
        let ai = unit_monopole(cfg, i, x)?;
        for c in 0..3 {
            a[c] += ai[c] * src.m as f64;
        }
    }
    Ok(a)
}

pub fn monopole_form(cfg: &GHConfig, x: [f64; 3]) -> Result<[f64; 3]> {
    monopole_s(cfg, &x)
}

fn gh_metric_s<S: Scalar>(cfg: &GHConfig, x: &[S]) -> Result<Vec<S>> {
    let u = potential_s(cfg, x)?;
    let a = monopole_s(cfg, x)?;
    let ui = u.recip();
    let th = [S::one(), a[0], a[1], a[2]];
    let mut g = vec![S::zero(); 16];
    for i in 0..4 {
        for j in 0..4 {
            g[i * 4 + j] = th[i] * th[j] * ui;
        }
    }
    for i in 1..4 {
        g[i * 4 + i] += u;
    }
    Ok(g)
}

/// Metric coefficients at `(τ, x)`; independent of `τ`.
pub fn gh_metric_eval(cfg: &GHConfig, x: [f64; 3], tau: f64) -> Result<DMatrix<f64>> {
    let v = gh_metric_s(cfg, &[tau, x[0], x[1], x[2]][1..])?;
    Ok(DMatrix::from_row_slice(4, 4, &v))
}

/// `U` as a field on `R³`.
#[derive(Debug, Clone)]
pub struct Potential(pub GHConfig);

impl Field for Potential {
    fn input_dim(&self) -> usize {
        3
    }
    fn output_len(&self) -> usize {
        1
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        Ok(vec![potential_s(&self.0, x)?])
    }
}

/// `A` as a field on `R³`.
#[derive(Debug, Clone)]
pub struct Monopole(pub GHConfig);

impl Field for Monopole {
    fn input_dim(&self) -> usize {
        3
    }
    fn output_len(&self) -> usize {
        3
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        Ok(monopole_s(&self.0, x)?.to_vec())
    }
}

impl FormField for Monopole {
    fn degree(&self) -> usize {
        1
    }
}

/// Distance from `x` to `{a + s v : lo ≤ s ≤ hi}`.
fn segment_distance(x: &[f64], a: &[f64; 3], v: &[f64; 3], lo: f64, hi: f64) -> f64 {
    let vv = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    let r = [x[0] - a[0], x[1] - a[1], x[2] - a[2]];
    let s = if vv == 0.0 { 0.0 } else { ((r[0] * v[0] + r[1] * v[1] + r[2] * v[2]) / vv).clamp(lo, hi) };
    ((r[0] - s * v[0]).powi(2) + (r[1] - s * v[1]).powi(2) + (r[2] - s * v[2]).powi(2)).sqrt()
}

/// The 4-metric on `(τ, x₁, x₂, x₃)`.
#[derive(Debug, Clone)]
pub struct GhMetric(pub GHConfig);

impl Field for GhMetric {
    fn input_dim(&self) -> usize {
        4
    }
    fn output_len(&self) -> usize {
        16
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        gh_metric_s(&self.0, &x[1..])
    }
    fn length_scale(&self, x: &[f64]) -> f64 {
        self.0.singular_distance(&x[1..]).min(1.0)
    }
}

impl MetricField for GhMetric {
    fn in_domain(&self, x: &[f64]) -> bool {
        potential_s(&self.0, &x[1..]).is_ok() && monopole_s(&self.0, &x[1..]).is_ok()
    }
}

/// Accumulate `c · dxⁱ∧dxʲ` into 4-dimensional 2-form coefficients `(01, 02, 03, 12, 13, 23)`.
fn add2<S: Scalar>(w: &mut [S], i: usize, j: usize, c: S) {
    if i == j {
        return;
    }
    let (a, b, c) = if i < j { (i, j, c) } else { (j, i, -c) };
    let r = match (a, b) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        _ => 5,
    };
    w[r] += c;
}

fn cyclic(alpha: usize) -> (usize, usize) {
    ((alpha + 1) % 3, (alpha + 2) % 3)
}

/// Hyperkähler triple `ω_α = dx_α∧(dτ + A) + U dx_β∧dx_γ`, `(α, β, γ)` cyclic, `α ∈ {0, 1, 2}`.
#[derive(Debug, Clone)]
pub struct GhTriple {
    pub cfg: GHConfig,
    pub alpha: usize,
}

fn triple_s<S: Scalar>(cfg: &GHConfig, alpha: usize, x: &[S]) -> Result<Vec<S>> {
    let u = potential_s(cfg, x)?;
    let a = monopole_s(cfg, x)?;
    let (b, c) = cyclic(alpha);
    let mut w = vec![S::zero(); 6];
    add2(&mut w, alpha + 1, 0, S::one());
    for j in 0..3 {
        add2(&mut w, alpha + 1, j + 1, a[j]);
    }
    add2(&mut w, b + 1, c + 1, u);
    Ok(w)
}

impl Field for GhTriple {
    fn input_dim(&self) -> usize {
        4
    }
    fn output_len(&self) -> usize {
        6
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        triple_s(&self.cfg, self.alpha, &x[1..])
    }
}

impl FormField for GhTriple {
    fn degree(&self) -> usize {
        2
    }
}

/// Explicit primitive of [`GhTriple`]:
/// `η_α = x_α dτ + Σᵢ mᵢ [(x − xᵢ)_α Aᵢ + ((x − xᵢ)_β d x_γ − (x − xᵢ)_γ dx_β)/|x − xᵢ|]`
/// with `Aᵢ` the unit-charge potential of source `i`. Valid wherever `A` is.
#[derive(Debug, Clone)]
pub struct TriplePrimitive {
    pub cfg: GHConfig,
    pub alpha: usize,
}

pub(crate) fn triple_primitive_s<S: Scalar>(cfg: &GHConfig, alpha: usize, x: &[S]) -> Result<Vec<S>> {
    let (b, c) = cyclic(alpha);
    let mut eta = vec![S::zero(); 4];
    eta[0] = x[alpha];
    for (i, src) in cfg.sources.iter().enumerate() {
        let m = src.m as f64;
        let (y, r) = offset(x, src)?;
        let ai = unit_monopole(cfg, i, x)?;
        for j in 0..3 {
            eta[j + 1] += ai[j] * y[alpha] * m;
        }
        eta[c + 1] += y[b] / r * m;
        eta[b + 1] -= y[c] / r * m;
    }
    Ok(eta)
}

impl Field for TriplePrimitive {
    fn input_dim(&self) -> usize {
        4
    }
    fn output_len(&self) -> usize {
        4
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        triple_primitive_s(&self.cfg, self.alpha, &x[1..])
    }
}

impl FormField for TriplePrimitive {
    fn degree(&self) -> usize {
        1
    }
}

/// The level-set form `ν∧(dτ + A) + U dσ` with `ν = dU/|grad U|` and `dσ` the area form of the
/// level surface of `U`, oriented by `−grad U` (the orientation for which the one-centre form is closed).
#[derive(Debug, Clone)]
pub struct LevelSetForm(pub GHConfig);

impl Field for LevelSetForm {
    fn input_dim(&self) -> usize {
        4
    }
    fn output_len(&self) -> usize {
        6
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        let x = &x[1..];
        let cfg = &self.0;
        let u = potential_s(cfg, x)?;
        let a = monopole_s(cfg, x)?;
        let g = grad_potential_s(cfg, x)?;
        let gn = norm3(&g);
        if !(gn.re() >= CRITICAL_TOL) {
            return Err(GeomError::CriticalPoint(gn.re()));
        }
        let n = [g[0] / gn, g[1] / gn, g[2] / gn];
        let th = [S::one(), a[0], a[1], a[2]];
        let mut w = vec![S::zero(); 6];
        for i in 0..3 {
            for (j, tj) in th.iter().enumerate() {
                add2(&mut w, i + 1, j, n[i] * *tj);
            }
        }
        for alpha in 0..3 {
            let (b, c) = cyclic(alpha);
            add2(&mut w, b + 1, c + 1, -(n[alpha] * u));
        }
        Ok(w)
    }
}

impl FormField for LevelSetForm {
    fn degree(&self) -> usize {
        2
    }
}

/// `level_set_form` at a point.
pub fn gh_kahler_form(cfg: &GHConfig, x: [f64; 3], tau: f64) -> Result<crate::tensor::Form> {
    let c = LevelSetForm(cfg.clone()).eval::<f64>(&[tau, x[0], x[1], x[2]])?;
    Ok(crate::tensor::Form::from_coeffs(4, 2, c))
}

/// `x₁ = ch ρ cos θ, x₂ = sh ρ sin θ cos ψ, x₃ = sh ρ sin θ sin ψ, τ = scale·(k + l) φ`,
/// returned as `(τ, x₁, x₂, x₃)`.
fn special_to_gh_s<S: Scalar>(x: &[S], tau_factor: f64) -> [S; 4] {
    let (sh, ch) = (x[0].sinh(), x[0].cosh());
    let (s, c) = (x[1].sin(), x[1].cos());
    [x[3] * tau_factor, ch * c, sh * s * x[2].cos(), sh * s * x[2].sin()]
}

/// Map from special coordinates to `(x, τ)`.
pub fn special_to_gh(sc: &SpecialCoords, kp: WeightPair) -> ([f64; 3], f64) {
    let v = special_to_gh_s(&sc.to_array(), kp.sum() as f64);
    ([v[1], v[2], v[3]], v[0])
}

/// Jacobian `∂(τ, x)/∂(ρ, θ, ψ, φ)`, rows indexed by the GH coordinate.
fn special_to_gh_jacobian<S: Scalar>(x: &[S], tau_factor: f64) -> [[S; 4]; 4] {
    let (sh, ch) = (x[0].sinh(), x[0].cosh());
    let (s, c) = (x[1].sin(), x[1].cos());
    let (sp, cp) = (x[2].sin(), x[2].cos());
    let z = S::zero();
    [
        [z, z, z, S::cst(tau_factor)],
        [sh * c, -(ch * s), z, z],
        [ch * s * cp, sh * c * cp, -(sh * s * sp), z],
        [ch * s * sp, sh * c * sp, sh * s * cp, z],
    ]
}

/// Pullback of the GH metric under [`special_to_gh`], in `(ρ, θ, ψ, φ)`.
/// The two-centre configuration has its multiplicities multiplied by `scale` and `τ = scale·(k+l)φ`.
#[derive(Debug, Clone)]
pub struct PulledBackGh {
    pub cfg: GHConfig,
    pub tau_factor: f64,
}

impl PulledBackGh {
    pub fn new(kp: WeightPair, scale: u32) -> Result<Self> {
        if scale == 0 {
            return Err(GeomError::Config("source scale must be ≥ 1".into()));
        }
        Ok(Self { cfg: GHConfig::two_center(kp).scaled(scale)?, tau_factor: (scale * kp.sum()) as f64 })
    }
}

impl Field for PulledBackGh {
    fn input_dim(&self) -> usize {
        4
    }
    fn output_len(&self) -> usize {
        16
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        let y = special_to_gh_s(x, self.tau_factor);
        let g = gh_metric_s(&self.cfg, &y[1..])?;
        let j = special_to_gh_jacobian(x, self.tau_factor);
        let mut out = vec![S::zero(); 16];
        for a in 0..4 {
            for b in a..4 {
                let mut s = S::zero();
                for i in 0..4 {
                    for k in 0..4 {
                        s += j[i][a] * g[i * 4 + k] * j[k][b];
                    }
                }
                out[a * 4 + b] = s;
                out[b * 4 + a] = s;
            }
        }
        Ok(out)
    }
}

impl MetricField for PulledBackGh {}
