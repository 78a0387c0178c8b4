//! Convergence of the three-centre instanton to the centre-of-mass potential `Ū = 3/|x|`.
//!
//! Both metrics use the radial gauge with the string along `−e₃`, so `A_t − Ā` is smooth on the
//! whole shell; the string itself is removed by a polar cap.

use serde::Serialize;

use super::{gh_metric_s, potential_s, GHConfig};
use crate::error::{GeomError, Result};
use crate::fit::{loglog_slope, SlopeFit};
use crate::scalar::Scalar;
use crate::tensor::{partials_of_order, DerivativeScheme, Field};
use rayon::prelude::*;

pub(crate) const STRING: [f64; 3] = [0.0, 0.0, -1.0];

/// Sample of the shell `ζ²/16 ≤ |x| ≤ ζ²` on a structured grid: `n_radial` geometric radii
/// including both boundary spheres, `n_polar` polar angles from the `+e₃` pole to the edge of
/// a cap of `cap` radians around the `−e₃` string, and `n_azimuth` azimuths. Doubling keeps
/// every coarse point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct EstimateRegion {
    pub zeta: f64,
    pub n_radial: usize,
    pub n_polar: usize,
    pub n_azimuth: usize,
    pub cap: f64,
}

impl Default for EstimateRegion {
    fn default() -> Self {
        Self { zeta: 1.0, n_radial: 6, n_polar: 9, n_azimuth: 16, cap: 0.3 }
    }
}

impl EstimateRegion {
    pub fn inner(&self) -> f64 {
        self.zeta * self.zeta / 16.0
    }
    pub fn outer(&self) -> f64 {
        self.zeta * self.zeta
    }
    /// Nested refinement: every interval halved in each direction.
    pub fn doubled(&self) -> Self {
        Self { n_radial: 2 * self.n_radial - 1, n_polar: 2 * self.n_polar - 1, n_azimuth: 2 * self.n_azimuth, ..*self }
    }

    pub fn shell(&self) -> Shell {
        Shell {
            inner: self.inner(),
            outer: self.outer(),
            n_radial: self.n_radial,
            n_polar: self.n_polar,
            n_azimuth: self.n_azimuth,
            cap: self.cap,
        }
    }
}

/// Structured sample of `inner ≤ |x| ≤ outer` with a polar cap around `−e₃` removed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shell {
    pub inner: f64,
    pub outer: f64,
    pub n_radial: usize,
    pub n_polar: usize,
    pub n_azimuth: usize,
    pub cap: f64,
}

fn nodes(n: usize, a: f64, b: f64) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if n == 1 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 })
}

/// Points of the region; the pole appears once per radius.
pub fn shell_points(region: &EstimateRegion) -> Result<Vec<[f64; 3]>> {
    if !(region.zeta > 0.0) {
        return Err(GeomError::Config("estimate region needs ζ > 0".into()));
    }
    region.shell().points()
}

impl Shell {
    pub fn points(&self) -> Result<Vec<[f64; 3]>> {
        let region = self;
        if !(0.0 < region.inner && region.inner < region.outer)
            || region.n_radial < 2
            || region.n_polar < 2
            || region.n_azimuth == 0
        {
            return Err(GeomError::Config(
                "a shell needs 0 < inner < outer, two radii, two polar angles and one azimuth".into(),
            ));
        }
        if !(0.0 < region.cap && region.cap < std::f64::consts::PI) {
            return Err(GeomError::RegionTooSmall("the string cap must lie in (0, π)".into()));
        }
        let (r0, r1) = (region.inner, region.outer);
        let mut dirs = vec![[0.0, 0.0, 1.0]];
        for th in nodes(region.n_polar, 0.0, std::f64::consts::PI - region.cap).skip(1) {
            for k in 0..region.n_azimuth {
                let ph = 2.0 * std::f64::consts::PI * k as f64 / region.n_azimuth as f64;
                dirs.push([th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]);
            }
        }
        let mut out = Vec::with_capacity(dirs.len() * region.n_radial);
        for lr in nodes(region.n_radial, r0.ln(), r1.ln()) {
            let r = lr.exp();
            out.extend(dirs.iter().map(|d| [r * d[0], r * d[1], r * d[2]]));
        }
        Ok(out)
    }
}

/// Sources must sit well inside the inner sphere of the region.
pub(crate) fn check_region(cfg: &GHConfig, region: &EstimateRegion) -> Result<()> {
    let reach = cfg.sources().iter().map(|s| s.x.iter().map(|v| v * v).sum::<f64>().sqrt()).fold(0.0, f64::max);
    if reach >= 0.5 * region.inner() {
        return Err(GeomError::RegionTooSmall(format!(
            "sources reach |x| = {reach:.3e}, inner radius ζ²/16 = {:.3e}",
            region.inner()
        )));
    }
    Ok(())
}

/// `U_t − Ū` on `R³`.
struct PotentialDifference {
    t: GHConfig,
    bar: GHConfig,
}

impl Field for PotentialDifference {
    fn input_dim(&self) -> usize {
        3
    }
    fn output_len(&self) -> usize {
        1
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        Ok(vec![potential_s(&self.t, x)? - potential_s(&self.bar, x)?])
    }
    fn length_scale(&self, x: &[f64]) -> f64 {
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt().min(1.0)
    }
}

/// `ds²(t) − ds̄²` in `(τ, x)`.
struct MetricDifference {
    t: GHConfig,
    bar: GHConfig,
}

impl Field for MetricDifference {
    fn input_dim(&self) -> usize {
        4
    }
    fn output_len(&self) -> usize {
        16
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        let a = gh_metric_s(&self.t, &x[1..])?;
        let b = gh_metric_s(&self.bar, &x[1..])?;
        Ok(a.iter().zip(&b).map(|(p, q)| *p - *q).collect())
    }
    fn length_scale(&self, x: &[f64]) -> f64 {
        (x[1] * x[1] + x[2] * x[2] + x[3] * x[3]).sqrt().min(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub t: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeReport {
    pub quantity: String,
    pub order: usize,
    pub rows: Vec<ConvergenceRow>,
    pub fit: SlopeFit,
}

pub(crate) fn validate_ts(ts: &[f64]) -> Result<()> {
    if ts.len() < 2 {
        return Err(GeomError::Config(format!("need at least two t values to fit a slope, got {}", ts.len())));
    }
    if ts.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(GeomError::Config("t values must be positive".into()));
    }
    if ts.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(GeomError::Config("t values must be strictly decreasing".into()));
    }
    Ok(())
}

/// Spherical coordinates `(ln r, Θ, Φ)` of a point.
fn spherical(p: &[f64; 3]) -> [f64; 3] {
    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [r.ln(), (p[2] / r).clamp(-1.0, 1.0).acos(), p[1].atan2(p[0])]
}

fn cartesian(s: &[f64; 3]) -> [f64; 3] {
    let r = s[0].exp();
    [r * s[1].sin() * s[2].cos(), r * s[1].sin() * s[2].sin(), r * s[1].cos()]
}

/// Candidates refined after the grid sweep.
const REFINE_STARTS: usize = 3;
const REFINE_ITERS: usize = 80;

/// Sup over the region of `|∂^order f|` at `embed(x)`: grid maximum, then a compass search in
/// `(ln r, Θ, Φ)` (clamped to the region) from the best grid points.
pub(crate) fn region_sup<F, E>(f: &F, region: &Shell, embed: E, order: usize, scheme: &DerivativeScheme) -> Result<f64>
where
    F: Field,
    E: Fn(&[f64; 3]) -> Vec<f64> + Sync,
{
    let value = |p: &[f64; 3]| -> Result<f64> {
        Ok(partials_of_order(f, &embed(p), order, scheme)?.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    };
    let pts = region.points()?;
    let vals: Vec<f64> = pts.par_iter().map(&value).collect::<Result<_>>()?;
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|a, b| vals[*b].total_cmp(&vals[*a]));
    let lo = [region.inner.ln(), 0.0, f64::NEG_INFINITY];
    let hi = [region.outer.ln(), std::f64::consts::PI - region.cap, f64::INFINITY];
    let step0 = [
        0.5 * (hi[0] - lo[0]) / (region.n_radial - 1) as f64,
        0.5 * (std::f64::consts::PI - region.cap) / (region.n_polar - 1) as f64,
        std::f64::consts::PI / region.n_azimuth as f64,
    ];
    let refined: Vec<f64> = idx
        .iter()
        .take(REFINE_STARTS)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&&i| {
            let mut x = spherical(&pts[i]);
            let mut best = vals[i];
            let mut step = step0;
            for _ in 0..REFINE_ITERS {
                let mut moved = false;
                for a in 0..3 {
                    for sgn in [1.0, -1.0] {
                        let mut y = x;
                        y[a] = (y[a] + sgn * step[a]).clamp(lo[a], hi[a]);
                        if y == x {
                            continue;
                        }
                        // points where the difference quotients break down are skipped
                        if let Ok(v) = value(&cartesian(&y)) {
                            if v > best {
                                best = v;
                                x = y;
                                moved = true;
                            }
                        }
                    }
                }
                if !moved {
                    step.iter_mut().for_each(|s| *s *= 0.5);
                    if step[0] < 1e-4 * step0[0] {
                        break;
                    }
                }
            }
            best
        })
        .collect();
    Ok(refined.into_iter().fold(vals.iter().copied().fold(0.0, f64::max), f64::max))
}

pub(crate) fn sweep<F, B, E>(
    ts: &[f64],
    quantity: &str,
    order: usize,
    build: B,
    region: &EstimateRegion,
    embed: E,
    scheme: &DerivativeScheme,
) -> Result<SlopeReport>
where
    F: Field,
    B: Fn(f64) -> Result<F>,
    E: Fn(&[f64; 3]) -> Vec<f64> + Sync,
{
    validate_ts(ts)?;
    let mut rows = Vec::with_capacity(ts.len());
    for &t in ts {
        let f = build(t)?;
        let norm = region_sup(&f, &region.shell(), &embed, order, scheme)?;
        rows.push(ConvergenceRow { t, norm });
    }
    let fit =
        loglog_slope(&rows.iter().map(|r| r.t).collect::<Vec<_>>(), &rows.iter().map(|r| r.norm).collect::<Vec<_>>())?;
    Ok(SlopeReport { quantity: quantity.into(), order, rows, fit })
}

/// Sup over the region of all order-`i` partials of `U_t − Ū`, and the log-log slope in `t`.
pub fn potential_difference_norms(
    ts: &[f64],
    region: &EstimateRegion,
    order: usize,
    eps_split: f64,
    scheme: &DerivativeScheme,
) -> Result<SlopeReport> {
    let bar = GHConfig::single(3);
    let build = |t: f64| {
        let cfg = GHConfig::three_center(t, eps_split)?;
        check_region(&cfg, region)?;
        Ok(PotentialDifference { t: cfg, bar: bar.clone() })
    };
    sweep(ts, "potential", order, build, region, |p| p.to_vec(), scheme)
}

/// The same for the metric coefficients `ds²(t) − ds̄²`.
pub fn metric_difference_norms(
    ts: &[f64],
    region: &EstimateRegion,
    order: usize,
    eps_split: f64,
    scheme: &DerivativeScheme,
) -> Result<SlopeReport> {
    let bar = GHConfig::single(3).with_radial_gauge(STRING)?;
    let build = |t: f64| {
        let cfg = GHConfig::three_center(t, eps_split)?.with_radial_gauge(STRING)?;
        check_region(&cfg, region)?;
        Ok(MetricDifference { t: cfg, bar: bar.clone() })
    };
    sweep(ts, "metric", order, build, region, |p| vec![0.0, p[0], p[1], p[2]], scheme)
}
