//! Regularity of the model region around one resolved point: curvature scaling, volume and
//! diameter along a `t`-sweep.

use rayon::prelude::*;
use serde::Serialize;

use super::glued::Hypotheses;
use crate::error::Result;
use crate::gibbons_hawking::estimates::{check_region, validate_ts};
use crate::gibbons_hawking::{potential, EstimateRegion, GHConfig, GhMetric};
use crate::quad::{gl16, gl32};
use crate::tensor::{curvature, DerivativeScheme};

pub const INJECTIVITY_RADIUS: &str = "NOT CHECKED";

/// Largest relative spread `(max − min) / max` accepted across the sweep.
pub const SPREAD_TOL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisRow {
    pub t: f64,
    /// `sup |R| · t²` over points `t² y` for a fixed unit-scale sample `y`.
    pub curvature_t2: f64,
    /// Volume of `T³ × {ζ²/16 ≤ |x| ≤ ζ²} × S¹` by quadrature; a lower bound for the ball.
    pub volume_lower: f64,
    /// Length of explicit connecting paths between sample points of the shell.
    pub diameter_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub rows: Vec<HypothesisRow>,
    pub curvature_spread: f64,
    pub volume_spread: f64,
    pub diameter_spread: f64,
    pub injectivity_radius: &'static str,
    pub hypotheses: Hypotheses,
}

/// Unit-scale sample above the source plane, clear of the `−e₃` strings.
fn unit_points() -> Vec<[f64; 3]> {
    let mut out = Vec::new();
    for r in [0.5, 1.0, 2.0] {
        out.push([0.0, 0.0, r]);
        for th in [std::f64::consts::FRAC_PI_6, std::f64::consts::FRAC_PI_3] {
            for k in 0..6 {
                let ph = std::f64::consts::PI * k as f64 / 3.0 + 0.1;
                out.push([r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()]);
            }
        }
    }
    out
}

fn curvature_t2(cfg: &GHConfig, t: f64, scheme: &DerivativeScheme) -> Result<f64> {
    let t2 = t * t;
    let g = GhMetric(cfg.clone());
    let vals: Vec<f64> = unit_points()
        .par_iter()
        .map(|y| curvature(&g, &[0.0, t2 * y[0], t2 * y[1], t2 * y[2]], scheme)?.max_riemann())
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max) * t2)
}

fn sphere_rule() -> Vec<([f64; 3], f64)> {
    let (nodes, weights) = gl32();
    let n_phi = 64;
    let mut out = Vec::with_capacity(nodes.len() * n_phi);
    for (c01, w) in nodes.iter().zip(weights) {
        let c = 2.0 * c01 - 1.0;
        let s = (1.0 - c * c).sqrt();
        for k in 0..n_phi {
            let ph = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n_phi as f64;
            out.push(([s * ph.cos(), s * ph.sin(), c], 2.0 * w * 2.0 * std::f64::consts::PI / n_phi as f64));
        }
    }
    out
}

/// `P ∫ U d³x` over `r₀ ≤ |x| ≤ r₁` (the flat `T³` factor has unit volume).
pub(crate) fn shell_volume(cfg: &GHConfig, r0: f64, r1: f64) -> Result<f64> {
    let (nodes, weights) = gl16();
    let sphere = sphere_rule();
    let mut acc = 0.0;
    for (s, w) in nodes.iter().zip(weights) {
        let r = r0 + (r1 - r0) * s;
        for (d, ws) in &sphere {
            acc += w * (r1 - r0) * r * r * ws * potential(cfg, [r * d[0], r * d[1], r * d[2]])?;
        }
    }
    Ok(cfg.period() * acc)
}

/// `∫ √U` along the ray from `p` out to `|x| = r₁`.
fn radial_length(cfg: &GHConfig, p: &[f64; 3], r1: f64) -> Result<f64> {
    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    let (nodes, weights) = gl16();
    let mut acc = 0.0;
    for (s, w) in nodes.iter().zip(weights) {
        let q = r + (r1 - r) * s;
        acc += w * (r1 - r) * potential(cfg, [q * p[0] / r, q * p[1] / r, q * p[2] / r])?.sqrt();
    }
    Ok(acc)
}

/// Any two shell points join through the outer sphere by horizontal lifts, a great-circle arc
/// and a final fiber segment; `T³` adds its own diameter `√3 / 2`.
fn diameter_bound(cfg: &GHConfig, region: &EstimateRegion) -> Result<f64> {
    let pts = region.shell().points()?;
    let r1 = region.outer();
    let per: Vec<(f64, f64, f64)> = pts
        .par_iter()
        .map(|p| {
            let u = potential(cfg, *p)?;
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            let outer = potential(cfg, [r1 * p[0] / r, r1 * p[1] / r, r1 * p[2] / r])?;
            Ok((radial_length(cfg, p, r1)?, 0.5 * cfg.period() / u.sqrt(), outer.sqrt()))
        })
        .collect::<Result<_>>()?;
    let rad = per.iter().map(|v| v.0).fold(0.0, f64::max);
    let fiber = per.iter().map(|v| v.1).fold(0.0, f64::max);
    let arc = std::f64::consts::PI * r1 * per.iter().map(|v| v.2).fold(0.0, f64::max);
    Ok(2.0 * rad + arc + fiber + 0.75f64.sqrt())
}

fn spread(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = v.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = v.fold(f64::INFINITY, f64::min);
    (max - min) / max
}

/// Curvature, volume and diameter of the three-centre model along `ts`.
pub fn hypothesis_check(
    ts: &[f64],
    eps_split: f64,
    region: &EstimateRegion,
    scheme: &DerivativeScheme,
) -> Result<HypothesisReport> {
    validate_ts(ts)?;
    let mut rows = Vec::with_capacity(ts.len());
    for &t in ts {
        let cfg = GHConfig::three_center(t, eps_split)?;
        check_region(&cfg, region)?;
        rows.push(HypothesisRow {
            t,
            curvature_t2: curvature_t2(&cfg, t, scheme)?,
            volume_lower: shell_volume(&cfg, region.inner(), region.outer())?,
            diameter_upper: diameter_bound(&cfg, region)?,
        });
    }
    let curvature_spread = spread(rows.iter().map(|r| r.curvature_t2));
    let volume_spread = spread(rows.iter().map(|r| r.volume_lower));
    let diameter_spread = spread(rows.iter().map(|r| r.diameter_upper));
    let hypotheses = Hypotheses {
        a_i: None,
        b_ii: INJECTIVITY_RADIUS,
        b_iii: Some(curvature_spread < SPREAD_TOL),
        b_iv: Some(rows.iter().all(|r| r.volume_lower > 0.0) && volume_spread < SPREAD_TOL),
        b_v: Some(diameter_spread < SPREAD_TOL),
    };
    Ok(HypothesisReport {
        rows,
        curvature_spread,
        volume_spread,
        diameter_spread,
        injectivity_radius: INJECTIVITY_RADIUS,
        hypotheses,
    })
}

impl super::TorsionReport {
    /// Merge the curvature, volume and diameter flags into the torsion report.
    pub fn with_hypotheses(mut self, h: &HypothesisReport) -> Self {
        self.hypotheses = Hypotheses { a_i: self.hypotheses.a_i, ..h.hypotheses };
        self
    }
}
