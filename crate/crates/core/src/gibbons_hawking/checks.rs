use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{grad_potential_s, GHConfig, GhMetric, GhTriple, LevelSetForm, Monopole, Potential, PulledBackGh, Source};
use crate::chart_atlas::WeightPair;
use crate::error::{GeomError, Result};
use crate::report::{sweep_max, Check, Grid2};
use crate::special_kahler::Metric2;
use crate::tensor::{curvature, exterior_derivative, form_at, jacobian, jet, metric_at, DerivativeScheme, Form};

const PSI0: f64 = 0.3;
const PHI0: f64 = 0.7;

fn angle_to(y: [f64; 3], d: [f64; 3]) -> f64 {
    let n = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
    let c = (y[0] * d[0] + y[1] * d[1] + y[2] * d[2]) / n;
    c.clamp(-1.0, 1.0).acos()
}

/// Seeded random points in a box around the sources, at least `min_dist` from every source and
/// `min_angle` away from every singular gauge direction.
pub fn safe_points(cfg: &GHConfig, n: usize, seed: u64, min_dist: f64, min_angle: f64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let srcs = cfg.sources();
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for s in srcs {
        for a in 0..3 {
            lo[a] = lo[a].min(s.x[a]);
            hi[a] = hi[a].max(s.x[a]);
        }
    }
    let pad = 1.0 + (0..3).map(|a| hi[a] - lo[a]).fold(0.0, f64::max);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x: [f64; 3] = std::array::from_fn(|a| rng.random_range(lo[a] - pad..hi[a] + pad));
        let ok = srcs.iter().enumerate().all(|(i, s)| {
            let y = [x[0] - s.x[0], x[1] - s.x[1], x[2] - s.x[2]];
            let d = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
            if d < min_dist {
                return false;
            }
            match cfg.gauge() {
                super::Gauge::Strings(dirs) => angle_to(y, dirs[i]) > min_angle,
                super::Gauge::Symmetric { symmetric_axis: n } => {
                    let a = angle_to(y, *n);
                    a > min_angle && a < std::f64::consts::PI - min_angle
                }
                super::Gauge::Radial { radial_string } => {
                    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                    let reach = (s.x[0] * s.x[0] + s.x[1] * s.x[1] + s.x[2] * s.x[2]).sqrt();
                    angle_to(x, *radial_string) > min_angle && r > 2.0 * reach + min_dist
                }
            }
        });
        if ok {
            out.push(x);
        }
    }
    out
}

/// `|rot A − grad U|` with `rot A` by the derivative scheme and `grad U` analytic.
pub fn curl_defect(cfg: &GHConfig, x: [f64; 3], scheme: &DerivativeScheme) -> Result<f64> {
    let d = jacobian(&Monopole(cfg.clone()), &x, scheme)?;
    let rot = [d[1][2] - d[2][1], d[2][0] - d[0][2], d[0][1] - d[1][0]];
    let g = grad_potential_s(cfg, &x)?;
    Ok((0..3).map(|a| (rot[a] - g[a]).abs()).fold(0.0, f64::max))
}

pub fn laplacian(cfg: &GHConfig, x: [f64; 3], scheme: &DerivativeScheme) -> Result<f64> {
    let j = jet(&Potential(cfg.clone()), &x, scheme)?;
    Ok((0..3).map(|i| j.d2[i][i][0]).sum())
}

/// `d(A − A')` for the same sources with strings along `+e₃` and `−e₃`, differentiated exactly
/// (forward mode) since the difference is closed identically.
pub fn gauge_difference_defect(cfg: &GHConfig, x: [f64; 3]) -> Result<f64> {
    let up = Monopole(cfg.with_strings([0.0, 0.0, 1.0])?);
    let down = Monopole(cfg.with_strings([0.0, 0.0, -1.0])?);
    let ad = DerivativeScheme::ad();
    let ju = jacobian(&up, &x, &ad)?;
    let jd = jacobian(&down, &x, &ad)?;
    let jac: Vec<Vec<f64>> = ju.iter().zip(&jd).map(|(a, b)| a.iter().zip(b).map(|(p, q)| p - q).collect()).collect();
    Ok(Form::exterior_from_jacobian(3, 1, &jac).max_abs())
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct TripleDefects {
    /// Largest `|dω_α|` coefficient.
    pub closed: f64,
    /// Largest `|⟨ω_α, ω_β⟩|`, `α ≠ β`.
    pub orthogonal: f64,
    /// Largest `||ω_α|² − 2|` (unit-norm triple in an orthonormal frame has `|ω|² = 2`).
    pub equal_norm: f64,
    /// Largest `|J_α² + 1|`.
    pub complex: f64,
}

pub fn triple_defects(cfg: &GHConfig, x: [f64; 3], scheme: &DerivativeScheme) -> Result<TripleDefects> {
    let p = [0.0, x[0], x[1], x[2]];
    let g = metric_at(&GhMetric(cfg.clone()), &p)?;
    let ginv = g.clone().try_inverse().ok_or(GeomError::SingularMetric)?;
    let fields: Vec<GhTriple> = (0..3).map(|alpha| GhTriple { cfg: cfg.clone(), alpha }).collect();
    let forms: Vec<Form> = fields.iter().map(|f| form_at(f, &p)).collect::<Result<_>>()?;
    let mut d = TripleDefects { closed: 0.0, orthogonal: 0.0, equal_norm: 0.0, complex: 0.0 };
    for (a, f) in fields.iter().enumerate() {
        d.closed = d.closed.max(exterior_derivative(f, &p, scheme)?.max_abs());
        for b in 0..3 {
            let ip = forms[a].inner(&forms[b], &ginv);
            if a == b {
                d.equal_norm = d.equal_norm.max((ip - 2.0).abs());
            } else {
                d.orthogonal = d.orthogonal.max(ip.abs());
            }
        }
        let j = -(&ginv * forms[a].as_matrix());
        d.complex = d.complex.max((&j * &j + DMatrix::identity(4, 4)).amax());
    }
    Ok(d)
}

/// Closedness and compatibility of the level-set form at a point: `(|dω|, |J² + 1|, |ω∧ω| − 2 vol)`.
pub fn level_set_defects(cfg: &GHConfig, x: [f64; 3], scheme: &DerivativeScheme) -> Result<[f64; 3]> {
    let p = [0.0, x[0], x[1], x[2]];
    let f = LevelSetForm(cfg.clone());
    let w = form_at(&f, &p)?;
    let g = metric_at(&GhMetric(cfg.clone()), &p)?;
    let ginv = g.clone().try_inverse().ok_or(GeomError::SingularMetric)?;
    let j = -(&ginv * w.as_matrix());
    let vol = g.determinant().sqrt();
    Ok([
        exterior_derivative(&f, &p, scheme)?.max_abs(),
        (&j * &j + DMatrix::identity(4, 4)).amax(),
        (w.wedge(&w).coeffs[0].abs() - 2.0 * vol).abs() / vol,
    ])
}

fn gh_point(x: &[f64; 3]) -> [f64; 4] {
    [0.0, x[0], x[1], x[2]]
}

/// Potential, monopole, hyperkähler-triple and curvature checks for one configuration,
/// plus the one-centre flatness and two-centre self-dual Weyl checks.
pub fn gh_curl_check(
    cfg: &GHConfig,
    n_points: usize,
    n_curvature: usize,
    seed: u64,
    tol: f64,
    scheme: &DerivativeScheme,
) -> Result<Vec<Check>> {
    let pts = safe_points(cfg, n_points, seed, 0.2, 0.05);
    let curl = sweep_max(&pts, |x| curl_defect(cfg, *x, scheme))?;
    let lap = sweep_max(&pts, |x| laplacian(cfg, *x, scheme).map(f64::abs))?;
    let gauge = sweep_max(&pts, |x| gauge_difference_defect(cfg, *x))?;
    let triples: Vec<TripleDefects> = pts.par_iter().map(|x| triple_defects(cfg, *x, scheme)).collect::<Result<_>>()?;
    let tmax = |f: fn(&TripleDefects) -> f64| triples.iter().map(f).fold(0.0, f64::max);
    let level = sweep_max(&pts, |x| {
        let d = level_set_defects(cfg, *x, scheme)?;
        Ok(d[1].max(d[2]))
    })?;

    let curv_pts = &pts[..n_curvature.min(pts.len())];
    let curv_at = |c: &GHConfig, x: &[f64; 3]| curvature(&GhMetric(c.with_strings_away_from(x)?), &gh_point(x), scheme);
    let ricci = sweep_max(curv_pts, |x| curv_at(cfg, x)?.max_ricci())?;

    let one = GHConfig::single(1);
    let one_pts = safe_points(&one, n_curvature, seed ^ 0x5eed, 0.3, 0.05);
    let flat = sweep_max(&one_pts, |x| curv_at(&one, x)?.max_riemann())?;
    let one_level = sweep_max(&one_pts, |x| Ok(level_set_defects(&one, *x, scheme)?[0]))?;

    let two = GHConfig::new(
        vec![Source { x: [-1.0, 0.0, 0.0], m: 1 }, Source { x: [1.0, 0.0, 0.0], m: 1 }],
        None,
        cfg.period(),
    )?;
    let two_pts = safe_points(&two, n_curvature, seed ^ 0x7a0, 0.3, 0.05);
    let two_curv: Vec<_> = two_pts.par_iter().map(|x| curv_at(&two, x)).collect::<Result<_>>()?;
    // the triple is self-dual for the orientation −dτ∧dx₁∧dx₂∧dx₃
    let w_plus = two_curv.iter().map(|c| c.weyl_self_dual_max(-1.0)).collect::<Result<Vec<_>>>()?;
    let w_minus = two_curv.iter().map(|c| c.weyl_self_dual_max(1.0)).collect::<Result<Vec<_>>>()?;

    Ok(vec![
        Check::le("sup_rot_A_minus_grad_U", curl, tol),
        Check::le("sup_abs_laplacian_U", lap, 1e-7),
        Check::le("sup_d_gauge_difference", gauge, 1e-10),
        Check::le("triple_sup_d_omega", tmax(|d| d.closed), tol),
        Check::le("triple_sup_orthogonality", tmax(|d| d.orthogonal), tol),
        Check::le("triple_sup_norm_mismatch", tmax(|d| d.equal_norm), tol),
        Check::le("triple_sup_J_squared_plus_id", tmax(|d| d.complex), tol),
        Check::le("level_set_form_compatibility", level, tol),
        Check::le("level_set_form_d_one_center", one_level, tol),
        Check::le("max_abs_ricci_orthonormal", ricci, 1e-6),
        Check::le("one_center_max_abs_riemann", flat, 1e-6),
        Check::le("two_center_max_abs_W_plus", w_plus.iter().copied().fold(0.0, f64::max), 1e-6),
        Check::gt("two_center_max_abs_W_minus", w_minus.iter().copied().fold(0.0, f64::max), 1e-3),
    ])
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct LimitFit {
    /// Least-squares constant with `pullback ≈ c · metric (2)`.
    pub c: f64,
    /// Largest `‖P − cM‖_F / ‖cM‖_F` over the grid.
    pub max_rel_deviation: f64,
    /// Spread `(max − min)/mean` of the per-point least-squares ratios.
    pub ratio_spread: f64,
}

/// Fit one constant between the pulled-back GH metric and metric (2) over a `(ρ, θ)` grid.
pub fn limit_coincidence(kp: WeightPair, grid: &Grid2, scale: u32) -> Result<LimitFit> {
    let pb = PulledBackGh::new(kp, scale)?;
    let m2 = Metric2::new(kp);
    let pairs: Vec<(DMatrix<f64>, DMatrix<f64>)> = grid
        .points()
        .par_iter()
        .map(|p| {
            let x = [p[0], p[1], PSI0, PHI0];
            Ok((metric_at(&pb, &x)?, metric_at(&m2, &x)?))
        })
        .collect::<Result<_>>()?;
    if pairs.is_empty() {
        return Err(GeomError::Config("empty grid".into()));
    }
    let num: f64 = pairs.iter().map(|(p, m)| p.dot(m)).sum();
    let den: f64 = pairs.iter().map(|(_, m)| m.dot(m)).sum();
    let c = num / den;
    let mut dev = 0.0f64;
    let ratios: Vec<f64> = pairs
        .iter()
        .map(|(p, m)| {
            dev = dev.max((p - m * c).norm() / (m * c).norm());
            p.dot(m) / m.dot(m)
        })
        .collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let spread = (ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - ratios.iter().copied().fold(f64::INFINITY, f64::min))
        / mean;
    if !(c > 0.0) {
        return Err(GeomError::NoSingleConstant(f64::INFINITY));
    }
    Ok(LimitFit { c, max_rel_deviation: dev, ratio_spread: spread })
}

/// One global constant matching the two metrics; errors with `NoSingleConstant` when none does.
/// Also checks that doubling the multiplicities (with the forced `τ` rescaling) doubles `c`.
pub fn limit_coincidence_check(kp: WeightPair, grid: &Grid2, tol: f64) -> Result<(f64, Vec<Check>)> {
    let fit = limit_coincidence(kp, grid, 1)?;
    if fit.max_rel_deviation > tol {
        return Err(GeomError::NoSingleConstant(fit.max_rel_deviation));
    }
    let doubled = limit_coincidence(kp, grid, 2)?;
    let (k, l) = (kp.k(), kp.l());
    Ok((
        fit.c,
        vec![
            Check::le(format!("max_rel_deviation[k={k},l={l}]"), fit.max_rel_deviation, tol),
            Check::gt(format!("fitted_constant_c[k={k},l={l}]"), fit.c, 0.0),
            Check::le(format!("doubled_sources_max_rel_deviation[k={k},l={l}]"), doubled.max_rel_deviation, tol),
            Check::near(format!("doubled_sources_c_ratio[k={k},l={l}]"), doubled.c / fit.c, 2.0, tol),
        ],
    ))
}
