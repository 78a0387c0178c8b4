use nalgebra::DMatrix;
use serde::Serialize;

use super::{complex_structure, KahlerForm2, Metric2};
use crate::chart_atlas::WeightPair;
use crate::error::{GeomError, Result};
use crate::report::{sweep_max, Check, Grid2};
use crate::scalar::Scalar;
use crate::tensor::{
    christoffel, curvature, exterior_derivative, jacobian, metric_at, Curvature, DerivativeScheme, Field, Form,
};

/// Fixed angles used for sweeps; the metric does not depend on them.
const PSI0: f64 = 0.3;
const PHI0: f64 = 0.7;

fn point(p: &[f64; 2]) -> [f64; 4] {
    [p[0], p[1], PSI0, PHI0]
}

#[derive(Debug, Clone, Serialize)]
pub struct RicciSummary {
    pub max_ricci: f64,
    pub max_bianchi: f64,
    pub max_riemann: f64,
}

/// Max orthonormal-frame `|Ric|` of a metric over a `(ρ, θ)` grid.
pub fn ricci_sweep(g: &Metric2, grid: &Grid2, scheme: &DerivativeScheme) -> Result<RicciSummary> {
    let pts = grid.points();
    let curv: Vec<Curvature> = {
        use rayon::prelude::*;
        pts.par_iter().map(|p| curvature(g, &point(p), scheme)).collect::<Result<_>>()?
    };
    let mut s = RicciSummary { max_ricci: 0.0, max_bianchi: 0.0, max_riemann: 0.0 };
    for c in &curv {
        s.max_ricci = s.max_ricci.max(c.max_ricci()?);
        s.max_riemann = s.max_riemann.max(c.max_riemann()?);
        s.max_bianchi = s.max_bianchi.max(c.bianchi_defect());
    }
    Ok(s)
}

/// Ricci-flatness of the metric over a grid, with the perturbed-metric negative control.
pub fn ricci_flat_check(kp: WeightPair, grid: &Grid2, tol: f64, scheme: &DerivativeScheme) -> Result<Vec<Check>> {
    let k = kp.k();
    let l = kp.l();
    let genuine = ricci_sweep(&Metric2::new(kp), grid, scheme)?;
    let perturbed = ricci_sweep(&Metric2::perturbed(kp, 1.01), grid, scheme)?;
    Ok(vec![
        Check::le(format!("max_abs_ricci_orthonormal[k={k},l={l}]"), genuine.max_ricci, tol),
        Check::le(format!("first_bianchi_defect[k={k},l={l}]"), genuine.max_bianchi, tol),
        Check::gt(format!("perturbed_metric_max_abs_ricci[k={k},l={l}]"), perturbed.max_ricci, 1e-3),
    ])
}

#[derive(Debug, Clone, Serialize)]
pub struct KahlerSummary {
    pub max_d_omega: f64,
    pub max_j_squared: f64,
    pub max_nabla_j: f64,
    pub max_antisymmetry: f64,
    pub min_abs_volume: f64,
    pub volume_sign_changes: bool,
}

/// `∇_k J^i_j` at a point, from first derivatives of `g` and `ω`.
fn nabla_j(kp: WeightPair, x: &[f64], scheme: &DerivativeScheme) -> Result<f64> {
    let gf = Metric2::new(kp);
    let wf = KahlerForm2::new(kp);
    let g = metric_at(&gf, x)?;
    let ginv = g.clone().try_inverse().ok_or(GeomError::SingularMetric)?;
    let omega = Form::from_coeffs(4, 2, wf.eval::<f64>(x)?);
    let om = omega.as_matrix();
    let j = complex_structure(&g, &omega)?;
    let dg = jacobian(&gf, x, scheme)?;
    let dw = jacobian(&wf, x, scheme)?;
    let gamma = christoffel(&gf, x, scheme)?;
    let mut worst = 0.0f64;
    for k in 0..4 {
        let dgk = DMatrix::from_row_slice(4, 4, &dg[k]);
        let dom = Form::from_coeffs(4, 2, dw[k].clone()).as_matrix();
        // J = −g⁻¹Ω  ⇒  ∂J = g⁻¹ ∂g g⁻¹ Ω − g⁻¹ ∂Ω
        let dj = &ginv * dgk * &ginv * &om - &ginv * dom;
        for i in 0..4 {
            for jj in 0..4 {
                let mut v = dj[(i, jj)];
                for m in 0..4 {
                    v += gamma[i][k][m] * j[(m, jj)] - gamma[m][k][jj] * j[(i, m)];
                }
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}

/// Closedness of `ω`, `J² = −1`, `∇J = 0` and the sign of `ω∧ω` over a grid.
pub fn kahler_sweep(kp: WeightPair, grid: &Grid2, scheme: &DerivativeScheme) -> Result<KahlerSummary> {
    use rayon::prelude::*;
    let wf = KahlerForm2::new(kp);
    let gf = Metric2::new(kp);
    let rows: Vec<[f64; 5]> = grid
        .points()
        .par_iter()
        .map(|p| {
            let x = point(p);
            let d = exterior_derivative(&wf, &x, scheme)?.max_abs();
            let g = metric_at(&gf, &x)?;
            let omega = Form::from_coeffs(4, 2, wf.eval::<f64>(&x)?);
            let j = complex_structure(&g, &omega)?;
            let j2 = (&j * &j + DMatrix::identity(4, 4)).amax();
            let anti = (&g * &j + j.transpose() * &g).amax();
            let vol = omega.wedge(&omega).coeffs[0];
            Ok([d, j2, nabla_j(kp, &x, scheme)?, anti, vol])
        })
        .collect::<Result<_>>()?;
    let mut s = KahlerSummary {
        max_d_omega: 0.0,
        max_j_squared: 0.0,
        max_nabla_j: 0.0,
        max_antisymmetry: 0.0,
        min_abs_volume: f64::INFINITY,
        volume_sign_changes: false,
    };
    let sign0 = rows.first().map(|r| r[4].signum()).unwrap_or(1.0);
    for r in &rows {
        s.max_d_omega = s.max_d_omega.max(r[0]);
        s.max_j_squared = s.max_j_squared.max(r[1]);
        s.max_nabla_j = s.max_nabla_j.max(r[2]);
        s.max_antisymmetry = s.max_antisymmetry.max(r[3]);
        s.min_abs_volume = s.min_abs_volume.min(r[4].abs());
        s.volume_sign_changes |= r[4].signum() != sign0;
    }
    Ok(s)
}

pub fn kahler_check(kp: WeightPair, grid: &Grid2, tol: f64, scheme: &DerivativeScheme) -> Result<Vec<Check>> {
    let s = kahler_sweep(kp, grid, scheme)?;
    let (k, l) = (kp.k(), kp.l());
    Ok(vec![
        Check::le(format!("sup_abs_d_omega[k={k},l={l}]"), s.max_d_omega, tol),
        Check::le(format!("max_abs_J_squared_plus_id[k={k},l={l}]"), s.max_j_squared, tol),
        Check::le(format!("max_abs_nabla_J[k={k},l={l}]"), s.max_nabla_j, 100.0 * tol),
        Check::le(format!("max_abs_gJ_plus_JTg[k={k},l={l}]"), s.max_antisymmetry, tol),
        Check::gt(format!("min_abs_omega_wedge_omega[k={k},l={l}]"), s.min_abs_volume, 0.0),
        Check::flag(format!("omega_wedge_omega_constant_sign[k={k},l={l}]"), !s.volume_sign_changes),
    ])
}

/// Metric coefficients in the coframe `(dρ, dθ, sin θ dφ, dψ + cos θ dφ)`.
fn invariant_frame_metric(g: &DMatrix<f64>, theta: f64) -> DMatrix<f64> {
    // rows: coframe covectors in (ρ, θ, ψ, φ) components
    #[rustfmt::skip]
    let e = DMatrix::from_row_slice(4, 4, &[
        1.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
        0.0, 0.0, 0.0, theta.sin(),
        0.0, 0.0, 1.0, theta.cos(),
    ]);
    let einv = e.try_inverse().expect("coframe is invertible off the axes");
    einv.transpose() * g * einv
}

/// Largest spread in `θ` of the invariant-frame coefficients at fixed `ρ`, relative to their size.
/// Zero for a cohomogeneity-one metric.
pub fn cohomogeneity_spread(kp: WeightPair, rhos: &[f64], thetas: &[f64]) -> Result<f64> {
    let g = Metric2::new(kp);
    let mut worst = 0.0f64;
    for &rho in rhos {
        let frames: Vec<DMatrix<f64>> = thetas
            .iter()
            .map(|&th| Ok(invariant_frame_metric(&metric_at(&g, &[rho, th, PSI0, PHI0])?, th)))
            .collect::<Result<_>>()?;
        let base = &frames[0];
        for f in &frames[1..] {
            worst = worst.max((f - base).amax() / base.amax());
        }
    }
    Ok(worst)
}

/// Eguchi–Hanson line element in `(r, θ, ψ, φ)` with parameter `a`:
/// `dr²/(1 − a⁴/r⁴) + (r²/4)(1 − a⁴/r⁴) σ₃² + (r²/4)(σ₁² + σ₂²)`.
pub fn eguchi_hanson_metric(r: f64, theta: f64, a: f64) -> DMatrix<f64> {
    let f = 1.0 - a.powi(4) / r.powi(4);
    let q = r * r / 4.0;
    let (s, c) = theta.sin_cos();
    let mut g = DMatrix::zeros(4, 4);
    g[(0, 0)] = 1.0 / f;
    g[(1, 1)] = q;
    g[(2, 2)] = q * f;
    g[(2, 3)] = q * f * c;
    g[(3, 2)] = q * f * c;
    g[(3, 3)] = q * f * c * c + q * s * s;
    g
}

#[derive(Debug, Clone, Serialize)]
pub struct EguchiHansonFit {
    /// Fitted radius `r(ρ)` on the sampled `ρ` values.
    pub radii: Vec<f64>,
    pub parameter: f64,
    pub parameter_spread: f64,
    pub max_relative_deviation: f64,
    pub monotone: bool,
}

/// Radius reparametrization read off `g_θθ = r²/4`.
struct RadiusOfRho;
impl Field for RadiusOfRho {
    fn input_dim(&self) -> usize {
        1
    }
    fn output_len(&self) -> usize {
        1
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        let g = Metric2::new(WeightPair::new(1, 1)?).eval(&[x[0], S::cst(1.0), S::zero(), S::zero()])?;
        Ok(vec![g[5].sqrt() * 2.0])
    }
}

/// Fit a monotone `r(ρ)` and the Eguchi–Hanson parameter, then compare line elements.
pub fn eguchi_hanson_fit(grid: &Grid2, scheme: &DerivativeScheme) -> Result<EguchiHansonFit> {
    let kp = WeightPair::new(1, 1)?;
    let g2 = Metric2::new(kp);
    let mut rhos: Vec<f64> = grid.points().iter().map(|p| p[0]).collect();
    rhos.dedup();
    let radii: Vec<f64> = rhos.iter().map(|&r| Ok(RadiusOfRho.eval::<f64>(&[r])?[0])).collect::<Result<_>>()?;
    let monotone = radii.windows(2).all(|w| w[1] > w[0]);
    if !monotone {
        return Err(GeomError::FitFailure("radius is not strictly increasing in ρ".into()));
    }
    // a⁴ = r⁴ (1 − 4 g_ψψ / r²)
    let mut params = Vec::with_capacity(rhos.len());
    for (&rho, &r) in rhos.iter().zip(&radii) {
        let g = metric_at(&g2, &[rho, 1.0, PSI0, PHI0])?;
        let a4 = r.powi(4) * (1.0 - 4.0 * g[(2, 2)] / (r * r));
        if !(a4 > 0.0) {
            return Err(GeomError::FitFailure(format!("no real parameter at ρ = {rho}")));
        }
        params.push(a4.powf(0.25));
    }
    let parameter = params.iter().sum::<f64>() / params.len() as f64;
    let parameter_spread = params.iter().map(|p| (p - parameter).abs()).fold(0.0, f64::max);
    let max_relative_deviation = sweep_max(&grid.points(), |p| {
        let x = point(p);
        let g = metric_at(&g2, &x)?;
        let r = RadiusOfRho.eval::<f64>(&[p[0]])?[0];
        let dr = jacobian(&RadiusOfRho, &[p[0]], scheme)?[0][0];
        let mut eh = eguchi_hanson_metric(r, p[1], parameter);
        // pull back along r = r(ρ)
        for j in 0..4 {
            eh[(0, j)] *= dr;
            eh[(j, 0)] *= dr;
        }
        Ok((eh - &g).amax() / g.amax())
    })?;
    Ok(EguchiHansonFit { radii, parameter, parameter_spread, max_relative_deviation, monotone })
}

pub fn eguchi_hanson_compare(grid: &Grid2, tol: f64, scheme: &DerivativeScheme) -> Result<Vec<Check>> {
    let fit = eguchi_hanson_fit(grid, scheme)?;
    let thetas: Vec<f64> = (0..7).map(|i| 0.4 + 0.35 * i as f64).collect();
    let rhos = [0.5, 1.0, 1.5, 2.0];
    let sym = cohomogeneity_spread(WeightPair::new(1, 1)?, &rhos, &thetas)?;
    let asym = cohomogeneity_spread(WeightPair::new(1, 2)?, &rhos, &thetas)?;
    Ok(vec![
        Check::le("eguchi_hanson_max_relative_deviation", fit.max_relative_deviation, tol),
        Check::le("eguchi_hanson_parameter_spread", fit.parameter_spread, tol),
        Check::flag("radius_reparametrization_monotone", fit.monotone),
        Check::le("cohomogeneity_one_spread[k=1,l=1]", sym, tol),
        Check::gt("cohomogeneity_one_spread[k=1,l=2]", asym, 1e-3),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> Grid2 {
        Grid2 { x: [0.5, 2.0], y: [0.5, 2.6], n: 4 }
    }

    #[test]
    fn eguchi_hanson_parameter_is_two() {
        let fit = eguchi_hanson_fit(&small_grid(), &DerivativeScheme::default()).unwrap();
        assert!((fit.parameter - 2.0).abs() < 1e-12);
        assert!(fit.max_relative_deviation < 1e-9);
    }

    #[test]
    fn kahler_checks_pass_on_small_grid() {
        let kp = WeightPair::new(1, 2).unwrap();
        let checks = kahler_check(kp, &small_grid(), 1e-8, &DerivativeScheme::default()).unwrap();
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
    }

    #[test]
    fn perturbation_breaks_ricci_flatness() {
        let kp = WeightPair::new(1, 1).unwrap();
        let checks = ricci_flat_check(kp, &small_grid(), 1e-6, &DerivativeScheme::default()).unwrap();
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
    }
}
