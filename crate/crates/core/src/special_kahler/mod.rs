//! The special Kähler metric on `M_{k,l}` in special coordinates `(ρ, θ, ψ, φ)`,
//! its Kähler form, and the verification routines built on them.
//!
//! With `D = ch ρ − a cos θ` the metric is `D (dρ² + dθ²)` plus the block
//!
//! ```text
//! g_ψψ = (sh²ρ + a² sin²θ)/D,  g_φφ = (sh²ρ cos²θ + ch²ρ sin²θ)/D,
//! g_ψφ = (sh²ρ cos θ + a ch ρ sin²θ)/D
//! ```
//!
//! and `ω = sh ρ dρ∧dψ − a sin θ dθ∧dψ + sh ρ cos θ dρ∧dφ − ch ρ sin θ dθ∧dφ`.

mod checks;
mod holonomy;

pub use checks::{
    cohomogeneity_spread, eguchi_hanson_compare, kahler_check, ricci_flat_check, EguchiHansonFit, KahlerSummary,
    RicciSummary,
};
pub use holonomy::{
    axis_holonomy, holonomy_check, parallel_transport, random_loop, transport, AxisHolonomy, Circle, Curve,
    HolonomyElement, LinePath, LoopShape, PeriodicSpline, LOOP_DIAMETER,
};

use nalgebra::DMatrix;

use crate::chart_atlas::{SpecialCoords, WeightPair};
use crate::error::{GeomError, Result};
use crate::scalar::Scalar;
use crate::tensor::{metric_at, Field, Form, FormField, MetricField};

/// The special-coordinate evaluator refuses `ρ` below this; use the charts there.
pub const RHO_MIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metric2 {
    pub kp: WeightPair,
    /// Homothety parameter: the metric is `t² ds²(1)`.
    pub t: f64,
    /// Factor applied to `g_ρρ` only (1 for the genuine metric).
    pub perturb_rr: f64,
}

impl Metric2 {
    pub fn new(kp: WeightPair) -> Self {
        Self { kp, t: 1.0, perturb_rr: 1.0 }
    }
    pub fn with_homothety(kp: WeightPair, t: f64) -> Self {
        Self { kp, t, perturb_rr: 1.0 }
    }
    pub fn perturbed(kp: WeightPair, factor: f64) -> Self {
        Self { kp, t: 1.0, perturb_rr: factor }
    }
}

fn check_rho<S: Scalar>(x: &[S]) -> Result<()> {
    let rho = x[0].re();
    if !(rho >= RHO_MIN) {
        return Err(GeomError::DegeneratePoint(format!(
            "ρ = {rho:.3e} is below {RHO_MIN:.0e}; evaluate in the (z, α) or (w, β) chart"
        )));
    }
    Ok(())
}

impl Field for Metric2 {
    fn input_dim(&self) -> usize {
        4
    }
    fn output_len(&self) -> usize {
        16
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        check_rho(x)?;
        let a = self.kp.a();
        let t2 = self.t * self.t;
        let (sh, ch) = (x[0].sinh(), x[0].cosh());
        let (s, c) = (x[1].sin(), x[1].cos());
        let d = ch - c * a;
        let inv = d.recip() * t2;
        let (sh2, s2) = (sh * sh, s * s);
        let gpp = (sh2 + s2 * (a * a)) * inv;
        let gff = (sh2 * c * c + ch * ch * s2) * inv;
        let gpf = (sh2 * c + ch * s2 * a) * inv;
        let z = S::zero();
        let dd = d * t2;
        Ok(vec![
            dd * self.perturb_rr,
            z,
            z,
            z, //
            z,
            dd,
            z,
            z, //
            z,
            z,
            gpp,
            gpf, //
            z,
            z,
            gpf,
            gff,
        ])
    }
}

impl MetricField for Metric2 {
    fn in_domain(&self, x: &[f64]) -> bool {
        x[0] >= RHO_MIN && x[1].sin() > 1e-9
    }
}

/// The Kähler form `ω` (scaled by `t²`), coefficients on `(ρθ, ρψ, ρφ, θψ, θφ, ψφ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KahlerForm2 {
    pub kp: WeightPair,
    pub t: f64,
}

impl KahlerForm2 {
    pub fn new(kp: WeightPair) -> Self {
        Self { kp, t: 1.0 }
    }
}

impl Field for KahlerForm2 {
    fn input_dim(&self) -> usize {
        4
    }
    fn output_len(&self) -> usize {
        6
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        let a = self.kp.a();
        let t2 = self.t * self.t;
        let (sh, ch) = (x[0].sinh(), x[0].cosh());
        let (s, c) = (x[1].sin(), x[1].cos());
        Ok(vec![S::zero(), sh * t2, sh * c * t2, -s * (a * t2), -(ch * s) * t2, S::zero()])
    }
}

impl FormField for KahlerForm2 {
    fn degree(&self) -> usize {
        2
    }
}

/// Metric coefficients at a point in the order `(ρ, θ, ψ, φ)`.
pub fn metric2_eval(sc: &SpecialCoords, kp: WeightPair) -> Result<DMatrix<f64>> {
    if sc.rho < RHO_MIN && (sc.theta.sin().abs() < 1e-12) {
        return Err(GeomError::DegeneratePoint("ρ = 0 on a singular axis".into()));
    }
    let x = sc.to_array();
    check_rho(&x)?;
    let v = Metric2::new(kp).eval::<f64>(&x)?;
    Ok(DMatrix::from_row_slice(4, 4, &v))
}

/// `J` with `ω(X, Y) = g(JX, Y)`, i.e. `J = −g⁻¹Ω`.
pub fn complex_structure(g: &DMatrix<f64>, omega: &Form) -> Result<DMatrix<f64>> {
    let ginv = g.clone().try_inverse().ok_or(GeomError::SingularMetric)?;
    Ok(-(ginv * omega.as_matrix()))
}

/// `J` at a point of the special coordinate domain.
pub fn complex_structure_at(kp: WeightPair, x: &[f64]) -> Result<DMatrix<f64>> {
    let g = metric_at(&Metric2::new(kp), x)?;
    let w = Form::from_coeffs(4, 2, KahlerForm2::new(kp).eval::<f64>(x)?);
    complex_structure(&g, &w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{curvature, DerivativeScheme};
    use proptest::prelude::*;

    #[test]
    fn eguchi_hanson_point_value() {
        let kp = WeightPair::new(1, 1).unwrap();
        let g = metric2_eval(&SpecialCoords::new(1.0, std::f64::consts::FRAC_PI_2, 0.0, 0.0), kp).unwrap();
        assert!((g[(0, 0)] - 1.5430806348152437).abs() < 1e-12);
        assert_eq!(g[(0, 0)], g[(1, 1)]);
    }

    #[test]
    fn refuses_the_zero_section() {
        let kp = WeightPair::new(1, 2).unwrap();
        assert!(matches!(
            metric2_eval(&SpecialCoords::new(0.0, 0.0, 0.0, 0.0), kp),
            Err(GeomError::DegeneratePoint(_))
        ));
        assert!(metric2_eval(&SpecialCoords::new(1e-8, 1.0, 0.0, 0.0), kp).is_err());
    }

    #[test]
    fn homothety_scales_coefficients_by_t_squared() {
        let kp = WeightPair::new(2, 3).unwrap();
        let x = [0.9, 1.3, 0.1, 0.2];
        let g1 = Metric2::new(kp).eval::<f64>(&x).unwrap();
        let gt = Metric2::with_homothety(kp, 0.3).eval::<f64>(&x).unwrap();
        for (a, b) in g1.iter().zip(&gt) {
            assert!((0.09 * a - b).abs() <= 1e-15 * a.abs().max(1.0));
        }
    }

    #[test]
    fn kahler_form_is_closed_exactly_under_ad() {
        let kp = WeightPair::new(1, 2).unwrap();
        let d =
            crate::tensor::exterior_derivative(&KahlerForm2::new(kp), &[0.8, 1.2, 0.0, 0.0], &DerivativeScheme::ad())
                .unwrap();
        assert!(d.max_abs() < 1e-15);
    }

    #[test]
    fn ricci_flat_at_reference_point() {
        let kp = WeightPair::new(1, 2).unwrap();
        let c = curvature(&Metric2::new(kp), &[1.0, 1.0, 0.0, 0.0], &DerivativeScheme::default()).unwrap();
        assert!(c.max_ricci().unwrap() < 1e-6);
        assert!(c.max_riemann().unwrap() > 1e-2);
        assert!(c.bianchi_defect() < 1e-7);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn positive_definite_and_compatible(kl in prop_oneof![Just((1u32, 2u32)), Just((2, 3)), Just((3, 4))],
                                            rho in 0.01f64..4.0, theta in 0.01f64..3.13) {
            let kp = WeightPair::new(kl.0, kl.1).unwrap();
            let x = [rho, theta, 0.3, -0.4];
            let g = metric_at(&Metric2::new(kp), &x).unwrap();
            prop_assert!(g.clone().symmetric_eigenvalues().iter().all(|e| *e > 0.0));
            let j = complex_structure_at(kp, &x).unwrap();
            let scale = g.amax().max(1.0);
            prop_assert!((&j * &j + DMatrix::identity(4, 4)).amax() < 1e-8 * scale);
            prop_assert!((&g * &j + j.transpose() * &g).amax() < 1e-10 * scale);
        }
    }
}
