use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::chart_atlas::WeightPair;
use crate::error::GeomError;
use crate::gibbons_hawking::{EstimateRegion, GhTriple, TriplePrimitive, DEFAULT_EPS_SPLIT};
use crate::scalar::Scalar;
use crate::tensor::{exterior_derivative, form_at, DerivativeScheme, Field, FormField};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn kummer_involution_has_sixteen_half_periods() {
    let pts = fixed_points(&TorusAutomorphism::involution(), &LatticeTorus::square()).unwrap();
    assert_eq!(pts.len(), 16);
    let allowed = [c(0.0, 0.0), c(0.5, 0.0), c(0.0, 0.5), c(0.5, 0.5)];
    for p in &pts {
        for z in p.z {
            assert!(allowed.iter().any(|a| (a - z).norm() < 1e-15), "{z}");
        }
    }
}

#[test]
fn gamma_has_nine_fixed_points() {
    let torus = LatticeTorus::z3_family([c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
    let pts = fixed_points(&TorusAutomorphism::gamma(), &torus).unwrap();
    assert_eq!(pts.len(), 9);
    let e = c(1.0, 0.0) + lattice::hexagonal_e2();
    let allowed = [c(0.0, 0.0), e / 3.0, e * 2.0 / 3.0];
    for p in &pts {
        for z in p.z {
            // second factor carries the conjugate lattice, which is again Λ₀; compare modulo Λ₀
            let ok = allowed.iter().any(|a| {
                let d = z - a;
                // coordinates in the basis (1, e^{iπ/3})
                let b = d.im / lattice::hexagonal_e2().im;
                let a0 = d.re - b * lattice::hexagonal_e2().re;
                (a0 - a0.round()).abs() < 1e-12 && (b - b.round()).abs() < 1e-12
            });
            assert!(ok, "{z}");
        }
    }
}

#[test]
fn gamma_order_and_invariance() {
    let g = TorusAutomorphism::gamma();
    assert_eq!(g.order(12), Some(3));
    let g3 = g.real_matrix().pow(3);
    assert!((g3 - nalgebra::Matrix4::identity()).abs().max() < 1e-15);
    let torus = LatticeTorus::z3_family([c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
    let n = g.lattice_matrix(&torus).unwrap();
    assert!(n.iter().flatten().all(|v| v.abs() <= 1));
    assert_eq!(TorusAutomorphism::involution().order(12), Some(2));
}

#[test]
fn nine_points_for_random_invariant_lattices() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut done = 0;
    while done < 20 {
        let mut r = || c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let (l, m) = ([r(), r()], [r(), r()]);
        if (l[0] * m[1] - l[1] * m[0]).norm() < 0.1 {
            continue;
        }
        let torus = LatticeTorus::z3_family(l, m).unwrap();
        assert_eq!(fixed_points(&TorusAutomorphism::gamma(), &torus).unwrap().len(), 9);
        done += 1;
    }
}

#[test]
fn non_invariant_and_non_isolated() {
    // the square lattice is not preserved by γ
    let e = fixed_points(&TorusAutomorphism::gamma(), &LatticeTorus::square()).unwrap_err();
    assert!(matches!(e, GeomError::NotInvariant(_)));
    assert_eq!(fixed_points(&TorusAutomorphism::identity(), &LatticeTorus::square()), Err(GeomError::NotIsolated));
    // the literal unconjugated family is not γ-invariant in general
    let l = [c(1.0, 0.0), c(0.0, 0.0)];
    let m = [c(0.0, 0.0), c(1.0, 0.0)];
    let e2 = lattice::hexagonal_e2();
    let basis =
        [[l[0].re, l[0].im, 0.0, 0.0], [e2.re, e2.im, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, e2.re, e2.im]];
    let _ = m;
    let t = LatticeTorus::new(basis).unwrap();
    // Λ₀ × Λ₀ happens to be conjugation invariant, so γ still preserves it
    assert_eq!(fixed_points(&TorusAutomorphism::gamma(), &t).unwrap().len(), 9);
    assert!(LatticeTorus::z3_family([c(1.0, 0.0), c(2.0, 0.0)], [c(0.5, 0.0), c(1.0, 0.0)]).is_err());
}

#[test]
fn admissible_orders_agree_with_search() {
    let expected: std::collections::BTreeSet<u32> = [3, 4, 6].into_iter().collect();
    assert_eq!(admissible_orders(12), expected);
    assert_eq!(admissible_orders_by_search(12, 3), expected);
    assert!(!admissible_orders(12).contains(&5) && !admissible_orders(12).contains(&7));
    assert_eq!(admissible_orders_with_involution(12), [2, 3, 4, 6].into_iter().collect());
    assert_eq!(lattice::totient(5), 4);
    assert_eq!(lattice::totient(12), 4);
}

#[test]
fn resolution_ledger() {
    let kp = |k, l| WeightPair::new(k, l).unwrap();
    assert_eq!(local_model_check(3, kp(1, 2)).unwrap(), vec![2]);
    assert_eq!(local_model_check(2, kp(1, 1)).unwrap(), Vec::<u32>::new());
    assert_eq!(local_model_check(4, kp(1, 2)), Err(GeomError::WeightMismatch { p: 4, k: 1, l: 2 }));
    let ledger = z3_pipeline(9).unwrap();
    assert_eq!(ledger.steps(), 2);
    assert_eq!([ledger.singular_count(0), ledger.singular_count(1), ledger.singular_count(2)], [9, 9, 0]);
    let json = serde_json::to_string(&ledger.entries()).unwrap();
    assert_eq!(
        json,
        r#"[{"order":3,"count":9,"stage":0},{"order":2,"count":9,"stage":1},{"order":3,"count":0,"stage":1},{"order":2,"count":0,"stage":2}]"#
    );
}

#[test]
fn moduli_totals() {
    let m = moduli_dimensions(16, 9);
    assert_eq!(m[0].base, 10);
    assert_eq!(m[0].stages[0].per_point, 3);
    assert_eq!(m[0].stages[0].coset, 2);
    assert_eq!(m[0].total, 58);
    assert_eq!(m[1].base, 4);
    assert!(m[1].stages.iter().all(|s| s.per_point == 3 && s.coset == 2 && s.homothety == 1));
    assert_eq!(m[1].total, 58);
}

#[test]
fn cutoff_plateaus_and_monotone() {
    let cut = GluingSchedule::default().cutoff();
    let (z, _) = cut.profile(1.0 / 3.0);
    let (o, _) = cut.profile(0.5);
    assert_eq!((z, o), (0.0, 1.0));
    let mut prev = 0.0;
    for i in 0..=2000 {
        let r = i as f64 / 2000.0;
        let (u, du) = cut.profile(r);
        assert!((0.0..=1.0).contains(&u) && du >= 0.0 && u >= prev);
        // derivative matches a central difference
        let h = 1e-6;
        let fd = (cut.profile(r + h).0 - cut.profile(r - h).0) / (2.0 * h);
        assert!((fd - du).abs() < 1e-6, "{r}");
        prev = u;
    }
    assert!(GluingSchedule { delta: 0.6, ..GluingSchedule::default() }.validate().is_err());
}

fn blend_for(t: f64, cutoff: Cutoff) -> GhBlend {
    let (bar, cfg) = blend::blend_configs(t, 1.0).unwrap();
    let pts = blend::blend_check_points(&GluingSchedule::default());
    blend_forms(
        GhTriple { cfg: bar.clone(), alpha: 0 },
        GhTriple { cfg: cfg.clone(), alpha: 0 },
        TriplePrimitive { cfg: bar, alpha: 0 },
        TriplePrimitive { cfg, alpha: 0 },
        cutoff,
        &pts,
        &DerivativeScheme::ad(),
    )
    .unwrap()
}

#[test]
fn constant_cutoffs_select_one_side() {
    let x = [0.2, 0.1, 0.2, 0.15];
    let one = blend_for(0.1, Cutoff::Constant(1.0));
    assert_eq!(form_at(&one, &x).unwrap(), form_at(&one.omega_bar, &x).unwrap());
    let zero = blend_for(0.1, Cutoff::Constant(0.0));
    assert_eq!(form_at(&zero, &x).unwrap(), form_at(&zero.omega_t, &x).unwrap());
}

#[test]
fn blended_form_is_closed() {
    let b = blend_for(0.2, GluingSchedule::default().cutoff());
    for x in blend::blend_check_points(&GluingSchedule::default()) {
        let d = exterior_derivative(&b, &x, &DerivativeScheme::ad()).unwrap().max_abs();
        assert!(d < 1e-12, "{d}");
        let fd = exterior_derivative(&b, &x, &DerivativeScheme::default()).unwrap().max_abs();
        assert!(fd < 1e-8, "{fd}");
    }
}

#[test]
fn wrong_primitive_is_rejected() {
    let (bar, cfg) = blend::blend_configs(0.1, 1.0).unwrap();
    let e = blend_forms(
        GhTriple { cfg: bar.clone(), alpha: 0 },
        GhTriple { cfg: cfg.clone(), alpha: 0 },
        TriplePrimitive { cfg: bar, alpha: 1 },
        TriplePrimitive { cfg, alpha: 0 },
        Cutoff::Constant(0.5),
        &blend::blend_check_points(&GluingSchedule::default()),
        &DerivativeScheme::ad(),
    )
    .unwrap_err();
    assert!(matches!(e, GeomError::BadPrimitive(_)));
}

#[test]
fn blend_estimate_slopes() {
    let s = DerivativeScheme::default();
    let ts = [0.1, 0.05, 0.025];
    let sched = GluingSchedule::default();
    let r = EstimateRegion::default();
    for order in 0..3 {
        let a = blend_difference_norms(&ts, &r, &sched, order, DEFAULT_EPS_SPLIT, &s).unwrap();
        let b = blend_difference_norms(&ts, &r.doubled(), &sched, order, DEFAULT_EPS_SPLIT, &s).unwrap();
        for fit in [&a.fit, &b.fit] {
            assert!((3.8..=4.2).contains(&fit.slope) && fit.residual <= 0.05, "order {order}: {fit:?}");
        }
        assert!((a.fit.slope - b.fit.slope).abs() < 0.05);
    }
}

/// `Σ dx_{2a}∧dx_{2a+1}` on `R⁴`.
#[derive(Debug)]
struct FlatKahler;
impl Field for FlatKahler {
    fn input_dim(&self) -> usize {
        4
    }
    fn output_len(&self) -> usize {
        6
    }
    fn eval<S: Scalar>(&self, _x: &[S]) -> crate::Result<Vec<S>> {
        let (o, z) = (S::one(), S::zero());
        Ok(vec![o, z, z, z, z, o])
    }
}
impl FormField for FlatKahler {
    fn degree(&self) -> usize {
        2
    }
}

/// `dβ` for a quadratic 1-form `β_j = Σ a_jk x_k + Σ b_jkl x_k x_l` on `R⁴`.
struct ExactQuadratic {
    a: [[f64; 4]; 4],
    b: [[[f64; 4]; 4]; 4],
}
impl ExactQuadratic {
    fn beta_derivative<S: Scalar>(&self, x: &[S], i: usize, j: usize) -> S {
        // ∂_i β_j
        let mut acc = S::cst(self.a[j][i]);
        for k in 0..4 {
            acc += x[k] * (self.b[j][i][k] + self.b[j][k][i]);
        }
        acc
    }
}
impl Field for ExactQuadratic {
    fn input_dim(&self) -> usize {
        4
    }
    fn output_len(&self) -> usize {
        6
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> crate::Result<Vec<S>> {
        Ok(crate::tensor::forms::multi_indices(4, 2)
            .iter()
            .map(|ij| self.beta_derivative(x, ij[0], ij[1]) - self.beta_derivative(x, ij[1], ij[0]))
            .collect())
    }
}
impl FormField for ExactQuadratic {
    fn degree(&self) -> usize {
        2
    }
}

fn r4_annulus() -> Annulus {
    Annulus { r0: 0.5, r1: 1.5, passive: 0, pole: vec![0.0, 0.0, 0.0, 1.0] }
}

fn r4_points() -> Vec<Vec<f64>> {
    vec![vec![0.6, 0.2, -0.3, 0.1], vec![-0.4, 0.7, 0.5, 0.3], vec![0.1, -0.9, 0.2, -0.4], vec![1.0, 0.3, 0.2, 0.5]]
}

#[test]
fn flat_kahler_primitive() {
    let s = DerivativeScheme::default();
    let (eta, rep) = primitive_on_annulus(FlatKahler, r4_annulus(), &r4_points(), &s).unwrap();
    assert!(rep.residual <= 1e-8, "{}", rep.residual);
    // against the radial primitive ½ Σ (x dy − y dx): the difference is closed
    let std = |x: &[f64]| vec![-0.5 * x[1], 0.5 * x[0], -0.5 * x[3], 0.5 * x[2]];
    let diff = crate::tensor::Sampled::new(4, 4, |x: &[f64]| {
        let e = eta.eval_f64(x)?;
        Ok(e.iter().zip(std(x)).map(|(a, b)| a - b).collect())
    });
    struct AsForm<F>(F);
    impl<F: Field> Field for AsForm<F> {
        fn input_dim(&self) -> usize {
            4
        }
        fn output_len(&self) -> usize {
            4
        }
        fn eval<S: Scalar>(&self, x: &[S]) -> crate::Result<Vec<S>> {
            self.0.eval(x)
        }
        fn ad_capable(&self) -> bool {
            false
        }
    }
    impl<F: Field> FormField for AsForm<F> {
        fn degree(&self) -> usize {
            1
        }
    }
    for p in r4_points() {
        assert!(exterior_derivative(&AsForm(&diff), &p, &s).unwrap().max_abs() < 1e-8);
    }
}

#[test]
fn primitive_rejects_bad_input() {
    let s = DerivativeScheme::default();
    let bad = Annulus { r0: 1.0, r1: 0.5, ..r4_annulus() };
    assert!(primitive_on_annulus(FlatKahler, bad, &r4_points(), &s).unwrap_err().is_config());
    // a non-closed form has no primitive
    #[derive(Debug)]
    struct NotClosed;
    impl Field for NotClosed {
        fn input_dim(&self) -> usize {
            4
        }
        fn output_len(&self) -> usize {
            6
        }
        fn eval<S: Scalar>(&self, x: &[S]) -> crate::Result<Vec<S>> {
            let z = S::zero();
            Ok(vec![x[2], z, z, z, z, z])
        }
    }
    impl FormField for NotClosed {
        fn degree(&self) -> usize {
            2
        }
    }
    let e = primitive_on_annulus(NotClosed, r4_annulus(), &r4_points(), &s).unwrap_err();
    assert!(matches!(e, GeomError::ResidualTooLarge(_)));
}

#[test]
fn primitive_of_gh_difference_scales_like_t4() {
    let s = DerivativeScheme::default();
    let pts: Vec<Vec<f64>> = vec![
        vec![0.0, 0.2, 0.1, 0.3],
        vec![0.4, -0.3, 0.25, 0.1],
        vec![1.0, 0.1, -0.35, -0.2],
        vec![2.0, -0.15, -0.1, 0.4],
    ];
    let mut norms = Vec::new();
    let ts = [0.1, 0.05, 0.025];
    for t in ts {
        let (bar, cfg) = blend::blend_configs(t, 1.0).unwrap();
        let f = FormDifference(GhTriple { cfg, alpha: 0 }, GhTriple { cfg: bar, alpha: 0 });
        let (eta, rep) = primitive_on_annulus(f, Annulus::gh(1.0 / 16.0, 1.0), &pts, &s).unwrap();
        assert!(rep.residual <= 1e-6 * t.powi(4) * 1e3, "{}", rep.residual);
        let n =
            pts.iter().map(|p| eta.eval_f64(p).unwrap().iter().fold(0.0f64, |m, v| m.max(v.abs()))).fold(0.0, f64::max);
        norms.push(n);
    }
    let fit = crate::fit::loglog_slope(&ts, &norms).unwrap();
    assert!((3.8..=4.2).contains(&fit.slope), "{fit:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn primitive_recovers_exact_forms(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0)));
        let b = std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0))));
        let f = ExactQuadratic { a, b };
        let (_, rep) = primitive_on_annulus(f, r4_annulus(), &r4_points(), &DerivativeScheme::default()).unwrap();
        prop_assert!(rep.residual <= 1e-8, "{}", rep.residual);
    }

    #[test]
    fn cyclic_actions_have_expected_order(p in 2u32..9, q in 1i64..9) {
        let a = TorusAutomorphism::cyclic(p, q);
        let g = {
            fn gcd(a: u32, b: u32) -> u32 { if b == 0 { a } else { gcd(b, a % b) } }
            gcd(p, q as u32)
        };
        prop_assert_eq!(a.order(24), Some(p / g));
    }
}
