use nalgebra::DMatrix;
use proptest::prelude::*;
use skm_core::cli::{fmt_f64, RunConfig};
use skm_core::gibbons_hawking::{potential, GHConfig, GhMetric, Source};
use skm_core::tensor::{curvature, metric_at, orthonormal_frame, DerivativeScheme, Form};

fn form(dim: usize, degree: usize, coeffs: &[f64]) -> Form {
    let mut f = Form::zero(dim, degree);
    for (c, v) in f.coeffs.iter_mut().zip(coeffs) {
        *c = *v;
    }
    f
}

fn spd(entries: &[f64]) -> DMatrix<f64> {
    let a = DMatrix::from_row_slice(4, 4, entries);
    &a * a.transpose() + DMatrix::identity(4, 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn float_text_round_trips(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn wedge_is_graded_commutative(a in prop::collection::vec(-1.0f64..1.0, 4), b in prop::collection::vec(-1.0f64..1.0, 6)) {
        let (x, y) = (form(4, 1, &a), form(4, 2, &b));
        // (−1)^{1·2} = +1
        prop_assert!(x.wedge(&y).sub(&y.wedge(&x)).max_abs() < 1e-14);
        prop_assert!(x.wedge(&x).max_abs() < 1e-15);
    }

    #[test]
    fn hodge_star_squares_to_sign(c in prop::collection::vec(-1.0f64..1.0, 6), m in prop::collection::vec(-0.5f64..0.5, 16)) {
        // on 2-forms in dimension 4 with a Riemannian metric, ** = +1
        let g = spd(&m);
        let w = form(4, 2, &c);
        let back = w.hodge_star(&g, 1.0).unwrap().hodge_star(&g, 1.0).unwrap();
        prop_assert!(back.sub(&w).max_abs() < 1e-10 * (1.0 + w.max_abs()));
    }

    #[test]
    fn potential_ignores_source_order(x in prop::array::uniform3(-3.0f64..3.0), m1 in 1u32..4, m2 in 1u32..4) {
        let a = Source { x: [-1.0, 0.2, 0.0], m: m1 };
        let b = Source { x: [1.0, -0.3, 0.5], m: m2 };
        let p = GHConfig::new(vec![a, b], None, 1.0).unwrap();
        let q = GHConfig::new(vec![b, a], None, 1.0).unwrap();
        prop_assume!(p.source_distance(&x) > 0.05);
        prop_assert!((potential(&p, x).unwrap() - potential(&q, x).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn run_config_round_trips(seed in any::<u64>(), k in 1u32..6, l in 1u32..6, grid in 2usize..40) {
        let cfg = RunConfig { seed, k, l, grid: Some(grid), ..RunConfig::default() };
        let text = serde_json::to_string(&cfg).unwrap();
        prop_assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn curvature_is_gauge_independent(x in prop::array::uniform3(-2.0f64..2.0), z in 0.5f64..2.0) {
        let x = [x[0], x[1], z];
        let cfg = GHConfig::new(
            vec![Source { x: [-1.0, 0.0, 0.0], m: 2 }, Source { x: [1.0, 0.0, 0.0], m: 1 }],
            None,
            1.0,
        )
        .unwrap();
        prop_assume!(cfg.singular_distance(&x) > 0.3);
        let p = [0.0, x[0], x[1], x[2]];
        let ad = DerivativeScheme::ad();
        // |Rm|² over orthonormal components does not depend on the frame
        let norm = |g: GhMetric| {
            let frame = orthonormal_frame(&metric_at(&g, &p).unwrap()).unwrap();
            curvature(&g, &p, &ad).unwrap().riemann_frame(&frame).iter().map(|v| v * v).sum::<f64>().sqrt()
        };
        let a = norm(GhMetric(cfg.clone()));
        let b = norm(GhMetric(cfg.with_strings_away_from(&x).unwrap()));
        prop_assert!((a - b).abs() < 1e-9 * a.max(1.0), "{} vs {}", a, b);
    }
}
