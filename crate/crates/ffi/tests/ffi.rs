use std::ffi::{CStr, CString};
use std::ptr;

use skm_ffi::*;

fn last_error() -> String {
    let p = skm_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn gh_handle_round_trip() {
    let json = CString::new(r#"{"sources":[{"x":[2.0,0.0,0.0],"m":1}],"period":1.0}"#).unwrap();
    let mut cfg = ptr::null_mut();
    unsafe {
        assert_eq!(skm_gh_config_from_json(json.as_ptr(), &mut cfg), SkmStatus::Ok);
        let mut u = 0.0;
        assert_eq!(skm_gh_potential(cfg, [0.0, 0.0, 0.0].as_ptr(), &mut u), SkmStatus::Ok);
        assert!((u - 0.5).abs() < 1e-15);
        let mut g = [0.0; 16];
        assert_eq!(skm_gh_metric(cfg, [0.0, 1.0, 0.0].as_ptr(), 0.0, g.as_mut_ptr()), SkmStatus::Ok);
        let u = 1.0 / 5f64.sqrt();
        assert!((g[0] - 1.0 / u).abs() < 1e-14);
        assert_eq!(g[1], g[4]);
        // on the source
        assert_eq!(skm_gh_potential(cfg, [2.0, 0.0, 0.0].as_ptr(), &mut 0.0), SkmStatus::NumericalError);
        assert!(!last_error().is_empty());
        skm_gh_config_free(cfg);
    }
}

#[test]
fn bad_inputs_report_status() {
    let mut cfg = ptr::null_mut();
    let bad = CString::new("{").unwrap();
    unsafe {
        assert_eq!(skm_gh_config_from_json(bad.as_ptr(), &mut cfg), SkmStatus::ConfigError);
        assert!(cfg.is_null());
        assert_eq!(skm_gh_config_from_json(ptr::null(), &mut cfg), SkmStatus::NullPointer);
        assert_eq!(skm_metric2_eval(0, 1, 1.0, 1.0, 0.0, 0.0, [0.0; 16].as_mut_ptr()), SkmStatus::ConfigError);
        skm_gh_config_free(ptr::null_mut());
        skm_string_free(ptr::null_mut());
    }
}

#[test]
fn metric2_is_symmetric() {
    let mut g = [0.0; 16];
    unsafe {
        assert_eq!(skm_metric2_eval(1, 2, 1.0, 1.2, 0.3, 0.4, g.as_mut_ptr()), SkmStatus::Ok);
    }
    for i in 0..4 {
        assert!(g[5 * i] > 0.0);
        for j in 0..4 {
            assert!((g[4 * i + j] - g[4 * j + i]).abs() < 1e-13);
        }
    }
}

#[test]
fn ricci_and_fixed_points() {
    let mut pass = 0u8;
    unsafe {
        assert_eq!(skm_ricci_check(1, 1, 4, 1e-6, &mut pass), SkmStatus::Ok);
        assert_eq!(pass, 1);
        let mut n = 0usize;
        assert_eq!(skm_fixed_point_count(SkmAction::Involution, ptr::null(), &mut n), SkmStatus::Ok);
        assert_eq!(n, 16);
        assert_eq!(skm_fixed_point_count(SkmAction::Gamma, ptr::null(), &mut n), SkmStatus::Ok);
        assert_eq!(n, 9);
        let square = [1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        assert_eq!(skm_fixed_point_count(SkmAction::Gamma, square.as_ptr(), &mut n), SkmStatus::NumericalError);
    }
}

#[test]
fn metric_of_phi0_is_identity() {
    // φ₀ on dy_{abc}, a < b < c, lexicographic over 0..7
    let terms = [
        ([0, 1, 6], 1.0),
        ([0, 2, 5], 1.0),
        ([0, 3, 4], 1.0),
        ([1, 2, 4], 1.0),
        ([1, 3, 5], -1.0),
        ([2, 3, 6], 1.0),
        ([4, 5, 6], 1.0),
    ];
    let mut idx = Vec::new();
    for a in 0..7 {
        for b in a + 1..7 {
            for c in b + 1..7 {
                idx.push([a, b, c]);
            }
        }
    }
    let mut phi = [0.0; 35];
    for (t, c) in terms {
        phi[idx.iter().position(|i| *i == t).unwrap()] = c;
    }
    let mut g = [0.0; 49];
    unsafe {
        assert_eq!(skm_metric_from_phi(phi.as_ptr(), g.as_mut_ptr()), SkmStatus::Ok);
    }
    for i in 0..7 {
        for j in 0..7 {
            assert!((g[7 * i + j] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
    }
    unsafe {
        assert_eq!(skm_metric_from_phi([0.0; 35].as_ptr(), g.as_mut_ptr()), SkmStatus::NumericalError);
    }
}

#[test]
fn run_suite_produces_report() {
    let mut report = ptr::null_mut();
    let suite = CString::new("moduli-dims").unwrap();
    unsafe {
        assert_eq!(skm_run_suite(suite.as_ptr(), ptr::null(), &mut report), SkmStatus::Ok);
        let text = CStr::from_ptr(report).to_str().unwrap().to_owned();
        skm_string_free(report);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["suite"], "moduli-dims");
        assert_eq!(v["pass"], true);

        let cfg = CString::new(r#"{"max": 5}"#).unwrap();
        let suite = CString::new("admissible-p").unwrap();
        let mut report = ptr::null_mut();
        assert_eq!(skm_run_suite(suite.as_ptr(), cfg.as_ptr(), &mut report), SkmStatus::Ok);
        skm_string_free(report);

        let unknown = CString::new("nope").unwrap();
        assert_eq!(skm_run_suite(unknown.as_ptr(), ptr::null(), &mut report), SkmStatus::ConfigError);
        assert!(last_error().contains("nope"));
        let bad = CString::new(r#"{"t": [0.1]}"#).unwrap();
        let scan = CString::new("gluing-scan").unwrap();
        assert_eq!(skm_run_suite(scan.as_ptr(), bad.as_ptr(), &mut report), SkmStatus::ConfigError);
    }
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/skm.h")).unwrap();
    for f in [
        "skm_last_error",
        "skm_gh_config_from_json",
        "skm_gh_config_free",
        "skm_gh_potential",
        "skm_gh_metric",
        "skm_metric2_eval",
        "skm_ricci_check",
        "skm_metric_from_phi",
        "skm_fixed_point_count",
        "skm_run_suite",
        "skm_string_free",
    ] {
        assert!(h.contains(&format!("{f}(")), "{f}");
    }
    assert!(h.contains("typedef struct SkmGhConfig SkmGhConfig;"));
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/skm.h");
    let Ok(status) =
        std::process::Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header]).status()
    else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(status.success());
}
