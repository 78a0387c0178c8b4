//! C ABI over `skm-core`.
//!
//! Every function returns an [`SkmStatus`]. On failure a message is available from
//! [`skm_last_error`] until the next call on the same thread. Output pointers are written only
//! on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nalgebra::DMatrix;
use num_complex::Complex64;

use skm_core::chart_atlas::{SpecialCoords, WeightPair};
use skm_core::cli::{report_value, run_suite, to_json, RunConfig, Suite};
use skm_core::gibbons_hawking::{gh_metric_eval, potential, GHConfig};
use skm_core::kummer_gluing::{fixed_points, LatticeTorus, TorusAutomorphism};
use skm_core::report::{all_pass, Grid2};
use skm_core::special_kahler::{metric2_eval, ricci_flat_check};
use skm_core::tensor::{DerivativeScheme, Form};
use skm_core::GeomError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    NumericalError = 4,
    CheckFailed = 5,
    Panic = 6,
}

/// Fixed-point actions accepted by [`skm_fixed_point_count`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkmAction {
    /// `−1` on `C²`.
    Involution = 0,
    /// `diag(e^{2πi/3}, e^{−2πi/3})`.
    Gamma = 1,
}

/// Opaque Gibbons–Hawking configuration.
pub struct SkmGhConfig(GHConfig);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &GeomError) -> SkmStatus {
    if err.is_config() {
        SkmStatus::ConfigError
    } else if matches!(err, GeomError::NoSingleConstant(_)) {
        SkmStatus::CheckFailed
    } else {
        SkmStatus::NumericalError
    }
}

fn fail(status: SkmStatus, msg: impl Into<String>) -> SkmStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> Result<(), (SkmStatus, String)>) -> SkmStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SkmStatus::Ok,
        Ok(Err((s, msg))) => fail(s, msg),
        Err(_) => fail(SkmStatus::Panic, "internal panic"),
    }
}

fn geom<T>(r: skm_core::Result<T>) -> Result<T, (SkmStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), (SkmStatus, String)> {
    if p.is_null() {
        Err((SkmStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char, name: &str) -> Result<&'a str, (SkmStatus, String)> {
    non_null(s, name)?;
    CStr::from_ptr(s).to_str().map_err(|_| (SkmStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

/// Last error message on this thread, or null. Owned by the library.
#[no_mangle]
pub extern "C" fn skm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Parse a GH configuration from JSON, e.g.
/// `{"sources":[{"x":[0,0,0],"m":1}],"period":12.566370614359172}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn skm_gh_config_from_json(json: *const c_char, out: *mut *mut SkmGhConfig) -> SkmStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        non_null(out, "out")?;
        let cfg: GHConfig =
            serde_json::from_str(text).map_err(|e| (SkmStatus::ConfigError, format!("GH config: {e}")))?;
        *out = Box::into_raw(Box::new(SkmGhConfig(cfg)));
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a handle from [`skm_gh_config_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn skm_gh_config_free(cfg: *mut SkmGhConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// `U(x)` for `x` of length 3.
///
/// # Safety
/// `cfg` must be a live handle, `x` point to 3 doubles and `out` to one.
#[no_mangle]
pub unsafe extern "C" fn skm_gh_potential(cfg: *const SkmGhConfig, x: *const f64, out: *mut f64) -> SkmStatus {
    guard(|| {
        non_null(cfg, "cfg")?;
        non_null(x, "x")?;
        non_null(out, "out")?;
        let x = [*x, *x.add(1), *x.add(2)];
        *out = geom(potential(&(*cfg).0, x))?;
        Ok(())
    })
}

/// The GH metric at `(τ, x)` in coordinates `(τ, x₁, x₂, x₃)`, 16 doubles row-major.
///
/// # Safety
/// `cfg` must be a live handle, `x` point to 3 doubles and `out` to 16.
#[no_mangle]
pub unsafe extern "C" fn skm_gh_metric(cfg: *const SkmGhConfig, x: *const f64, tau: f64, out: *mut f64) -> SkmStatus {
    guard(|| {
        non_null(cfg, "cfg")?;
        non_null(x, "x")?;
        non_null(out, "out")?;
        let x = [*x, *x.add(1), *x.add(2)];
        let g = geom(gh_metric_eval(&(*cfg).0, x, tau))?;
        write_row_major(&g, out);
        Ok(())
    })
}

unsafe fn write_row_major(m: &DMatrix<f64>, out: *mut f64) {
    let n = m.ncols();
    for i in 0..m.nrows() {
        for j in 0..n {
            *out.add(i * n + j) = m[(i, j)];
        }
    }
}

/// The special Kähler metric of `T*CP¹(k,l)` at `(ρ, θ, ψ, φ)`, 16 doubles row-major.
///
/// # Safety
/// `out` must point to 16 doubles.
#[no_mangle]
pub unsafe extern "C" fn skm_metric2_eval(
    k: u32,
    l: u32,
    rho: f64,
    theta: f64,
    psi: f64,
    phi: f64,
    out: *mut f64,
) -> SkmStatus {
    guard(|| {
        non_null(out, "out")?;
        let kp = geom(WeightPair::new(k, l))?;
        let g = geom(metric2_eval(&SpecialCoords::new(rho, theta, psi, phi), kp))?;
        write_row_major(&g, out);
        Ok(())
    })
}

/// Ricci-flatness of the special Kähler metric on an `n × n` grid of `[0.5, 2] × [0.5, 2.6]`.
/// Writes 1 to `pass` iff every check passes; returns `CheckFailed` otherwise.
///
/// # Safety
/// `pass` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn skm_ricci_check(k: u32, l: u32, n: u32, tol: f64, pass: *mut u8) -> SkmStatus {
    let mut ok = false;
    let status = guard(|| {
        non_null(pass, "pass")?;
        if n < 2 || !(tol > 0.0) {
            return Err((SkmStatus::ConfigError, "need n ≥ 2 and tol > 0".into()));
        }
        let kp = geom(WeightPair::new(k, l))?;
        let grid = Grid2 { x: [0.5, 2.0], y: [0.5, 2.6], n: n as usize };
        let checks = geom(ricci_flat_check(kp, &grid, tol, &DerivativeScheme::default()))?;
        ok = all_pass(&checks);
        *pass = ok as u8;
        Ok(())
    });
    if status == SkmStatus::Ok && !ok {
        return fail(SkmStatus::CheckFailed, "Ricci check failed");
    }
    status
}

/// Metric of a positive 3-form on `R⁷`. `phi` holds 35 coefficients on `dy_{abc}`, `a < b < c`,
/// in lexicographic order; `out` receives 49 doubles row-major.
///
/// # Safety
/// `phi` must point to 35 doubles and `out` to 49.
#[no_mangle]
pub unsafe extern "C" fn skm_metric_from_phi(phi: *const f64, out: *mut f64) -> SkmStatus {
    guard(|| {
        non_null(phi, "phi")?;
        non_null(out, "out")?;
        let mut form = Form::zero(7, 3);
        for (i, c) in form.coeffs.iter_mut().enumerate() {
            *c = *phi.add(i);
        }
        let g = geom(skm_core::g2_structures::metric_from_phi(&form))?;
        write_row_major(&g, out);
        Ok(())
    })
}

/// Number of fixed points of `action` on `C²/Λ`. `basis` holds four lattice vectors of `R⁴`
/// (16 doubles, one vector per row) or is null for the square lattice (involution) or the
/// hexagonal product lattice (γ).
///
/// # Safety
/// `basis` must be null or point to 16 doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn skm_fixed_point_count(action: SkmAction, basis: *const f64, out: *mut usize) -> SkmStatus {
    guard(|| {
        non_null(out, "out")?;
        let torus = if basis.is_null() {
            match action {
                SkmAction::Involution => LatticeTorus::square(),
                SkmAction::Gamma => {
                    let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
                    geom(LatticeTorus::z3_family([one, zero], [zero, one]))?
                }
            }
        } else {
            let mut b = [[0.0; 4]; 4];
            for (i, row) in b.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = *basis.add(4 * i + j);
                }
            }
            geom(LatticeTorus::new(b))?
        };
        let a = match action {
            SkmAction::Involution => TorusAutomorphism::involution(),
            SkmAction::Gamma => TorusAutomorphism::gamma(),
        };
        *out = geom(fixed_points(&a, &torus))?.len();
        Ok(())
    })
}

/// Run a verification suite by name (e.g. `"verify-ricci"`) with a JSON config (or null for
/// defaults). `report` receives the JSON report, to be released with [`skm_string_free`].
/// Returns `CheckFailed` when the report was produced but some check failed.
///
/// # Safety
/// `suite` must be a NUL-terminated string, `config_json` null or NUL-terminated, `report` valid.
#[no_mangle]
pub unsafe extern "C" fn skm_run_suite(
    suite: *const c_char,
    config_json: *const c_char,
    report: *mut *mut c_char,
) -> SkmStatus {
    let mut passed = true;
    let status = guard(|| {
        let name = read_str(suite, "suite")?;
        non_null(report, "report")?;
        let suite = Suite::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or((SkmStatus::ConfigError, format!("unknown suite {name:?}")))?;
        let cfg = if config_json.is_null() {
            RunConfig::default()
        } else {
            geom(RunConfig::from_json(read_str(config_json, "config_json")?))?
        };
        let start = std::time::Instant::now();
        let out = geom(run_suite(suite, &cfg))?;
        let value = report_value(suite, &cfg, &out, start.elapsed().as_secs_f64());
        passed = all_pass(&out.checks);
        let text = CString::new(to_json(&value)).map_err(|_| (SkmStatus::Panic, "NUL in report".into()))?;
        *report = text.into_raw();
        Ok(())
    });
    if status == SkmStatus::Ok && !passed {
        set_error("some checks failed");
        return SkmStatus::CheckFailed;
    }
    status
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn skm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
