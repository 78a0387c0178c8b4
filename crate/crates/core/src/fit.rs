//! Least-squares slopes of log-log convergence data.

use serde::Serialize;

use crate::error::{GeomError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the log-space residuals.
    pub residual: f64,
}

/// Fit `log y = slope · log t + intercept`.
pub fn loglog_slope(t: &[f64], y: &[f64]) -> Result<SlopeFit> {
    if t.len() != y.len() {
        return Err(GeomError::Config("t and norm lists differ in length".into()));
    }
    if t.len() < 2 {
        return Err(GeomError::Config(format!("need at least two samples to fit a slope, got {}", t.len())));
    }
    if t.iter().chain(y).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(GeomError::FitFailure("log-log fit requires positive finite data".into()));
    }
    let lx: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(GeomError::Config("t values must be distinct".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    Ok(SlopeFit { slope, intercept, residual: (ss / n).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_power_law() {
        let t = [0.1, 0.05, 0.025];
        let y: Vec<f64> = t.iter().map(|v: &f64| 3.0 * v.powi(4)).collect();
        let f = loglog_slope(&t, &y).unwrap();
        assert!((f.slope - 4.0).abs() < 1e-12 && f.residual < 1e-12);
    }

    #[test]
    fn single_point_is_a_config_error() {
        assert!(loglog_slope(&[0.1], &[1.0]).unwrap_err().is_config());
    }

    proptest! {
        #[test]
        fn recovers_any_power(p in -6.0f64..6.0, c in 0.01f64..100.0) {
            let t = [0.2, 0.1, 0.05, 0.025];
            let y: Vec<f64> = t.iter().map(|v: &f64| c * v.powf(p)).collect();
            let f = loglog_slope(&t, &y).unwrap();
            prop_assert!((f.slope - p).abs() < 1e-9);
        }
    }
}
