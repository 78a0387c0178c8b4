//! Adaptive Dormand–Prince 5(4) integration for `y' = f(s, y)`.

use crate::error::{GeomError, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub min_step: f64,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { rtol: tol, atol: tol, max_steps: 200_000, min_step: 1e-14 }
    }
}

#[derive(Debug, Clone)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Integrate from `s0` to `s1`, returning the final state.
pub fn integrate<F>(mut f: F, s0: f64, s1: f64, y0: &[f64], opts: &OdeOptions) -> Result<(Vec<f64>, OdeStats)>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let n = y0.len();
    let span = s1 - s0;
    let dir = span.signum();
    let mut s = s0;
    let mut y = y0.to_vec();
    let mut h = 0.01 * span.abs();
    let mut stats = OdeStats { accepted: 0, rejected: 0 };
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    k[0] = f(s, &y)?;
    let mut tmp = vec![0.0; n];
    while dir * (s1 - s) > 0.0 {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(GeomError::StepFailure(format!("step budget exhausted at s = {s}")));
        }
        if h < opts.min_step * span.abs().max(1.0) {
            return Err(GeomError::StepFailure(format!("step size underflow at s = {s}")));
        }
        h = h.min((s1 - s).abs());
        let hs = dir * h;
        for st in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(st) {
                    acc += hs * A[st][j] * kj[i];
                }
                tmp[i] = acc;
            }
            k[st] = f(s + C[st] * hs, &tmp)?;
        }
        let mut err = 0.0f64;
        let mut ynew = vec![0.0; n];
        for i in 0..n {
            let mut y5 = y[i];
            let mut y4 = y[i];
            for st in 0..7 {
                y5 += hs * B5[st] * k[st][i];
                y4 += hs * B4[st] * k[st][i];
            }
            let sc = opts.atol + opts.rtol * y[i].abs().max(y5.abs());
            err = err.max(((y5 - y4) / sc).abs());
            ynew[i] = y5;
        }
        if !err.is_finite() {
            return Err(GeomError::StepFailure("non-finite error estimate".into()));
        }
        if err <= 1.0 {
            s += hs;
            y = ynew;
            // first-same-as-last
            k[0] = k[6].clone();
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
    }
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_full_period() {
        let f = |_s: f64, y: &[f64]| Ok(vec![y[1], -y[0]]);
        let (y, _) = integrate(f, 0.0, 2.0 * std::f64::consts::PI, &[1.0, 0.0], &OdeOptions::with_tol(1e-10)).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-8 && y[1].abs() < 1e-8, "{y:?}");
    }

    #[test]
    fn error_shrinks_with_tolerance() {
        let f = |s: f64, y: &[f64]| Ok(vec![s.cos() * y[0]]);
        let exact = 3f64.sin().exp();
        let e = |tol: f64| (integrate(f, 0.0, 3.0, &[1.0], &OdeOptions::with_tol(tol)).unwrap().0[0] - exact).abs();
        assert!(e(1e-10) < e(1e-5));
        assert!(e(1e-10) < 1e-8);
    }
}
