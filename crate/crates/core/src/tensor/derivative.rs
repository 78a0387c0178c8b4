//! First and second coordinate partials of a [`Field`].
//!
//! Central differences use one Richardson level: `D = (4 D(h/2) − D(h)) / 3`.
//! Second-order stencils use a step ten times the first-order one, which
//! keeps the `ε/h²` roundoff of the second difference below the truncation
//! error at the default step.

use serde::{Deserialize, Serialize};

use super::field::Field;
use crate::error::{GeomError, Result};
use crate::scalar::{seed, HyperDual};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    CentralFd,
    ForwardAd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeScheme {
    pub method: Method,
    /// Base step for first derivatives (multiplied by the field's length scale).
    pub step: f64,
}

impl Default for DerivativeScheme {
    fn default() -> Self {
        Self { method: Method::CentralFd, step: 1e-4 }
    }
}

impl DerivativeScheme {
    pub fn fd(step: f64) -> Self {
        Self { method: Method::CentralFd, step }
    }
    pub fn ad() -> Self {
        Self { method: Method::ForwardAd, step: 1e-4 }
    }
    pub fn second_step(&self) -> f64 {
        10.0 * self.step
    }
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(GeomError::Config(format!("derivative step must be > 0, got {}", self.step)));
        }
        Ok(())
    }
}

/// Value and partials up to second order: `d1[i][a] = ∂_i f_a`, `d2[i][j][a] = ∂_i ∂_j f_a`.
#[derive(Debug, Clone)]
pub struct Jet {
    pub value: Vec<f64>,
    pub d1: Vec<Vec<f64>>,
    pub d2: Vec<Vec<Vec<f64>>>,
}

const RICHARDSON_LIMIT: f64 = 1e-2;

fn check_richardson(coarse: &[f64], fine: &[f64], combined: &[f64]) -> Result<()> {
    let mut est = 0.0f64;
    let mut mag = 0.0f64;
    for ((c, f), r) in coarse.iter().zip(fine).zip(combined) {
        est = est.max((f - c).abs() / 3.0);
        mag = mag.max(r.abs());
    }
    if !est.is_finite() || est > RICHARDSON_LIMIT * (1.0 + mag) {
        return Err(GeomError::StepTooLarge(est));
    }
    Ok(())
}

fn shifted(x: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut y = x.to_vec();
    for &(i, d) in moves {
        y[i] += d;
    }
    y
}

fn require_ad<F: Field + ?Sized>(f: &F) -> Result<()> {
    if f.ad_capable() {
        Ok(())
    } else {
        Err(GeomError::Config("forward-mode differentiation requested for a sampled field".into()))
    }
}

fn eval_f64<F: Field + ?Sized>(f: &F, x: &[f64]) -> Result<Vec<f64>> {
    f.eval::<f64>(x)
}

fn axpy(out: &mut [f64], a: f64, v: &[f64]) {
    for (o, vi) in out.iter_mut().zip(v) {
        *o += a * vi;
    }
}

fn fd_first<F: Field + ?Sized>(f: &F, x: &[f64], i: usize, h: f64) -> Result<Vec<f64>> {
    let stencil = |h: f64| -> Result<Vec<f64>> {
        let p = eval_f64(f, &shifted(x, &[(i, h)]))?;
        let m = eval_f64(f, &shifted(x, &[(i, -h)]))?;
        Ok(p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * h)).collect())
    };
    let coarse = stencil(h)?;
    let fine = stencil(0.5 * h)?;
    let r: Vec<f64> = coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect();
    check_richardson(&coarse, &fine, &r)?;
    Ok(r)
}

fn fd_second<F: Field + ?Sized>(f: &F, x: &[f64], center: &[f64], i: usize, j: usize, h: f64) -> Result<Vec<f64>> {
    let stencil = |h: f64| -> Result<Vec<f64>> {
        if i == j {
            let p = eval_f64(f, &shifted(x, &[(i, h)]))?;
            let m = eval_f64(f, &shifted(x, &[(i, -h)]))?;
            Ok((0..p.len()).map(|a| (p[a] - 2.0 * center[a] + m[a]) / (h * h)).collect())
        } else {
            let pp = eval_f64(f, &shifted(x, &[(i, h), (j, h)]))?;
            let pm = eval_f64(f, &shifted(x, &[(i, h), (j, -h)]))?;
            let mp = eval_f64(f, &shifted(x, &[(i, -h), (j, h)]))?;
            let mm = eval_f64(f, &shifted(x, &[(i, -h), (j, -h)]))?;
            Ok((0..pp.len()).map(|a| (pp[a] - pm[a] - mp[a] + mm[a]) / (4.0 * h * h)).collect())
        }
    };
    let coarse = stencil(h)?;
    let fine = stencil(0.5 * h)?;
    let r: Vec<f64> = coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect();
    check_richardson(&coarse, &fine, &r)?;
    Ok(r)
}

/// `∂_i f_a` for all `i`, `a`.
pub fn jacobian<F: Field + ?Sized>(f: &F, x: &[f64], scheme: &DerivativeScheme) -> Result<Vec<Vec<f64>>> {
    let n = f.input_dim();
    match scheme.method {
        Method::CentralFd => {
            let h = scheme.step * f.length_scale(x);
            (0..n).map(|i| fd_first(f, x, i, h)).collect()
        }
        Method::ForwardAd => {
            require_ad(f)?;
            (0..n)
                .map(|i| {
                    let v: Vec<HyperDual> = f.eval(&seed(x, i, usize::MAX))?;
                    Ok(v.iter().map(|d| d.b).collect())
                })
                .collect()
        }
    }
}

/// Value, first and second partials in one pass.
pub fn jet<F: Field + ?Sized>(f: &F, x: &[f64], scheme: &DerivativeScheme) -> Result<Jet> {
    let n = f.input_dim();
    let m = f.output_len();
    let mut d2 = vec![vec![vec![0.0; m]; n]; n];
    match scheme.method {
        Method::CentralFd => {
            let value = eval_f64(f, x)?;
            let d1 = jacobian(f, x, scheme)?;
            let h = scheme.second_step() * f.length_scale(x);
            for i in 0..n {
                for j in i..n {
                    let v = fd_second(f, x, &value, i, j, h)?;
                    d2[i][j] = v.clone();
                    d2[j][i] = v;
                }
            }
            Ok(Jet { value, d1, d2 })
        }
        Method::ForwardAd => {
            require_ad(f)?;
            let mut d1 = vec![vec![0.0; m]; n];
            let mut value = vec![0.0; m];
            for i in 0..n {
                for j in i..n {
                    let v: Vec<HyperDual> = f.eval(&seed(x, i, j))?;
                    if i == j {
                        for a in 0..m {
                            d1[i][a] = v[a].b;
                        }
                        if i == 0 {
                            for a in 0..m {
                                value[a] = v[a].a;
                            }
                        }
                    }
                    for a in 0..m {
                        d2[i][j][a] = v[a].d;
                        d2[j][i][a] = v[a].d;
                    }
                }
            }
            Ok(Jet { value, d1, d2 })
        }
    }
}

/// All order-`k` partials (`k ≤ 2`) of every output component, flattened.
pub fn partials_of_order<F: Field + ?Sized>(
    f: &F,
    x: &[f64],
    order: usize,
    scheme: &DerivativeScheme,
) -> Result<Vec<f64>> {
    match order {
        0 => eval_f64(f, x),
        1 => Ok(jacobian(f, x, scheme)?.into_iter().flatten().collect()),
        2 => {
            let j = jet(f, x, scheme)?;
            let n = f.input_dim();
            let mut out = Vec::new();
            for i in 0..n {
                for k in i..n {
                    out.extend_from_slice(&j.d2[i][k]);
                }
            }
            Ok(out)
        }
        _ => Err(GeomError::Config(format!("derivative order {order} not supported (max 2)"))),
    }
}

/// Directional derivative of a vector field along `v`.
pub fn directional<F: Field + ?Sized>(f: &F, x: &[f64], v: &[f64], scheme: &DerivativeScheme) -> Result<Vec<f64>> {
    let jac = jacobian(f, x, scheme)?;
    let mut out = vec![0.0; f.output_len()];
    for (i, vi) in v.iter().enumerate() {
        axpy(&mut out, *vi, &jac[i]);
    }
    Ok(out)
}
