//! Named numeric checks shared by every verification suite.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    /// Passes iff `value ≤ tol`.
    pub fn le(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self { name: name.into(), value, tol, pass: value <= tol }
    }
    /// Passes iff `value > tol` (negative controls).
    pub fn gt(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self { name: name.into(), value, tol, pass: value > tol }
    }
    /// Passes iff `|value − target| ≤ tol`; the target is recorded in the name.
    pub fn near(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        let name = format!("{} (target {})", name.into(), target);
        Self { name, value, tol, pass: (value - target).abs() <= tol }
    }
    /// Exact integer agreement.
    pub fn count(name: impl Into<String>, value: usize, expected: usize) -> Self {
        Self::near(name, value as f64, expected as f64, 0.0)
    }
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self { name: name.into(), value: if ok { 1.0 } else { 0.0 }, tol: 0.0, pass: ok }
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}

/// Largest value of `f` over `points`, evaluated in parallel and reduced in input order.
pub fn sweep_max<P: Sync, F>(points: &[P], f: F) -> Result<f64>
where
    F: Fn(&P) -> Result<f64> + Sync + Send,
{
    let vals: Vec<f64> = points.par_iter().map(&f).collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// Regular `n × n` grid on a rectangle, first coordinate varying slowest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2 {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub n: usize,
}

impl Grid2 {
    pub fn points(&self) -> Vec<[f64; 2]> {
        let at = |r: [f64; 2], i: usize| {
            if self.n == 1 {
                0.5 * (r[0] + r[1])
            } else {
                r[0] + (r[1] - r[0]) * i as f64 / (self.n - 1) as f64
            }
        };
        (0..self.n).flat_map(|i| (0..self.n).map(move |j| [at(self.x, i), at(self.y, j)])).collect()
    }
}
