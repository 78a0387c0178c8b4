//! Scalar abstraction shared by every closed-form evaluator.
//!
//! Metric and form evaluators are written once against [`Scalar`] and run
//! either on plain `f64` (finite differencing) or on [`HyperDual`] numbers,
//! which carry exact first and mixed second derivatives along two seeded
//! directions (forward-mode differentiation).

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    /// Real part (the primal value).
    fn re(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powf(self, p: f64) -> Self;
    fn atan2(self, x: Self) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }
    fn one() -> Self {
        Self::cst(1.0)
    }
    fn powi(self, n: i32) -> Self {
        let mut acc = Self::one();
        let base = if n < 0 { Self::one() / self } else { self };
        for _ in 0..n.unsigned_abs() {
            acc *= base;
        }
        acc
    }
    fn recip(self) -> Self {
        Self::one() / self
    }
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn re(self) -> f64 {
        self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

/// `a + b ε₁ + c ε₂ + d ε₁ε₂` with `ε₁² = ε₂² = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HyperDual {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl HyperDual {
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    /// Lift through a scalar function given `f(a)`, `f'(a)`, `f''(a)`.
    #[inline]
    fn chain(self, f: f64, f1: f64, f2: f64) -> Self {
        Self { a: f, b: f1 * self.b, c: f1 * self.c, d: f1 * self.d + f2 * self.b * self.c }
    }
}

impl Add for HyperDual {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}
impl Sub for HyperDual {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}
impl Mul for HyperDual {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.a * o.a,
            self.a * o.b + self.b * o.a,
            self.a * o.c + self.c * o.a,
            self.a * o.d + self.b * o.c + self.c * o.b + self.d * o.a,
        )
    }
}
impl Div for HyperDual {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}
impl Neg for HyperDual {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a, -self.b, -self.c, -self.d)
    }
}
impl AddAssign for HyperDual {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}
impl SubAssign for HyperDual {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}
impl MulAssign for HyperDual {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}
impl Add<f64> for HyperDual {
    type Output = Self;
    fn add(self, o: f64) -> Self {
        Self::new(self.a + o, self.b, self.c, self.d)
    }
}
impl Sub<f64> for HyperDual {
    type Output = Self;
    fn sub(self, o: f64) -> Self {
        Self::new(self.a - o, self.b, self.c, self.d)
    }
}
impl Mul<f64> for HyperDual {
    type Output = Self;
    fn mul(self, o: f64) -> Self {
        Self::new(self.a * o, self.b * o, self.c * o, self.d * o)
    }
}
impl Div<f64> for HyperDual {
    type Output = Self;
    fn div(self, o: f64) -> Self {
        Self::new(self.a / o, self.b / o, self.c / o, self.d / o)
    }
}

impl Scalar for HyperDual {
    fn cst(v: f64) -> Self {
        Self::new(v, 0.0, 0.0, 0.0)
    }
    fn re(self) -> f64 {
        self.a
    }
    fn sin(self) -> Self {
        let (s, c) = self.a.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.a.sin_cos();
        self.chain(c, -s, -c)
    }
    fn sinh(self) -> Self {
        let (s, c) = (self.a.sinh(), self.a.cosh());
        self.chain(s, c, s)
    }
    fn cosh(self) -> Self {
        let (s, c) = (self.a.sinh(), self.a.cosh());
        self.chain(c, s, c)
    }
    fn exp(self) -> Self {
        let e = self.a.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let inv = 1.0 / self.a;
        self.chain(self.a.ln(), inv, -inv * inv)
    }
    fn sqrt(self) -> Self {
        let s = self.a.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.a))
    }
    fn powf(self, p: f64) -> Self {
        let f = self.a.powf(p);
        let f1 = p * self.a.powf(p - 1.0);
        let f2 = p * (p - 1.0) * self.a.powf(p - 2.0);
        self.chain(f, f1, f2)
    }
    fn atan2(self, x: Self) -> Self {
        let (ya, xa) = (self.a, x.a);
        let r2 = xa * xa + ya * ya;
        let fy = xa / r2;
        let fx = -ya / r2;
        let r4 = r2 * r2;
        let fyy = -2.0 * xa * ya / r4;
        let fxx = 2.0 * xa * ya / r4;
        let fxy = (ya * ya - xa * xa) / r4;
        Self::new(
            ya.atan2(xa),
            fy * self.b + fx * x.b,
            fy * self.c + fx * x.c,
            fy * self.d + fx * x.d + fyy * self.b * self.c + fxy * (self.b * x.c + self.c * x.b) + fxx * x.b * x.c,
        )
    }
    fn recip(self) -> Self {
        let inv = 1.0 / self.a;
        self.chain(inv, -inv * inv, 2.0 * inv * inv * inv)
    }
}

/// Seed a point for forward-mode evaluation along coordinate directions `i` and `j`.
pub fn seed(x: &[f64], i: usize, j: usize) -> Vec<HyperDual> {
    x.iter()
        .enumerate()
        .map(|(n, &v)| HyperDual::new(v, if n == i { 1.0 } else { 0.0 }, if n == j { 1.0 } else { 0.0 }, 0.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd2<F: Fn(f64) -> f64>(f: F, x: f64) -> (f64, f64) {
        let h = 1e-4;
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        (d1, d2)
    }

    #[test]
    fn unary_functions_match_finite_differences() {
        let x = 0.7;
        let cases: Vec<(fn(HyperDual) -> HyperDual, fn(f64) -> f64)> = vec![
            (|v| v.sin(), f64::sin),
            (|v| v.cos(), f64::cos),
            (|v| v.sinh(), f64::sinh),
            (|v| v.cosh(), f64::cosh),
            (|v| v.exp(), f64::exp),
            (|v| v.ln(), f64::ln),
            (|v| Scalar::sqrt(v), f64::sqrt),
            (|v| v.powf(2.5), |v| v.powf(2.5)),
            (|v| v.recip(), |v| 1.0 / v),
            (|v| v.atan2(HyperDual::cst(0.3)), |v| v.atan2(0.3)),
            (|v| HyperDual::cst(0.3).atan2(v), |v| 0.3f64.atan2(v)),
        ];
        for (hd, f) in cases {
            let r = hd(HyperDual::new(x, 1.0, 1.0, 0.0));
            let (d1, d2) = fd2(f, x);
            assert!((r.a - f(x)).abs() < 1e-14);
            assert!((r.b - d1).abs() < 1e-7, "{} vs {}", r.b, d1);
            assert!((r.d - d2).abs() < 1e-5, "{} vs {}", r.d, d2);
        }
    }

    #[test]
    fn mixed_partials_of_atan2() {
        // f(y, x) = atan2(y, x); ∂²f/∂y∂x = (y² − x²)/(x²+y²)²
        let (y, x) = (0.4, -0.9);
        let yv = HyperDual::new(y, 1.0, 0.0, 0.0);
        let xv = HyperDual::new(x, 0.0, 1.0, 0.0);
        let r = yv.atan2(xv);
        let r2 = x * x + y * y;
        assert!((r.b - x / r2).abs() < 1e-14);
        assert!((r.c + y / r2).abs() < 1e-14);
        assert!((r.d - (y * y - x * x) / (r2 * r2)).abs() < 1e-13);
    }
}
