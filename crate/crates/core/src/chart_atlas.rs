//! The orbifold `M_{k,l} = T*CP¹(k,l)`: weights, the two uniformizing charts,
//! chart transitions, singular points and the blow-down to `C²/Z_{k+l}`.
//!
//! Fractional powers of the real radial factors use the principal real
//! branch; all phase information is carried by `ψ` and `φ`.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::scalar::Scalar;
use crate::tensor::Field;

/// Below this modulus a chart coordinate counts as lying on a singular axis.
pub const OVERLAP_TOL: f64 = 1e-9;

/// `x` with `a x ≡ 1 (mod n)`; 1 when `n = 1`.
fn inverse_mod(a: u32, n: u32) -> u32 {
    (1..=n).find(|x| (a * x) % n == 1 % n).unwrap_or(1)
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "(u32, u32)", into = "(u32, u32)")]
pub struct WeightPair {
    k: u32,
    l: u32,
}

impl TryFrom<(u32, u32)> for WeightPair {
    type Error = GeomError;
    fn try_from((k, l): (u32, u32)) -> Result<Self> {
        Self::new(k, l)
    }
}

impl From<WeightPair> for (u32, u32) {
    fn from(w: WeightPair) -> Self {
        (w.k, w.l)
    }
}

impl WeightPair {
    pub fn new(k: u32, l: u32) -> Result<Self> {
        if k == 0 || l == 0 {
            return Err(GeomError::InvalidWeights { k, l, reason: "weights must be positive" });
        }
        if gcd(k, l) != 1 {
            return Err(GeomError::InvalidWeights { k, l, reason: "weights must be coprime" });
        }
        Ok(Self { k, l })
    }
    pub fn k(&self) -> u32 {
        self.k
    }
    pub fn l(&self) -> u32 {
        self.l
    }
    pub fn kf(&self) -> f64 {
        self.k as f64
    }
    pub fn lf(&self) -> f64 {
        self.l as f64
    }
    /// Order of the cone `C²/Z_{k+l}` at infinity.
    pub fn sum(&self) -> u32 {
        self.k + self.l
    }
    /// `a = (l − k)/(l + k)`.
    pub fn a(&self) -> f64 {
        (self.lf() - self.kf()) / (self.lf() + self.kf())
    }

    /// Generators of the `(Δψ, Δφ)` identifications that make the metric smooth away
    /// from the two cone points: the circles `2π(−1, 1)` (collapsing on `θ = 0`),
    /// `2π(1, 1)` (on `θ = π`) and `2π(1, −a)` (on `ρ = 0`) must each close with period `2π`.
    pub fn period_lattice(&self) -> [[f64; 2]; 3] {
        let two_pi = 2.0 * PI;
        [[-two_pi, two_pi], [two_pi, two_pi], [two_pi, -two_pi * self.a()]]
    }

    /// Loop in `(Δψ, Δφ)` generating the local group at the `θ = 0` cone point (order `k`),
    /// chosen so that its holonomy rotates by `2π/k`.
    pub fn z_cone_loop(&self) -> [f64; 2] {
        let m = inverse_mod(self.l, self.k) as f64;
        [2.0 * PI * m, 2.0 * PI * m]
    }

    /// Loop generating the local group at the `θ = π` cone point (order `l`).
    pub fn w_cone_loop(&self) -> [f64; 2] {
        let m = inverse_mod(self.k, self.l) as f64;
        [-2.0 * PI * m, 2.0 * PI * m]
    }

    /// Generators of the `(Δψ, Δφ)` shifts under which both chart maps are single-valued.
    pub fn chart_period_lattice(&self) -> [[f64; 2]; 2] {
        let (k, l, s) = (self.kf(), self.lf(), self.kf() + self.lf());
        [[PI * s / (k * l), PI * (k - l) / (k * l)], [PI * s / l, PI * s / l]]
    }

    /// `Δφ` shift that acts on the `(z, α)` chart as the generator `(ωz, ω⁻¹α)`, `ω = e^{2πi/k}`.
    pub fn z_deck_shift(&self) -> f64 {
        -2.0 * PI / (self.kf() * self.lf())
    }

    /// `Δφ` shift acting on the `(w, β)` chart as `(ωw, ω⁻¹β)`, `ω = e^{2πi/l}`.
    pub fn w_deck_shift(&self) -> f64 {
        2.0 * PI / (self.kf() * self.lf())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChartId {
    /// Coordinates `(z, α)`, covering the `Z_k` point `z = 0`.
    ZChart,
    /// Coordinates `(w, β)`, covering the `Z_l` point `w = 0`.
    WChart,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub chart: ChartId,
    /// `(z, α)` or `(w, β)`.
    pub coords: [Complex64; 2],
}

impl ChartPoint {
    pub fn new(chart: ChartId, base: Complex64, fiber: Complex64) -> Self {
        Self { chart, coords: [base, fiber] }
    }
    pub fn base(&self) -> Complex64 {
        self.coords[0]
    }
    pub fn fiber(&self) -> Complex64 {
        self.coords[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecialCoords {
    pub rho: f64,
    pub theta: f64,
    pub psi: f64,
    pub phi: f64,
}

impl SpecialCoords {
    pub fn new(rho: f64, theta: f64, psi: f64, phi: f64) -> Self {
        Self { rho, theta, psi, phi }
    }
    /// Coordinate order used by every tensor in special coordinates: `(ρ, θ, ψ, φ)`.
    pub fn to_array(&self) -> [f64; 4] {
        [self.rho, self.theta, self.psi, self.phi]
    }
    pub fn from_slice(x: &[f64]) -> Self {
        Self::new(x[0], x[1], x[2], x[3])
    }
}

/// Both transition relations: `(z^k w^l − 1, αz − βw)`.
pub fn transition_residuals(zp: &ChartPoint, wp: &ChartPoint, kp: WeightPair) -> (f64, f64) {
    let (z, alpha) = (zp.base(), zp.fiber());
    let (w, beta) = (wp.base(), wp.fiber());
    let r1 = (z.powu(kp.k) * w.powu(kp.l) - 1.0).norm();
    let lhs = alpha * z;
    let rhs = beta * w;
    let r2 = (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1.0);
    (r1, r2)
}

/// Re-express a point of the chart overlap in the other chart (principal branch).
pub fn transition(p: &ChartPoint, kp: WeightPair, target: ChartId) -> Result<ChartPoint> {
    if p.chart == target {
        return Ok(*p);
    }
    let base = p.base();
    if base.norm() <= OVERLAP_TOL {
        return Err(GeomError::DegeneratePoint(format!(
            "|{}| = {:.3e} is on a singular axis",
            if p.chart == ChartId::ZChart { "z" } else { "w" },
            base.norm()
        )));
    }
    let ratio = match p.chart {
        ChartId::ZChart => kp.kf() / kp.lf(),
        ChartId::WChart => kp.lf() / kp.kf(),
    };
    let other = (-ratio * base.ln()).exp();
    if other.norm() <= OVERLAP_TOL {
        return Err(GeomError::DegeneratePoint(format!("image coordinate {:.3e} is on a singular axis", other.norm())));
    }
    let fiber = p.fiber() * base / other;
    Ok(ChartPoint::new(target, other, fiber))
}

/// Order of the uniformizing group acting on the given chart.
pub fn chart_group_order(chart: ChartId, kp: WeightPair) -> u32 {
    match chart {
        ChartId::ZChart => kp.k,
        ChartId::WChart => kp.l,
    }
}

/// Equality of chart points modulo the chart's uniformizing group `(x, y) ↦ (ωx, ω⁻¹y)`.
pub fn equivalent(p: &ChartPoint, q: &ChartPoint, kp: WeightPair, tol: f64) -> bool {
    if p.chart != q.chart {
        return match transition(q, kp, p.chart) {
            Ok(q2) => equivalent(p, &q2, kp, tol),
            Err(_) => false,
        };
    }
    let n = chart_group_order(p.chart, kp);
    let scale = p.base().norm().max(p.fiber().norm()).max(1.0);
    (0..n).any(|j| {
        let w = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
        (w * p.base() - q.base()).norm() <= tol * scale && (p.fiber() / w - q.fiber()).norm() <= tol * scale
    })
}

/// The chart maps from special coordinates.
pub fn special_to_chart(sc: &SpecialCoords, kp: WeightPair, target: ChartId) -> Result<ChartPoint> {
    let c = ChartMap { kp, chart: target };
    if !(sc.theta >= 0.0 && sc.theta <= PI) {
        return Err(GeomError::DomainError(format!("θ = {} outside [0, π]", sc.theta)));
    }
    match target {
        ChartId::ZChart if sc.theta >= PI => {
            return Err(GeomError::DomainError("θ = π is not covered by the (z, α) chart".into()))
        }
        ChartId::WChart if sc.theta <= 0.0 => {
            return Err(GeomError::DomainError("θ = 0 is not covered by the (w, β) chart".into()))
        }
        _ => {}
    }
    let v = c.eval::<f64>(&sc.to_array())?;
    Ok(ChartPoint::new(target, Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])))
}

/// Real form of a chart map, `(ρ, θ, ψ, φ) ↦ (Re x, Im x, Re y, Im y)`.
#[derive(Debug, Clone, Copy)]
pub struct ChartMap {
    pub kp: WeightPair,
    pub chart: ChartId,
}

impl Field for ChartMap {
    fn input_dim(&self) -> usize {
        4
    }
    fn output_len(&self) -> usize {
        4
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        let (k, l, a) = (self.kp.kf(), self.kp.lf(), self.kp.a());
        let (rho, th, psi, phi) = (x[0], x[1], x[2], x[3]);
        let c = (th * 0.5).cos();
        let s = (th * 0.5).sin();
        let sh = (rho * 0.5).sinh() * (k * l);
        let (r_base, p_base, r_fib, p_fib) = match self.chart {
            ChartId::ZChart => (s * c.powf(-l / k), -(psi * a + phi) * l, sh * c.powf(1.0 + l / k), (psi + phi) * l),
            ChartId::WChart => (c * s.powf(-k / l), (psi * a + phi) * k, sh * s.powf(1.0 + k / l), (psi - phi) * k),
        };
        Ok(vec![r_base * p_base.cos(), r_base * p_base.sin(), r_fib * p_fib.cos(), r_fib * p_fib.sin()])
    }
}

/// Principal-branch `x^p` for complex `x` and real `p`.
fn cpow(x: Complex64, p: f64) -> Complex64 {
    if x == Complex64::new(0.0, 0.0) {
        return x;
    }
    (x.ln() * p).exp()
}

/// Canonical representative of a `C²/Z_s` orbit, `Z_s` acting by `diag(η, η⁻¹)`:
/// the first nonzero coordinate has argument in `[0, 2π/s)`.
pub fn canonical_orbit(u: [Complex64; 2], s: u32) -> [Complex64; 2] {
    let sector = 2.0 * PI / s as f64;
    let lead = if u[0].norm() > 0.0 { 0 } else { 1 };
    let arg = u[lead].arg().rem_euclid(2.0 * PI);
    let j = (arg / sector).floor();
    let eta = Complex64::from_polar(1.0, -j * sector);
    // multiply the lead coordinate by η^{-j}; the other one by η^{j}
    if lead == 0 {
        [u[0] * eta, u[1] / eta]
    } else {
        [u[0] / eta, u[1] * eta]
    }
}

/// Distance between two `C²/Z_s` orbits (minimum over the group).
pub fn orbit_distance(u: [Complex64; 2], v: [Complex64; 2], s: u32) -> f64 {
    (0..s)
        .map(|j| {
            let eta = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / s as f64);
            ((u[0] * eta - v[0]).norm_sqr() + (u[1] / eta - v[1]).norm_sqr()).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

/// The blow-down `M_{k,l} ∖ S² → (C² ∖ 0)/Z_{k+l}`, returning the canonical representative.
pub fn blow_down(p: &ChartPoint, kp: WeightPair) -> Result<[Complex64; 2]> {
    let s = kp.sum() as f64;
    let (k, l) = (kp.kf(), kp.lf());
    let u = match p.chart {
        ChartId::ZChart => {
            let (z, alpha) = (p.base(), p.fiber());
            if alpha.norm() == 0.0 {
                return Err(GeomError::OnExceptionalSet);
            }
            [cpow(alpha, k / s), z * cpow(alpha, l / s)]
        }
        ChartId::WChart => {
            let (w, beta) = (p.base(), p.fiber());
            if beta.norm() == 0.0 {
                return Err(GeomError::OnExceptionalSet);
            }
            [w * cpow(beta, k / s), cpow(beta, l / s)]
        }
    };
    Ok(canonical_orbit(u, kp.sum()))
}

/// Inverse of [`blow_down`]; lands in the `(z, α)` chart unless `u₁ = 0`.
pub fn blow_up(u: [Complex64; 2], kp: WeightPair) -> Result<ChartPoint> {
    let s = kp.sum() as f64;
    let (k, l) = (kp.kf(), kp.lf());
    if u[0].norm() > 0.0 {
        let alpha = cpow(u[0], s / k);
        let z = u[1] * cpow(u[0], -l / k);
        Ok(ChartPoint::new(ChartId::ZChart, z, alpha))
    } else if u[1].norm() > 0.0 {
        let beta = cpow(u[1], s / l);
        let w = u[0] * cpow(u[1], -k / l);
        Ok(ChartPoint::new(ChartId::WChart, w, beta))
    } else {
        Err(GeomError::OnExceptionalSet)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformizingGroup {
    pub order: u32,
    pub generator: Matrix2<Complex64>,
}

impl UniformizingGroup {
    pub fn cyclic(order: u32) -> Self {
        let w = Complex64::from_polar(1.0, 2.0 * PI / order as f64);
        Self { order, generator: Matrix2::new(w, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), w.conj()) }
    }
    pub fn determinant(&self) -> Complex64 {
        self.generator.determinant()
    }
    /// Distance of `generator^order` from the identity.
    pub fn power_defect(&self) -> f64 {
        let mut m = Matrix2::<Complex64>::identity();
        for _ in 0..self.order {
            m *= self.generator;
        }
        (m - Matrix2::identity()).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Uniformizing group at a singular point, given as a chart point on a singular axis.
pub fn uniformizing_group_at(p: &ChartPoint, kp: WeightPair) -> Result<UniformizingGroup> {
    if p.base().norm() > OVERLAP_TOL {
        return Err(GeomError::NotSingular);
    }
    let order = chart_group_order(p.chart, kp);
    if order == 1 {
        return Err(GeomError::NotSingular);
    }
    Ok(UniformizingGroup::cyclic(order))
}
