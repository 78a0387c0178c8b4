//! Flat tori `C²/Λ`, finite-order automorphisms and their fixed points.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

const INTEGRALITY_TOL: f64 = 1e-9;
const MAX_DET: i64 = 64;

/// `T⁴ = C²/Λ` with `Λ` spanned over `Z` by four vectors of `C² = R⁴`,
/// real coordinates `(Re z₁, Im z₁, Re z₂, Im z₂)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTorus", into = "RawTorus")]
pub struct LatticeTorus {
    basis: Matrix4<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawTorus {
    basis: [[f64; 4]; 4],
}

impl TryFrom<RawTorus> for LatticeTorus {
    type Error = GeomError;
    fn try_from(r: RawTorus) -> Result<Self> {
        Self::new(r.basis)
    }
}

impl From<LatticeTorus> for RawTorus {
    fn from(t: LatticeTorus) -> Self {
        RawTorus { basis: std::array::from_fn(|j| std::array::from_fn(|i| t.basis[(i, j)])) }
    }
}

fn real4(z: [Complex64; 2]) -> [f64; 4] {
    [z[0].re, z[0].im, z[1].re, z[1].im]
}

/// Generator `e^{iπ/3}` of the hexagonal lattice `Λ₀ = Z + Z e^{iπ/3}`.
pub fn hexagonal_e2() -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_3)
}

impl LatticeTorus {
    /// Lattice spanned by the given real 4-vectors.
    pub fn new(basis: [[f64; 4]; 4]) -> Result<Self> {
        let m = Matrix4::from_fn(|i, j| basis[j][i]);
        if m.iter().any(|v| !v.is_finite()) || m.determinant().abs() < 1e-12 {
            return Err(GeomError::Config("lattice basis is not linearly independent over R".into()));
        }
        Ok(Self { basis: m })
    }

    /// `Z⁴ ⊂ R⁴`, i.e. `(Z + iZ)²`.
    pub fn square() -> Self {
        Self { basis: Matrix4::identity() }
    }

    /// `Λ = {(λ₁z₁ + λ₂z₂, μ₁z̄₁ + μ₂z̄₂) : z₁, z₂ ∈ Λ₀}`, which `γ = diag(ω, ω̄)` preserves
    /// for every choice of parameters with `λ₁μ₂ − λ₂μ₁ ≠ 0`.
    pub fn z3_family(lambda: [Complex64; 2], mu: [Complex64; 2]) -> Result<Self> {
        let det = lambda[0] * mu[1] - lambda[1] * mu[0];
        if det.norm() < 1e-12 {
            return Err(GeomError::Config("λ₁μ₂ − λ₂μ₁ must be nonzero".into()));
        }
        let e = [Complex64::new(1.0, 0.0), hexagonal_e2()];
        let mut cols = Vec::with_capacity(4);
        for slot in 0..2 {
            for g in e {
                cols.push(real4([lambda[slot] * g, mu[slot] * g.conj()]));
            }
        }
        Self::new([cols[0], cols[1], cols[2], cols[3]])
    }

    /// Basis vectors as matrix columns.
    /// A `γ`-invariant torus with parameters `λ, μ` drawn uniformly from `[−2, 2]²` per
    /// component, rejecting near-degenerate pairs.
    pub fn random_z3<R: rand::Rng>(rng: &mut R) -> Self {
        loop {
            let mut r = || Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let (l, m) = ([r(), r()], [r(), r()]);
            if (l[0] * m[1] - l[1] * m[0]).norm() < 0.1 {
                continue;
            }
            if let Ok(t) = Self::z3_family(l, m) {
                return t;
            }
        }
    }

    pub fn basis(&self) -> &Matrix4<f64> {
        &self.basis
    }

    /// Lattice coordinates of a real point.
    pub fn coords(&self, x: &Vector4<f64>) -> Vector4<f64> {
        self.basis.lu().solve(x).expect("basis is invertible")
    }

    /// Distance of lattice coordinates from `Z⁴` (max norm).
    pub fn distance_to_lattice(&self, x: &Vector4<f64>) -> f64 {
        self.coords(x).iter().map(|c| (c - c.round()).abs()).fold(0.0, f64::max)
    }
}

/// Complex-linear automorphism `z ↦ Mz` of `C²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusAutomorphism {
    pub matrix: [[Complex64; 2]; 2],
}

impl TorusAutomorphism {
    pub fn identity() -> Self {
        Self::diagonal(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
    }

    /// The Kummer involution `σ = −id`.
    pub fn involution() -> Self {
        Self::diagonal(Complex64::new(-1.0, 0.0), Complex64::new(-1.0, 0.0))
    }

    /// `diag(ω^q, ω̄^q)` with `ω = e^{2πi/p}`.
    pub fn cyclic(p: u32, q: i64) -> Self {
        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * q as f64 / p as f64);
        Self::diagonal(w, w.conj())
    }

    /// `γ: (z₁, z₂) ↦ (e^{2πi/3} z₁, e^{−2πi/3} z₂)`.
    pub fn gamma() -> Self {
        Self::cyclic(3, 1)
    }

    pub fn diagonal(a: Complex64, b: Complex64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self { matrix: [[a, z], [z, b]] }
    }

    /// Real `4 × 4` form acting on `(Re z₁, Im z₁, Re z₂, Im z₂)`.
    pub fn real_matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                let c = self.matrix[i][j];
                m[(2 * i, 2 * j)] = c.re;
                m[(2 * i, 2 * j + 1)] = -c.im;
                m[(2 * i + 1, 2 * j)] = c.im;
                m[(2 * i + 1, 2 * j + 1)] = c.re;
            }
        }
        m
    }

    /// Smallest `p ≤ max` with `M^p = I`.
    pub fn order(&self, max: u32) -> Option<u32> {
        let a = self.real_matrix();
        let mut acc = a;
        for p in 1..=max {
            if (acc - Matrix4::identity()).abs().max() < 1e-12 {
                return Some(p);
            }
            acc *= a;
        }
        None
    }

    /// `N = B⁻¹MB`, required to be an integer matrix.
    pub fn lattice_matrix(&self, torus: &LatticeTorus) -> Result<[[i64; 4]; 4]> {
        let b = torus.basis();
        let n = b.lu().solve(&(self.real_matrix() * b)).expect("basis is invertible");
        let defect = n.iter().map(|v| (v - v.round()).abs()).fold(0.0, f64::max);
        if defect > INTEGRALITY_TOL {
            return Err(GeomError::NotInvariant(defect));
        }
        Ok(std::array::from_fn(|i| std::array::from_fn(|j| n[(i, j)].round() as i64)))
    }
}

fn det4(m: &[[i64; 4]; 4]) -> i64 {
    let f = DMatrix::from_fn(4, 4, |i, j| m[i][j] as f64);
    f.determinant().round() as i64
}

/// A fixed point of an automorphism on `C²/Λ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPoint {
    /// Rational lattice coordinates `j/d`, reduced to `[0, 1)`.
    pub numerators: [i64; 4],
    pub denominator: i64,
    pub z: [Complex64; 2],
}

/// Exact enumeration of `{z ∈ C²/Λ : Mz ≡ z mod Λ}`.
///
/// With `N` the integer lattice matrix and `d = |det(N − I)|`, the solutions are `c = j/d`,
/// `j ∈ [0, d)⁴` with `(N − I) j ≡ 0 mod d`.
pub fn fixed_points(action: &TorusAutomorphism, torus: &LatticeTorus) -> Result<Vec<FixedPoint>> {
    let mut n = action.lattice_matrix(torus)?;
    for (i, row) in n.iter_mut().enumerate() {
        row[i] -= 1;
    }
    let d = det4(&n).abs();
    if d == 0 {
        return Err(GeomError::NotIsolated);
    }
    if d > MAX_DET {
        return Err(GeomError::Config(format!("|det(N − I)| = {d} exceeds the enumeration limit {MAX_DET}")));
    }
    let mut out = Vec::new();
    let real = action.real_matrix();
    for flat in 0..d.pow(4) {
        let j: [i64; 4] = std::array::from_fn(|a| (flat / d.pow(a as u32)) % d);
        let ok = (0..4).all(|r| (0..4).map(|c| n[r][c] * j[c]).sum::<i64>().rem_euclid(d) == 0);
        if !ok {
            continue;
        }
        let c = Vector4::from_fn(|a, _| j[a] as f64 / d as f64);
        let x = torus.basis() * c;
        let defect = torus.distance_to_lattice(&(real * x - x));
        if defect > 1e-12 {
            return Err(GeomError::NotInvariant(defect));
        }
        out.push(FixedPoint {
            numerators: j,
            denominator: d,
            z: [Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3])],
        });
    }
    Ok(out)
}

/// Euler's totient.
pub fn totient(n: u32) -> u32 {
    let (mut n, mut out, mut p) = (n, n, 2);
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            out -= out / p;
        }
        p += 1;
    }
    if n > 1 {
        out -= out / n;
    }
    out
}

/// Orders `2 < p ≤ max` for which a rank-2 lattice admits an automorphism of order `p`:
/// `e^{2πi/p}` must have minimal polynomial of degree `φ(p) ≤ 2`.
pub fn admissible_orders(max: u32) -> BTreeSet<u32> {
    (3..=max).filter(|&p| totient(p) <= 2).collect()
}

/// The same set found by exhaustive search over `2 × 2` integer matrices with entries in
/// `[−bound, bound]` having exact order `p`.
pub fn admissible_orders_by_search(max: u32, bound: i64) -> BTreeSet<u32> {
    let mut found = BTreeSet::new();
    let r = -bound..=bound;
    for a in r.clone() {
        for b in r.clone() {
            for c in r.clone() {
                for d in r.clone() {
                    if (a * d - b * c).abs() != 1 {
                        continue;
                    }
                    let m = [[a, b], [c, d]];
                    let mut acc = m;
                    for p in 1..=max {
                        if acc == [[1, 0], [0, 1]] {
                            if p > 2 {
                                found.insert(p);
                            }
                            break;
                        }
                        acc = [
                            [acc[0][0] * a + acc[0][1] * c, acc[0][0] * b + acc[0][1] * d],
                            [acc[1][0] * a + acc[1][1] * c, acc[1][0] * b + acc[1][1] * d],
                        ];
                    }
                }
            }
        }
    }
    found
}

/// [`admissible_orders`] together with the Kummer involution order 2.
pub fn admissible_orders_with_involution(max: u32) -> BTreeSet<u32> {
    let mut s = admissible_orders(max);
    if max >= 2 {
        s.insert(2);
    }
    s
}
