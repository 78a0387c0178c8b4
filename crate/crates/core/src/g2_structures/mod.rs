//! Pointwise G2 algebra on `R⁷` and the glued 7-dimensional forms.
//!
//! Coordinates `y₁ … y₇` are stored 0-based.

mod glued;
mod hypotheses;

use nalgebra::DMatrix;

use crate::error::{GeomError, Result};
use crate::tensor::forms::multi_indices;
use crate::tensor::Form;

pub use glued::{
    blend_shell, build_phi_t, codifferential_defect, flat_triple, gh_triple, psi_at, torsion_at, torsion_norms,
    torsion_sweep, FlatTriple, Hypotheses, PhiT, TorsionNorms, TorsionReport, TorsionRow, TripleWithFlat,
    TORSION_SLOPE, VT,
};
pub use hypotheses::{hypothesis_check, HypothesisReport, HypothesisRow, INJECTIVITY_RADIUS};

type Terms = [(f64, [usize; 3]); 7];

const PHI0: Terms = [
    (1.0, [0, 1, 6]),
    (1.0, [0, 2, 5]),
    (1.0, [0, 3, 4]),
    (1.0, [1, 2, 4]),
    (-1.0, [1, 3, 5]),
    (1.0, [2, 3, 6]),
    (1.0, [4, 5, 6]),
];

const STAR_PHI0: [(f64, [usize; 4]); 7] = [
    (1.0, [0, 1, 2, 3]),
    (1.0, [0, 1, 4, 5]),
    (-1.0, [0, 2, 4, 6]),
    (1.0, [0, 3, 5, 6]),
    (1.0, [1, 2, 5, 6]),
    (1.0, [1, 3, 4, 6]),
    (1.0, [2, 3, 4, 5]),
];

/// `φ₀ = y₁₂₇ + y₁₃₆ + y₁₄₅ + y₂₃₅ − y₂₄₆ + y₃₄₇ + y₅₆₇`.
pub fn phi0() -> Form {
    let mut f = Form::zero(7, 3);
    for (c, idx) in PHI0 {
        f.add_term(c, &idx);
    }
    f
}

/// `*φ₀ = y₁₂₃₄ + y₁₂₅₆ − y₁₃₅₇ + y₁₄₆₇ + y₂₃₆₇ + y₂₄₅₇ + y₃₄₅₆`.
pub fn star_phi0() -> Form {
    let mut f = Form::zero(7, 4);
    for (c, idx) in STAR_PHI0 {
        f.add_term(c, &idx);
    }
    f
}

fn check_three_form(phi: &Form) -> Result<()> {
    if phi.dim != 7 || phi.degree != 3 {
        return Err(GeomError::DomainError(format!(
            "expected a 3-form on R⁷, got degree {} on R^{}",
            phi.degree, phi.dim
        )));
    }
    Ok(())
}

/// `B_ij = (ι_i φ ∧ ι_j φ ∧ φ) / (6 y₁…₇)`; equals the identity for `φ₀`.
pub fn bilinear(phi: &Form) -> Result<DMatrix<f64>> {
    check_three_form(phi)?;
    let inner: Vec<Form> = (0..7)
        .map(|i| {
            let mut e = [0.0; 7];
            e[i] = 1.0;
            phi.interior(&e)
        })
        .collect();
    let mut b = DMatrix::zeros(7, 7);
    for i in 0..7 {
        for j in i..7 {
            let v = inner[i].wedge(&inner[j]).wedge(phi).coeffs[0] / 6.0;
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }
    Ok(b)
}

/// A 3-form in the open orbit `Λ³₊`, with its metric and orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct G2Form {
    form: Form,
    metric: DMatrix<f64>,
    orientation: f64,
}

impl G2Form {
    /// The metric is `g = B / det(B)^{1/9}` (real ninth root, sign kept), so `g(φ₀) = I` and
    /// `g(λφ) = λ^{2/3} g(φ)`. The orientation is the sign of `det B`.
    pub fn new(form: Form) -> Result<Self> {
        let b = bilinear(&form)?;
        let det = b.determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(GeomError::NotPositive);
        }
        let metric = b / det.cbrt().cbrt();
        if metric.clone().cholesky().is_none() {
            return Err(GeomError::NotPositive);
        }
        Ok(Self { form, metric, orientation: det.signum() })
    }

    pub fn form(&self) -> &Form {
        &self.form
    }
    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }
    pub fn orientation(&self) -> f64 {
        self.orientation
    }
    pub fn inverse_metric(&self) -> DMatrix<f64> {
        self.metric.clone().try_inverse().expect("positive-definite metric")
    }

    /// `Θ(φ) = *_φ φ`.
    pub fn theta(&self) -> Form {
        self.star(&self.form)
    }

    /// Hodge star of any form with respect to the metric and orientation of `φ`.
    pub fn star(&self, f: &Form) -> Form {
        f.hodge_star(&self.metric, self.orientation).expect("positive-definite metric")
    }
}

pub fn metric_from_phi(phi: &Form) -> Result<DMatrix<f64>> {
    Ok(G2Form::new(phi.clone())?.metric)
}

pub fn theta(phi: &Form) -> Result<Form> {
    Ok(G2Form::new(phi.clone())?.theta())
}

/// Linearised action of `X ∈ gl(7)` on `φ`: `d/ds (exp sX)* φ` at `s = 0`.
pub fn infinitesimal_action(phi: &Form, x: &DMatrix<f64>) -> Form {
    let mut out = Form::zero(phi.dim, phi.degree);
    for (r, idx) in multi_indices(phi.dim, phi.degree).iter().enumerate() {
        let mut acc = 0.0;
        for slot in 0..idx.len() {
            for a in 0..phi.dim {
                let xa = x[(a, idx[slot])];
                if xa == 0.0 {
                    continue;
                }
                let mut moved = idx.clone();
                moved[slot] = a;
                acc += xa * phi.get(&moved);
            }
        }
        out.coeffs[r] = acc;
    }
    out
}

/// Basis `E_ab − E_ba`, `a < b`, of `so(7)`.
pub fn so7_basis() -> Vec<DMatrix<f64>> {
    let mut out = Vec::with_capacity(21);
    for a in 0..7 {
        for b in a + 1..7 {
            let mut m = DMatrix::zeros(7, 7);
            m[(a, b)] = 1.0;
            m[(b, a)] = -1.0;
            out.push(m);
        }
    }
    out
}

/// The `35 × 21` matrix of the linearised `so(7)` action on `φ₀`; entries are integers.
fn so7_action_matrix() -> Vec<Vec<i64>> {
    let phi = phi0();
    let cols: Vec<Form> = so7_basis().iter().map(|x| infinitesimal_action(&phi, x)).collect();
    (0..35).map(|r| cols.iter().map(|c| c.coeffs[r].round() as i64).collect()).collect()
}

/// Rank over `Q` by fraction-free elimination.
pub fn exact_rank(mut m: Vec<Vec<i64>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| m[r][c] != 0) else { continue };
        m.swap(rank, p);
        for r in 0..rows {
            if r == rank || m[r][c] == 0 {
                continue;
            }
            let (a, b) = (m[rank][c], m[r][c]);
            for k in 0..cols {
                m[r][k] = a * m[r][k] - b * m[rank][k];
            }
            let g = m[r].iter().fold(0i64, |g, v| gcd(g, v.abs()));
            if g > 1 {
                m[r].iter_mut().for_each(|v| *v /= g);
            }
        }
        rank += 1;
    }
    rank
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Dimension of the stabiliser of `φ₀` in `so(7)`, computed exactly.
pub fn stabilizer_dimension() -> usize {
    21 - exact_rank(so7_action_matrix())
}

/// An orthonormal basis of the stabiliser algebra `g₂ ⊂ so(7)` (from the SVD null space).
pub fn g2_algebra_basis() -> Vec<DMatrix<f64>> {
    let basis = so7_basis();
    let exact = so7_action_matrix();
    let a = DMatrix::from_fn(35, 21, |r, c| exact[r][c] as f64);
    let svd = nalgebra::linalg::SVD::new(a.transpose() * &a, true, true);
    let v_t = svd.v_t.expect("requested");
    let mut out = Vec::new();
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s < 1e-10 {
            let row = v_t.row(k);
            let mut m = DMatrix::zeros(7, 7);
            for (c, b) in basis.iter().enumerate() {
                m += b * row[c];
            }
            out.push(m);
        }
    }
    out
}

/// `exp(X)` for a random element `X` of `g₂` with coefficients drawn from `[-scale, scale]`.
pub fn random_g2_element<R: rand::Rng>(rng: &mut R, scale: f64) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(7, 7);
    for b in g2_algebra_basis() {
        x += b * rng.random_range(-scale..=scale);
    }
    x.exp()
}
