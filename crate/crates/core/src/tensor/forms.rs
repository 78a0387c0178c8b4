//! Pointwise exterior algebra on `R^n` in a coordinate coframe.
//!
//! A degree-`p` form is stored by its coefficients on strictly increasing
//! multi-indices in lexicographic order, so antisymmetry is structural.

use nalgebra::DMatrix;

use crate::error::{GeomError, Result};

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Strictly increasing `p`-subsets of `0..n`, lexicographic.
pub fn multi_indices(n: usize, p: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(n, p));
    let mut cur = Vec::with_capacity(p);
    fn rec(start: usize, n: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, p, cur, out);
            cur.pop();
        }
    }
    rec(0, n, p, &mut cur, &mut out);
    out
}

/// Lexicographic rank of a strictly increasing multi-index.
pub fn rank(n: usize, idx: &[usize]) -> usize {
    let p = idx.len();
    let mut r = 0;
    let mut prev = 0usize;
    for (pos, &v) in idx.iter().enumerate() {
        for skipped in prev..v {
            r += binomial(n - skipped - 1, p - pos - 1);
        }
        prev = v + 1;
    }
    r
}

/// Sort an index list, returning the permutation sign (0 on repetition).
pub fn sort_sign(idx: &[usize]) -> (i32, Vec<usize>) {
    let mut v = idx.to_vec();
    let mut sign = 1;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            } else if v[j] == v[j + 1] {
                return (0, v);
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return (0, v);
    }
    (sign, v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Form {
    pub dim: usize,
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

impl Form {
    pub fn zero(dim: usize, degree: usize) -> Self {
        Self { dim, degree, coeffs: vec![0.0; binomial(dim, degree)] }
    }

    pub fn from_coeffs(dim: usize, degree: usize, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), binomial(dim, degree), "coefficient count mismatch");
        Self { dim, degree, coeffs }
    }

    /// Build from `(coefficient, indices)` terms; indices may be unsorted and are 0-based.
    pub fn from_terms(dim: usize, degree: usize, terms: &[(f64, &[usize])]) -> Self {
        let mut f = Self::zero(dim, degree);
        for (c, idx) in terms {
            f.add_term(*c, idx);
        }
        f
    }

    pub fn add_term(&mut self, c: f64, idx: &[usize]) {
        assert_eq!(idx.len(), self.degree);
        let (s, sorted) = sort_sign(idx);
        if s != 0 {
            let r = rank(self.dim, &sorted);
            self.coeffs[r] += c * s as f64;
        }
    }

    /// Coefficient on an arbitrary (possibly unsorted) index list.
    pub fn get(&self, idx: &[usize]) -> f64 {
        let (s, sorted) = sort_sign(idx);
        if s == 0 {
            0.0
        } else {
            s as f64 * self.coeffs[rank(self.dim, &sorted)]
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * a).collect(), ..self.clone() }
    }

    pub fn add(&self, other: &Form) -> Self {
        assert_eq!((self.dim, self.degree), (other.dim, other.degree));
        Self { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(), ..self.clone() }
    }

    pub fn sub(&self, other: &Form) -> Self {
        self.add(&other.scaled(-1.0))
    }

    pub fn wedge(&self, other: &Form) -> Form {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let deg = self.degree + other.degree;
        let mut out = Form::zero(n, deg);
        if deg > n {
            return out;
        }
        let a_idx = multi_indices(n, self.degree);
        let b_idx = multi_indices(n, other.degree);
        for (ia, i) in a_idx.iter().enumerate() {
            let ca = self.coeffs[ia];
            if ca == 0.0 {
                continue;
            }
            for (ib, j) in b_idx.iter().enumerate() {
                let cb = other.coeffs[ib];
                if cb == 0.0 {
                    continue;
                }
                let mut cat = i.clone();
                cat.extend_from_slice(j);
                out.add_term(ca * cb, &cat);
            }
        }
        out
    }

    /// Interior product `ι_v`.
    pub fn interior(&self, v: &[f64]) -> Form {
        assert!(self.degree > 0);
        let n = self.dim;
        let mut out = Form::zero(n, self.degree - 1);
        for (r, idx) in multi_indices(n, self.degree).iter().enumerate() {
            let c = self.coeffs[r];
            if c == 0.0 {
                continue;
            }
            for (pos, &i) in idx.iter().enumerate() {
                let rest: Vec<usize> = idx.iter().enumerate().filter(|(q, _)| *q != pos).map(|(_, &j)| j).collect();
                let s = if pos % 2 == 0 { 1.0 } else { -1.0 };
                out.add_term(s * c * v[i], &rest);
            }
        }
        out
    }

    /// Pullback by the linear map `A` (`(A*f)(v…) = f(Av…)`).
    pub fn pullback(&self, a: &DMatrix<f64>) -> Form {
        let n = self.dim;
        let p = self.degree;
        let idx = multi_indices(n, p);
        let mut out = Form::zero(n, p);
        if p == 0 {
            out.coeffs = self.coeffs.clone();
            return out;
        }
        for (ri, i) in idx.iter().enumerate() {
            let mut acc = 0.0;
            for (rk, k) in idx.iter().enumerate() {
                let c = self.coeffs[rk];
                if c == 0.0 {
                    continue;
                }
                acc += c * minor(a, k, i);
            }
            out.coeffs[ri] = acc;
        }
        out
    }

    /// Raise all indices with the inverse metric.
    pub fn raised(&self, ginv: &DMatrix<f64>) -> Vec<f64> {
        let idx = multi_indices(self.dim, self.degree);
        if self.degree == 0 {
            return self.coeffs.clone();
        }
        idx.iter()
            .map(|i| idx.iter().zip(&self.coeffs).filter(|(_, c)| **c != 0.0).map(|(k, c)| c * minor(ginv, i, k)).sum())
            .collect()
    }

    /// Pointwise inner product `⟨f, h⟩_g`.
    pub fn inner(&self, other: &Form, ginv: &DMatrix<f64>) -> f64 {
        self.raised(ginv).iter().zip(&other.coeffs).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self, ginv: &DMatrix<f64>) -> f64 {
        self.inner(self, ginv).max(0.0).sqrt()
    }

    /// Hodge star with respect to `g` and the orientation `±dx¹∧…∧dxⁿ`.
    pub fn hodge_star(&self, g: &DMatrix<f64>, orientation: f64) -> Result<Form> {
        let n = self.dim;
        let det = g.determinant();
        if !(det > 0.0) {
            return Err(GeomError::SingularMetric);
        }
        let ginv = g.clone().try_inverse().ok_or(GeomError::SingularMetric)?;
        let up = self.raised(&ginv);
        let vol = orientation * det.sqrt();
        let q = n - self.degree;
        let mut out = Form::zero(n, q);
        for (r, i) in multi_indices(n, self.degree).iter().enumerate() {
            if up[r] == 0.0 {
                continue;
            }
            let comp: Vec<usize> = (0..n).filter(|j| !i.contains(j)).collect();
            let mut cat = i.clone();
            cat.extend_from_slice(&comp);
            let (s, _) = sort_sign(&cat);
            out.coeffs[rank(n, &comp)] += vol * s as f64 * up[r];
        }
        Ok(out)
    }

    /// `d` of a form field from the Jacobian of its coefficients, `jac[i][r] = ∂_i c_r`.
    pub fn exterior_from_jacobian(dim: usize, degree: usize, jac: &[Vec<f64>]) -> Form {
        let mut out = Form::zero(dim, degree + 1);
        if degree + 1 > dim {
            return out;
        }
        for (r, idx) in multi_indices(dim, degree).iter().enumerate() {
            for (i, row) in jac.iter().enumerate() {
                let c = row[r];
                if c == 0.0 || idx.contains(&i) {
                    continue;
                }
                let mut cat = vec![i];
                cat.extend_from_slice(idx);
                out.add_term(c, &cat);
            }
        }
        out
    }

    /// Coefficient matrix of a 2-form (`Ω_ij = f(e_i, e_j)`).
    pub fn as_matrix(&self) -> DMatrix<f64> {
        assert_eq!(self.degree, 2);
        let n = self.dim;
        let mut m = DMatrix::zeros(n, n);
        for (r, idx) in multi_indices(n, 2).iter().enumerate() {
            m[(idx[0], idx[1])] = self.coeffs[r];
            m[(idx[1], idx[0])] = -self.coeffs[r];
        }
        m
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Form {
        let n = m.nrows();
        let coeffs = multi_indices(n, 2).iter().map(|i| 0.5 * (m[(i[0], i[1])] - m[(i[1], i[0])])).collect();
        Form::from_coeffs(n, 2, coeffs)
    }
}

/// Determinant of the submatrix with rows `rows` and columns `cols`.
pub fn minor(a: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    match rows.len() {
        0 => 1.0,
        1 => a[(rows[0], cols[0])],
        2 => a[(rows[0], cols[0])] * a[(rows[1], cols[1])] - a[(rows[0], cols[1])] * a[(rows[1], cols[0])],
        3 => {
            let m = |i: usize, j: usize| a[(rows[i], cols[j])];
            m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
        }
        k => DMatrix::from_fn(k, k, |i, j| a[(rows[i], cols[j])]).determinant(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_is_inverse_of_enumeration() {
        for n in 1..8 {
            for p in 0..=n {
                for (r, idx) in multi_indices(n, p).iter().enumerate() {
                    assert_eq!(rank(n, idx), r);
                }
            }
        }
    }

    #[test]
    fn euclidean_star_in_four_dimensions() {
        let f = Form::from_terms(4, 2, &[(1.0, &[0, 1])]);
        let s = f.hodge_star(&DMatrix::identity(4, 4), 1.0).unwrap();
        assert_eq!(s, Form::from_terms(4, 2, &[(1.0, &[2, 3])]));
    }

    #[test]
    fn wedge_is_graded_commutative() {
        let a = Form::from_terms(5, 1, &[(1.0, &[0]), (2.0, &[3])]);
        let b = Form::from_terms(5, 2, &[(1.0, &[1, 2]), (-1.0, &[2, 4])]);
        assert_eq!(a.wedge(&b), b.wedge(&a));
        let c = Form::from_terms(5, 1, &[(0.5, &[4])]);
        assert_eq!(a.wedge(&c), c.wedge(&a).scaled(-1.0));
    }

    #[test]
    fn exterior_derivative_of_x_dy() {
        // f = x dy on R², jac[i][r]: ∂_x (coeff of dy)=1, coeff order [dx, dy]
        let jac = vec![vec![0.0, 1.0], vec![0.0, 0.0]];
        let d = Form::exterior_from_jacobian(2, 1, &jac);
        assert_eq!(d.coeffs, vec![1.0]);
    }
}
