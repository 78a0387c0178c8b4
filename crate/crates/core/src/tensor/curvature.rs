//! Levi-Civita connection and curvature of a coordinate metric.
//!
//! Index conventions: `Γ^i_{jk}` is `gamma[i][j][k]`, `R^i_{jkl}` is
//! `riemann[i][j][k][l]` with `R^i_{jkl} = ∂_k Γ^i_{lj} − ∂_l Γ^i_{kj} + Γ^i_{km} Γ^m_{lj} − Γ^i_{lm} Γ^m_{kj}`,
//! and `Ric_{jl} = R^i_{jil}`.

use nalgebra::DMatrix;

use super::derivative::{jacobian, jet, DerivativeScheme};
use super::field::MetricField;
use crate::error::{GeomError, Result};

pub type Christoffel = Vec<Vec<Vec<f64>>>;

pub fn to_matrix(n: usize, v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| 0.5 * (v[i * n + j] + v[j * n + i]))
}

/// Metric matrix at `x`, rejecting points outside the domain or where Cholesky fails.
pub fn metric_at<G: MetricField + ?Sized>(g: &G, x: &[f64]) -> Result<DMatrix<f64>> {
    if !g.in_domain(x) {
        return Err(GeomError::DomainError(format!("{x:?}")));
    }
    let n = g.dim();
    let m = to_matrix(n, &g.eval::<f64>(x)?);
    if m.clone().cholesky().is_none() {
        return Err(GeomError::SingularMetric);
    }
    Ok(m)
}

fn inverse(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    g.clone().cholesky().map(|c| c.inverse()).ok_or(GeomError::SingularMetric)
}

fn gamma_from(n: usize, ginv: &DMatrix<f64>, dg: &[Vec<f64>]) -> Christoffel {
    // dg[k][i*n+j] = ∂_k g_ij
    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in j..n {
                let mut s = 0.0;
                for m in 0..n {
                    s += ginv[(i, m)] * (dg[j][m * n + k] + dg[k][m * n + j] - dg[m][j * n + k]);
                }
                gamma[i][j][k] = 0.5 * s;
                gamma[i][k][j] = 0.5 * s;
            }
        }
    }
    gamma
}

pub fn christoffel<G: MetricField + ?Sized>(g: &G, x: &[f64], scheme: &DerivativeScheme) -> Result<Christoffel> {
    let m = metric_at(g, x)?;
    let ginv = inverse(&m)?;
    let dg = jacobian(g, x, scheme)?;
    Ok(gamma_from(g.dim(), &ginv, &dg))
}

#[derive(Debug, Clone)]
pub struct Curvature {
    pub metric: DMatrix<f64>,
    pub gamma: Christoffel,
    /// `R^i_{jkl}`
    pub riemann: Vec<Vec<Vec<Vec<f64>>>>,
    pub ricci: DMatrix<f64>,
}

pub fn curvature<G: MetricField + ?Sized>(g: &G, x: &[f64], scheme: &DerivativeScheme) -> Result<Curvature> {
    let n = g.dim();
    let metric = metric_at(g, x)?;
    let ginv = inverse(&metric)?;
    let j = jet(g, x, scheme)?;
    let gamma = gamma_from(n, &ginv, &j.d1);

    // ∂_l g^{im} = −g^{ia} ∂_l g_{ab} g^{bm}
    let dginv: Vec<DMatrix<f64>> = (0..n)
        .map(|l| {
            let dgl = to_matrix(n, &j.d1[l]);
            -(&ginv * dgl * &ginv)
        })
        .collect();
    // Γ_{m jk} (first kind) and its derivatives
    let first_kind = |m: usize, a: usize, b: usize, d1: &dyn Fn(usize, usize, usize) -> f64| {
        0.5 * (d1(a, m, b) + d1(b, m, a) - d1(m, a, b))
    };
    let dg = |k: usize, a: usize, b: usize| j.d1[k][a * n + b];
    // dgamma[l][i][j][k] = ∂_l Γ^i_{jk}
    let mut dgamma = vec![vec![vec![vec![0.0; n]; n]; n]; n];
    for l in 0..n {
        let ddg = |k: usize, a: usize, b: usize| j.d2[l][k][a * n + b];
        for i in 0..n {
            for a in 0..n {
                for b in a..n {
                    let mut s = 0.0;
                    for m in 0..n {
                        s += dginv[l][(i, m)] * first_kind(m, a, b, &dg) + ginv[(i, m)] * first_kind(m, a, b, &ddg);
                    }
                    dgamma[l][i][a][b] = s;
                    dgamma[l][i][b][a] = s;
                }
            }
        }
    }

    let mut riemann = vec![vec![vec![vec![0.0; n]; n]; n]; n];
    for i in 0..n {
        for jj in 0..n {
            for k in 0..n {
                for l in (k + 1)..n {
                    let mut s = dgamma[k][i][l][jj] - dgamma[l][i][k][jj];
                    for m in 0..n {
                        s += gamma[i][k][m] * gamma[m][l][jj] - gamma[i][l][m] * gamma[m][k][jj];
                    }
                    riemann[i][jj][k][l] = s;
                    riemann[i][jj][l][k] = -s;
                }
            }
        }
    }
    let mut ricci = DMatrix::zeros(n, n);
    for jj in 0..n {
        for l in 0..n {
            ricci[(jj, l)] = (0..n).map(|i| riemann[i][jj][i][l]).sum();
        }
    }
    Ok(Curvature { metric, gamma, riemann, ricci })
}

/// Columns form a `g`-orthonormal frame, Gram–Schmidt in coordinate order.
pub fn orthonormal_frame(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = g.nrows();
    let mut e = DMatrix::<f64>::identity(n, n);
    for a in 0..n {
        let mut v = e.column(a).clone_owned();
        for b in 0..a {
            let eb = e.column(b).clone_owned();
            let c = (v.transpose() * g * &eb)[(0, 0)];
            v -= eb * c;
        }
        let nn = (v.transpose() * g * &v)[(0, 0)];
        if !(nn > 0.0) {
            return Err(GeomError::SingularMetric);
        }
        e.set_column(a, &(v / nn.sqrt()));
    }
    Ok(e)
}

impl Curvature {
    pub fn dim(&self) -> usize {
        self.metric.nrows()
    }

    /// `R_{ijkl} = g_{im} R^m_{jkl}`.
    pub fn lowered(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n * n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        out[((i * n + j) * n + k) * n + l] =
                            (0..n).map(|m| self.metric[(i, m)] * self.riemann[m][j][k][l]).sum();
                    }
                }
            }
        }
        out
    }

    /// Fully covariant Riemann tensor in a `g`-orthonormal frame.
    pub fn riemann_frame(&self, frame: &DMatrix<f64>) -> Vec<f64> {
        let n = self.dim();
        let low = self.lowered();
        let idx = |i: usize, j: usize, k: usize, l: usize| ((i * n + j) * n + k) * n + l;
        // contract one slot at a time
        let mut cur = low;
        for slot in 0..4 {
            let mut next = vec![0.0; n * n * n * n];
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            let mut s = 0.0;
                            for m in 0..n {
                                let f = frame[(m, [a, b, c, d][slot])];
                                if f == 0.0 {
                                    continue;
                                }
                                let mut ix = [a, b, c, d];
                                ix[slot] = m;
                                s += f * cur[idx(ix[0], ix[1], ix[2], ix[3])];
                            }
                            next[idx(a, b, c, d)] = s;
                        }
                    }
                }
            }
            cur = next;
        }
        cur
    }

    pub fn ricci_frame(&self, frame: &DMatrix<f64>) -> DMatrix<f64> {
        frame.transpose() * &self.ricci * frame
    }

    /// Largest orthonormal-frame Ricci component.
    pub fn max_ricci(&self) -> Result<f64> {
        let e = orthonormal_frame(&self.metric)?;
        Ok(self.ricci_frame(&e).amax())
    }

    /// Largest orthonormal-frame Riemann component.
    pub fn max_riemann(&self) -> Result<f64> {
        let e = orthonormal_frame(&self.metric)?;
        Ok(self.riemann_frame(&e).iter().fold(0.0, |m, v| m.max(v.abs())))
    }

    pub fn scalar(&self) -> f64 {
        let ginv = inverse(&self.metric).unwrap_or_else(|_| DMatrix::zeros(self.dim(), self.dim()));
        ginv.component_mul(&self.ricci).sum()
    }

    /// Largest `|R^i_{[jkl]}|`.
    pub fn bianchi_defect(&self) -> f64 {
        let n = self.dim();
        let r = &self.riemann;
        let mut m = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        m = m.max((r[i][j][k][l] + r[i][k][l][j] + r[i][l][j][k]).abs());
                    }
                }
            }
        }
        m
    }

    /// Weyl tensor in an orthonormal frame.
    pub fn weyl_frame(&self, frame: &DMatrix<f64>) -> Vec<f64> {
        let n = self.dim();
        let nf = n as f64;
        let r = self.riemann_frame(frame);
        let ric = self.ricci_frame(frame);
        let s = ric.trace();
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let mut w = r;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for e in 0..n {
                        let k = ((a * n + b) * n + c) * n + e;
                        w[k] -= (ric[(a, c)] * d(b, e) - ric[(a, e)] * d(b, c) + ric[(b, e)] * d(a, c)
                            - ric[(b, c)] * d(a, e))
                            / (nf - 2.0);
                        w[k] += s * (d(a, c) * d(b, e) - d(a, e) * d(b, c)) / ((nf - 1.0) * (nf - 2.0));
                    }
                }
            }
        }
        w
    }

    /// Largest entry of the Weyl operator restricted to self-dual 2-forms,
    /// for the orientation `orientation · e¹∧e²∧e³∧e⁴` of the Gram–Schmidt frame.
    pub fn weyl_self_dual_max(&self, orientation: f64) -> Result<f64> {
        assert_eq!(self.dim(), 4, "Weyl halves are four-dimensional");
        let e = orthonormal_frame(&self.metric)?;
        let w = self.weyl_frame(&e);
        let s = orientation;
        // self-dual basis: e01 + s e23, e02 − s e13, e03 + s e12 (normalised)
        let basis: [[(usize, usize, f64); 2]; 3] =
            [[(0, 1, 1.0), (2, 3, s)], [(0, 2, 1.0), (1, 3, -s)], [(0, 3, 1.0), (1, 2, s)]];
        let idx = |a: usize, b: usize, c: usize, d: usize| ((a * 4 + b) * 4 + c) * 4 + d;
        let mut m = 0.0f64;
        for bi in &basis {
            for bj in &basis {
                let mut v = 0.0;
                for &(a, b, ca) in bi {
                    for &(c, d, cc) in bj {
                        v += 0.5 * ca * cc * w[idx(a, b, c, d)];
                    }
                }
                m = m.max(v.abs());
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::field::{Euclidean, RoundSphere};

    #[test]
    fn euclidean_connection_vanishes() {
        let g = christoffel(&Euclidean(3), &[0.1, 0.2, 0.3], &DerivativeScheme::default()).unwrap();
        assert!(g.iter().flatten().flatten().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn sphere_christoffel_and_einstein_constant() {
        let th = 0.8f64;
        let x = [th, 0.3];
        for scheme in [DerivativeScheme::default(), DerivativeScheme::ad()] {
            let g = christoffel(&RoundSphere { radius: 1.0 }, &x, &scheme).unwrap();
            assert!((g[0][1][1] + th.sin() * th.cos()).abs() < 1e-9);
            assert!((g[1][0][1] - th.cos() / th.sin()).abs() < 1e-9);
            let c = curvature(&RoundSphere { radius: 1.0 }, &x, &scheme).unwrap();
            let diff = &c.ricci - &c.metric;
            assert!(diff.amax() < 1e-7, "{diff}");
            assert!((c.scalar() - 2.0).abs() < 1e-7);
        }
    }

    #[test]
    fn frame_is_orthonormal() {
        let g = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0]);
        let e = orthonormal_frame(&g).unwrap();
        let id = e.transpose() * &g * &e;
        assert!((id - DMatrix::identity(3, 3)).amax() < 1e-14);
    }
}
