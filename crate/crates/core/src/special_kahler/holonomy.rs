//! Parallel transport of a frame along curves in special coordinates.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{complex_structure_at, KahlerForm2, Metric2};
use crate::chart_atlas::{ChartId, WeightPair};
use crate::error::{GeomError, Result};
use crate::ode::{integrate, OdeOptions};
use crate::report::Check;
use crate::tensor::{christoffel, metric_at, DerivativeScheme, Field, Form, MetricField};

/// A curve parametrized by `s ∈ [0, 1]`.
pub trait Curve: Sync {
    fn point(&self, s: f64) -> [f64; 4];
    fn velocity(&self, s: f64) -> [f64; 4];
}

#[derive(Debug, Clone)]
pub struct Circle {
    pub center: [f64; 4],
    pub u: [f64; 4],
    pub v: [f64; 4],
    pub radius: f64,
}

impl Curve for Circle {
    fn point(&self, s: f64) -> [f64; 4] {
        let (sn, cs) = (2.0 * PI * s).sin_cos();
        std::array::from_fn(|i| self.center[i] + self.radius * (cs * self.u[i] + sn * self.v[i]))
    }
    fn velocity(&self, s: f64) -> [f64; 4] {
        let (sn, cs) = (2.0 * PI * s).sin_cos();
        std::array::from_fn(|i| 2.0 * PI * self.radius * (-sn * self.u[i] + cs * self.v[i]))
    }
}

/// Straight segment between two coordinate points.
#[derive(Debug, Clone)]
pub struct LinePath {
    pub from: [f64; 4],
    pub to: [f64; 4],
}

impl Curve for LinePath {
    fn point(&self, s: f64) -> [f64; 4] {
        std::array::from_fn(|i| self.from[i] + s * (self.to[i] - self.from[i]))
    }
    fn velocity(&self, _s: f64) -> [f64; 4] {
        std::array::from_fn(|i| self.to[i] - self.from[i])
    }
}

/// Closed periodic cubic spline through nodes, uniform in `s`.
#[derive(Debug, Clone)]
pub struct PeriodicSpline {
    nodes: Vec<[f64; 4]>,
    second: Vec<[f64; 4]>,
}

impl PeriodicSpline {
    pub fn new(nodes: Vec<[f64; 4]>) -> Result<Self> {
        let n = nodes.len();
        if n < 3 {
            return Err(GeomError::Config("a periodic spline needs at least three nodes".into()));
        }
        // M_{i−1} + 4 M_i + M_{i+1} = 6 (y_{i+1} − 2 y_i + y_{i−1}), cyclic
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] += 4.0;
            a[(i, (i + 1) % n)] += 1.0;
            a[(i, (i + n - 1) % n)] += 1.0;
        }
        let lu = a.lu();
        let mut second = vec![[0.0; 4]; n];
        for c in 0..4 {
            let rhs = DMatrix::from_fn(n, 1, |i, _| {
                6.0 * (nodes[(i + 1) % n][c] - 2.0 * nodes[i][c] + nodes[(i + n - 1) % n][c])
            });
            let m = lu.solve(&rhs).ok_or_else(|| GeomError::Config("spline system is singular".into()))?;
            for i in 0..n {
                second[i][c] = m[(i, 0)];
            }
        }
        Ok(Self { nodes, second })
    }

    fn locate(&self, s: f64) -> (usize, usize, f64) {
        let n = self.nodes.len();
        let u = s.rem_euclid(1.0) * n as f64;
        let i = (u.floor() as usize).min(n - 1);
        (i, (i + 1) % n, u - i as f64)
    }
}

impl Curve for PeriodicSpline {
    fn point(&self, s: f64) -> [f64; 4] {
        let (i, j, t) = self.locate(s);
        let (y0, y1, m0, m1) = (self.nodes[i], self.nodes[j], self.second[i], self.second[j]);
        let w = 1.0 - t;
        std::array::from_fn(|c| w * y0[c] + t * y1[c] + ((w * w * w - w) * m0[c] + (t * t * t - t) * m1[c]) / 6.0)
    }
    fn velocity(&self, s: f64) -> [f64; 4] {
        let n = self.nodes.len() as f64;
        let (i, j, t) = self.locate(s);
        let (y0, y1, m0, m1) = (self.nodes[i], self.nodes[j], self.second[i], self.second[j]);
        let w = 1.0 - t;
        std::array::from_fn(|c| n * (y1[c] - y0[c] + ((1.0 - 3.0 * w * w) * m0[c] + (3.0 * t * t - 1.0) * m1[c]) / 6.0))
    }
}

/// Plane and radial wobble of a star-shaped loop, independent of its size.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopShape {
    pub u: [f64; 4],
    pub v: [f64; 4],
    pub wobble: Vec<f64>,
}

impl LoopShape {
    pub fn random<R: Rng>(rng: &mut R, nodes: usize) -> Self {
        let mut u = [0.0; 4];
        let mut v = [0.0; 4];
        for i in 0..4 {
            u[i] = rng.random_range(-1.0..1.0);
            v[i] = rng.random_range(-1.0..1.0);
        }
        let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        u.iter_mut().for_each(|x| *x /= nu);
        let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(&u).for_each(|(x, a)| *x -= dot * a);
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= nv);
        let wobble = (0..nodes).map(|_| rng.random_range(0.8..1.2)).collect();
        Self { u, v, wobble }
    }

    pub fn spline(&self, center: [f64; 4], diameter: f64) -> Result<PeriodicSpline> {
        scaled_loop(center, self.u, self.v, diameter, &self.wobble)
    }
}

/// Random closed spline of the given diameter scale around `center`.
pub fn random_loop<R: Rng>(rng: &mut R, center: [f64; 4], diameter: f64, nodes: usize) -> Result<PeriodicSpline> {
    LoopShape::random(rng, nodes).spline(center, diameter)
}

/// Star-shaped planar spline loop; `wobble[i]` scales the radius at node `i`.
pub fn scaled_loop(
    center: [f64; 4],
    u: [f64; 4],
    v: [f64; 4],
    diameter: f64,
    wobble: &[f64],
) -> Result<PeriodicSpline> {
    let n = wobble.len();
    let nodes = (0..n)
        .map(|i| {
            let ang = 2.0 * PI * i as f64 / n as f64;
            let r = 0.5 * diameter * wobble[i];
            std::array::from_fn(|c| center[c] + r * (ang.cos() * u[c] + ang.sin() * v[c]))
        })
        .collect();
    PeriodicSpline::new(nodes)
}

/// Local error tolerance per unit of requested end-to-end accuracy; the global
/// error of the 5(4) pair runs about two orders of magnitude above the local one.
const LOCAL_TOL_FACTOR: f64 = 1e-3;

/// Transport matrix along a curve: column `a` is the transported `a`-th coordinate vector.
pub fn transport<G: MetricField, C: Curve + ?Sized>(g: &G, curve: &C, ode_tol: f64) -> Result<DMatrix<f64>> {
    let n = g.dim();
    let scheme = DerivativeScheme::ad();
    let mut y0 = vec![0.0; n * n];
    for i in 0..n {
        y0[i * n + i] = 1.0;
    }
    let rhs = |s: f64, y: &[f64]| -> Result<Vec<f64>> {
        let x = curve.point(s);
        let xd = curve.velocity(s);
        let gam = christoffel(g, &x[..n], &scheme)?;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for a in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    if xd[j] == 0.0 {
                        continue;
                    }
                    for k in 0..n {
                        acc -= gam[i][j][k] * xd[j] * y[k * n + a];
                    }
                }
                out[i * n + a] = acc;
            }
        }
        Ok(out)
    };
    let (y, _) = integrate(rhs, 0.0, 1.0, &y0, &OdeOptions::with_tol(ode_tol * LOCAL_TOL_FACTOR))?;
    Ok(DMatrix::from_row_slice(n, n, &y))
}

#[derive(Debug, Clone, Serialize)]
pub struct HolonomyElement {
    /// Transport in coordinate components.
    #[serde(skip)]
    pub transport: DMatrix<f64>,
    /// Complex 2×2 form in the unitary basis `(e₁, Je₁, e₃, Je₃)`.
    #[serde(skip)]
    pub complex: Matrix2<Complex64>,
    /// `‖TᵀgT − g‖` in an orthonormal frame.
    pub metric_defect: f64,
    /// `‖TᵀΩT − Ω‖` in an orthonormal frame.
    pub form_defect: f64,
    pub det_defect: f64,
    /// `‖T − I‖` in an orthonormal frame.
    pub deviation_from_identity: f64,
}

impl HolonomyElement {
    pub fn su2_defect(&self) -> f64 {
        self.metric_defect.max(self.form_defect).max(self.det_defect)
    }
}

/// `g`-orthonormal basis `(e₁, Je₁, e₃, Je₃)` at `x`, as matrix columns.
fn unitary_basis(g: &DMatrix<f64>, j: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let ip = |a: &DMatrix<f64>, b: &DMatrix<f64>| (a.transpose() * g * b)[(0, 0)];
    let mut e1 = DMatrix::zeros(4, 1);
    e1[(0, 0)] = 1.0;
    e1 /= ip(&e1, &e1).sqrt();
    let f1 = j * &e1;
    let mut e3 = DMatrix::zeros(4, 1);
    e3[(2, 0)] = 1.0;
    let (c1, c2) = (ip(&e3, &e1), ip(&e3, &f1));
    e3 -= &e1 * c1 + &f1 * c2;
    let nn = ip(&e3, &e3);
    if !(nn > 0.0) {
        return Err(GeomError::SingularMetric);
    }
    e3 /= nn.sqrt();
    let f3 = j * &e3;
    let mut b = DMatrix::zeros(4, 4);
    for (c, v) in [e1, f1, e3, f3].iter().enumerate() {
        b.set_column(c, &v.column(0));
    }
    Ok(b)
}

struct LoopHolonomy {
    element: HolonomyElement,
    complex: Matrix2<Complex64>,
    /// Transport in the unitary frame.
    frame: DMatrix<f64>,
}

fn loop_holonomy<C: Curve + ?Sized>(kp: WeightPair, x0: &[f64; 4], curve: &C, ode_tol: f64) -> Result<LoopHolonomy> {
    let gf = Metric2::new(kp);
    let t = transport(&gf, curve, ode_tol)?;
    let g = metric_at(&gf, x0)?;
    let j = complex_structure_at(kp, x0)?;
    let b = unitary_basis(&g, &j)?;
    let binv = b.clone().try_inverse().ok_or(GeomError::SingularMetric)?;
    let m = &binv * &t * &b;
    let id = DMatrix::<f64>::identity(4, 4);
    let om = Form::from_coeffs(4, 2, KahlerForm2::new(kp).eval::<f64>(x0)?).as_matrix();
    let om_frame = b.transpose() * om * &b;
    let c = |a: usize, bb: usize| Complex64::new(m[(2 * a, 2 * bb)], m[(2 * a + 1, 2 * bb)]);
    let complex = Matrix2::new(c(0, 0), c(0, 1), c(1, 0), c(1, 1));
    let element = HolonomyElement {
        metric_defect: (m.transpose() * &m - &id).amax(),
        form_defect: (m.transpose() * &om_frame * &m - &om_frame).amax(),
        det_defect: (complex.determinant() - 1.0).norm(),
        deviation_from_identity: (&m - &id).amax(),
        complex,
        transport: t,
    };
    Ok(LoopHolonomy { element, complex, frame: m })
}

/// Holonomy of a closed loop of the metric on `M_{k,l}`.
pub fn parallel_transport<C: Curve + ?Sized>(loop_: &C, kp: WeightPair, ode_tol: f64) -> Result<HolonomyElement> {
    let x0 = loop_.point(0.0);
    let x1 = loop_.point(1.0);
    let gap = x0.iter().zip(&x1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if gap > 1e-10 {
        return Err(GeomError::Config(format!("loop is not closed (gap {gap:.3e})")));
    }
    Ok(loop_holonomy(kp, &x0, loop_, ode_tol)?.element)
}

#[derive(Debug, Clone, Serialize)]
pub struct AxisHolonomy {
    /// Holonomy as a complex 2×2 matrix in the unitary basis `(e₁, Je₁, e₃, Je₃)`.
    #[serde(skip)]
    pub holonomy: Matrix2<Complex64>,
    pub order: u32,
    /// Distance of the holonomy spectrum from `{ω, ω̄}`, `ω = e^{2πi/order}`.
    pub deviation: f64,
    /// `‖Hᵒʳᵈᵉʳ − I‖` in the orthonormal frame.
    pub power_defect: f64,
    pub su2_defect: f64,
}

/// Holonomy of the loop generating the local group at a cone point of `M_{k,l}`.
///
/// The loop runs in `(ψ, φ)` by a lattice vector at fixed small `(ρ, θ)` near the
/// cone point (`θ = 0` for the `(z, α)` chart, `θ = π` for `(w, β)`). Since `(ψ, φ)`
/// are angles, the loop is closed and the coordinate frames at its ends coincide.
pub fn axis_holonomy(kp: WeightPair, chart: ChartId, rho: f64, dtheta: f64, ode_tol: f64) -> Result<AxisHolonomy> {
    let (order, theta, shift) = match chart {
        ChartId::ZChart => (kp.k(), dtheta, kp.z_cone_loop()),
        ChartId::WChart => (kp.l(), PI - dtheta, kp.w_cone_loop()),
    };
    if order == 1 {
        return Err(GeomError::NotSingular);
    }
    let from = [rho, theta, 0.2, 0.1];
    let to = [rho, theta, 0.2 + shift[0], 0.1 + shift[1]];
    let h = loop_holonomy(kp, &from, &LinePath { from, to }, ode_tol)?;
    let w = Complex64::from_polar(1.0, 2.0 * PI / order as f64);
    let tr = h.complex.trace();
    let det = h.complex.determinant();
    let disc = (tr * tr - det * 4.0).sqrt();
    let (e1, e2) = ((tr + disc) / 2.0, (tr - disc) / 2.0);
    let deviation = ((e1 - w).norm().max((e2 - w.conj()).norm())).min((e1 - w.conj()).norm().max((e2 - w).norm()));
    let m = &h.frame;
    let mut p = DMatrix::<f64>::identity(4, 4);
    for _ in 0..order {
        p = &p * m;
    }
    Ok(AxisHolonomy {
        holonomy: h.complex,
        order,
        deviation,
        power_defect: (p - DMatrix::<f64>::identity(4, 4)).amax(),
        su2_defect: h.element.su2_defect(),
    })
}

/// Holonomy suite for one weight pair: SU(2) membership of random loops, area scaling of the
/// deviation from the identity under halving, and (for `k, l > 1`) the cone-point generators.
pub fn holonomy_check(kp: WeightPair, n_loops: usize, seed: u64, ode_tol: f64, tol: f64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut loops = Vec::with_capacity(n_loops);
    for _ in 0..n_loops {
        let center = [rng.random_range(0.8..1.6), rng.random_range(0.8..2.2), rng.random_range(0.0..PI), 0.0];
        loops.push((center, LoopShape::random(&mut rng, 6)));
    }
    let rows: Vec<(f64, f64)> = loops
        .par_iter()
        .map(|(c, shape)| {
            let full = parallel_transport(&shape.spline(*c, LOOP_DIAMETER)?, kp, ode_tol)?;
            let half = parallel_transport(&shape.spline(*c, 0.5 * LOOP_DIAMETER)?, kp, ode_tol)?;
            let su2 = full.su2_defect().max(half.su2_defect());
            Ok((su2, full.deviation_from_identity / half.deviation_from_identity))
        })
        .collect::<Result<_>>()?;
    let (k, l) = (kp.k(), kp.l());
    let mut checks = vec![
        Check::le(format!("max_su2_defect[k={k},l={l}]"), rows.iter().map(|r| r.0).fold(0.0, f64::max), tol),
        Check::gt(
            format!("min_halving_ratio_deviation_from_identity[k={k},l={l}]"),
            rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min),
            3.0,
        ),
    ];
    for (chart, order) in [(ChartId::ZChart, k), (ChartId::WChart, l)] {
        if order > 1 {
            let h = axis_holonomy(kp, chart, AXIS_OFFSET, AXIS_OFFSET, ode_tol.min(1e-10))?;
            checks.push(Check::le(format!("cone_holonomy_deviation[{chart:?},order={order}]"), h.deviation, 1e-3));
            checks.push(Check::le(
                format!("cone_holonomy_power_defect[{chart:?},order={order}]"),
                h.power_defect,
                1e-3,
            ));
        }
    }
    Ok(checks)
}

/// Diameter of the random loops in `(ρ, θ, ψ, φ)`.
pub const LOOP_DIAMETER: f64 = 0.2;
/// `(ρ, θ)` offset of the cone-point loops.
const AXIS_OFFSET: f64 = 0.003;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_point_holonomy_is_the_group_generator() {
        let kp = WeightPair::new(2, 3).unwrap();
        let h = axis_holonomy(kp, ChartId::ZChart, 0.003, 0.003, 1e-10).unwrap();
        assert!(h.deviation < 1e-3 && h.power_defect < 1e-3, "{h:?}");
        let h = axis_holonomy(kp, ChartId::WChart, 0.003, 0.003, 1e-10).unwrap();
        assert_eq!(h.order, 3);
        assert!(h.deviation < 1e-3 && h.power_defect < 1e-3, "{h:?}");
        assert!(matches!(
            axis_holonomy(WeightPair::new(1, 2).unwrap(), ChartId::ZChart, 0.01, 0.01, 1e-8),
            Err(GeomError::NotSingular)
        ));
    }

    #[test]
    fn spline_interpolates_nodes_and_closes() {
        let nodes = vec![[0.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.5, 0.0], [1.0, 1.0, 0.0, 0.2], [0.0, 1.0, -0.5, 0.0]];
        let sp = PeriodicSpline::new(nodes.clone()).unwrap();
        for (i, n) in nodes.iter().enumerate() {
            let p = sp.point(i as f64 / 4.0);
            assert!(p.iter().zip(n).all(|(a, b)| (a - b).abs() < 1e-14));
        }
        let (a, b) = (sp.velocity(0.0), sp.velocity(1.0 - 1e-12));
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-8));
    }

    #[test]
    fn small_loop_is_in_su2() {
        let kp = WeightPair::new(1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let lp = random_loop(&mut rng, [1.0, 1.2, 0.0, 0.0], 0.2, 6).unwrap();
        let h = parallel_transport(&lp, kp, 1e-8).unwrap();
        assert!(h.metric_defect < 1e-7 && h.su2_defect() < 1e-7, "{h:?}");
        assert!(h.deviation_from_identity > 1e-5);
    }

    #[test]
    fn open_path_is_rejected() {
        let kp = WeightPair::new(1, 2).unwrap();
        let p = LinePath { from: [1.0, 1.0, 0.0, 0.0], to: [1.1, 1.0, 0.0, 0.0] };
        assert!(parallel_transport(&p, kp, 1e-8).is_err());
    }

    #[test]
    fn holonomy_suite_passes() {
        let checks = holonomy_check(WeightPair::new(2, 3).unwrap(), 10, 42, 1e-8, 1e-4).unwrap();
        assert_eq!(checks.len(), 6);
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
    }
}
