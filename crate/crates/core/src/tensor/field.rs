use crate::error::Result;
use crate::scalar::Scalar;

/// A closed-form map `R^n -> R^m`, evaluable on any [`Scalar`].
pub trait Field: Sync {
    fn input_dim(&self) -> usize;
    fn output_len(&self) -> usize;
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>>;

    /// Characteristic length near `x`; finite-difference steps are multiplied by it.
    fn length_scale(&self, _x: &[f64]) -> f64 {
        1.0
    }

    /// Whether `eval` propagates [`HyperDual`](crate::scalar::HyperDual) derivatives.
    fn ad_capable(&self) -> bool {
        true
    }
}

/// A symmetric `dim × dim` coefficient field, stored row-major as the field output.
pub trait MetricField: Field {
    fn dim(&self) -> usize {
        self.input_dim()
    }
    fn in_domain(&self, _x: &[f64]) -> bool {
        true
    }
}

/// A degree-`p` form whose output is the coefficient vector in lexicographic
/// order of strictly increasing multi-indices.
pub trait FormField: Field {
    fn degree(&self) -> usize;
    fn dim(&self) -> usize {
        self.input_dim()
    }
}

impl<F: Field + ?Sized> Field for &F {
    fn input_dim(&self) -> usize {
        (**self).input_dim()
    }
    fn output_len(&self) -> usize {
        (**self).output_len()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        (**self).eval(x)
    }
    fn length_scale(&self, x: &[f64]) -> f64 {
        (**self).length_scale(x)
    }
    fn ad_capable(&self) -> bool {
        (**self).ad_capable()
    }
}

impl<F: MetricField + ?Sized> MetricField for &F {
    fn in_domain(&self, x: &[f64]) -> bool {
        (**self).in_domain(x)
    }
}

impl<F: FormField + ?Sized> FormField for &F {
    fn degree(&self) -> usize {
        (**self).degree()
    }
}

/// Euclidean metric on `R^n`.
#[derive(Debug, Clone, Copy)]
pub struct Euclidean(pub usize);

impl Field for Euclidean {
    fn input_dim(&self) -> usize {
        self.0
    }
    fn output_len(&self) -> usize {
        self.0 * self.0
    }
    fn eval<S: Scalar>(&self, _x: &[S]) -> Result<Vec<S>> {
        let n = self.0;
        let mut g = vec![S::zero(); n * n];
        for i in 0..n {
            g[i * n + i] = S::one();
        }
        Ok(g)
    }
}
impl MetricField for Euclidean {}

/// Round sphere of the given radius in `(θ, φ)`.
#[derive(Debug, Clone, Copy)]
pub struct RoundSphere {
    pub radius: f64,
}

impl Field for RoundSphere {
    fn input_dim(&self) -> usize {
        2
    }
    fn output_len(&self) -> usize {
        4
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        let r2 = self.radius * self.radius;
        let s = x[0].sin();
        Ok(vec![S::cst(r2), S::zero(), S::zero(), s * s * r2])
    }
}
impl MetricField for RoundSphere {
    fn in_domain(&self, x: &[f64]) -> bool {
        x[0].sin().abs() > 1e-6
    }
}

/// A field given by an `f64`-only closure; derivatives must use finite differences.
pub struct Sampled<F> {
    pub input_dim: usize,
    pub output_len: usize,
    pub f: F,
}

impl<F> Sampled<F>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    pub fn new(input_dim: usize, output_len: usize, f: F) -> Self {
        Self { input_dim, output_len, f }
    }
}

impl<F> Field for Sampled<F>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    fn input_dim(&self) -> usize {
        self.input_dim
    }
    fn output_len(&self) -> usize {
        self.output_len
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        let xr: Vec<f64> = x.iter().map(|v| v.re()).collect();
        Ok((self.f)(&xr)?.into_iter().map(S::cst).collect())
    }
    fn ad_capable(&self) -> bool {
        false
    }
}
