//! Numerical engine for metrics and differential forms on coordinate charts.

pub mod curvature;
pub mod derivative;
pub mod field;
pub mod forms;
pub mod norms;

pub use curvature::{christoffel, curvature, metric_at, orthonormal_frame, Christoffel, Curvature};
pub use derivative::{jacobian, jet, partials_of_order, DerivativeScheme, Jet, Method};
pub use field::{Euclidean, Field, FormField, MetricField, RoundSphere, Sampled};
pub use forms::Form;
pub use norms::{box_grid, grid_rms_norm, grid_sup_norm};

use crate::error::Result;

/// Pointwise value of a form field.
pub fn form_at<F: FormField + ?Sized>(f: &F, x: &[f64]) -> Result<Form> {
    Ok(Form::from_coeffs(f.dim(), f.degree(), f.eval::<f64>(x)?))
}

/// Exterior derivative of a form field at `x`.
pub fn exterior_derivative<F: FormField + ?Sized>(f: &F, x: &[f64], scheme: &DerivativeScheme) -> Result<Form> {
    let jac = jacobian(f, x, scheme)?;
    Ok(Form::exterior_from_jacobian(f.dim(), f.degree(), &jac))
}

/// Hodge star of a form field at `x` with respect to a metric field.
pub fn hodge_star<F: FormField + ?Sized, G: MetricField + ?Sized>(
    f: &F,
    g: &G,
    x: &[f64],
    orientation: f64,
) -> Result<Form> {
    form_at(f, x)?.hodge_star(&metric_at(g, x)?, orientation)
}
