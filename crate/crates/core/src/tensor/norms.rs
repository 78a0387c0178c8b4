//! Discrete sup and L² norms of coordinate partials over point grids.

use rayon::prelude::*;

use super::derivative::{partials_of_order, DerivativeScheme};
use super::field::Field;
use crate::error::Result;

/// Tensor-product grid with `n` points per axis on `[lo, hi]` (endpoints included).
pub fn box_grid(lo: &[f64], hi: &[f64], n: usize) -> Vec<Vec<f64>> {
    let d = lo.len();
    let axis = |a: usize, i: usize| {
        if n == 1 {
            0.5 * (lo[a] + hi[a])
        } else {
            lo[a] + (hi[a] - lo[a]) * i as f64 / (n - 1) as f64
        }
    };
    let total = n.pow(d as u32);
    (0..total)
        .map(|mut c| {
            let mut p = vec![0.0; d];
            for (a, slot) in p.iter_mut().enumerate() {
                *slot = axis(a, c % n);
                c /= n;
            }
            p
        })
        .collect()
}

/// Max over grid points of `|∂^order f|`, all multi-indices and components.
pub fn grid_sup_norm<F: Field>(f: &F, grid: &[Vec<f64>], order: usize, scheme: &DerivativeScheme) -> Result<f64> {
    let per: Vec<f64> = grid
        .par_iter()
        .map(|x| Ok(partials_of_order(f, x, order, scheme)?.iter().fold(0.0f64, |m, v| m.max(v.abs()))))
        .collect::<Result<_>>()?;
    Ok(per.into_iter().fold(0.0, f64::max))
}

/// Root-mean-square of the pointwise Euclidean norm of `∂^order f`.
pub fn grid_rms_norm<F: Field>(f: &F, grid: &[Vec<f64>], order: usize, scheme: &DerivativeScheme) -> Result<f64> {
    if grid.is_empty() {
        return Ok(0.0);
    }
    let per: Vec<f64> = grid
        .par_iter()
        .map(|x| Ok(partials_of_order(f, x, order, scheme)?.iter().map(|v| v * v).sum::<f64>()))
        .collect::<Result<_>>()?;
    Ok((per.iter().sum::<f64>() / grid.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    struct Square;
    impl Field for Square {
        fn input_dim(&self) -> usize {
            3
        }
        fn output_len(&self) -> usize {
            1
        }
        fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
            Ok(vec![x[0] * x[0]])
        }
    }

    struct Zero;
    impl Field for Zero {
        fn input_dim(&self) -> usize {
            2
        }
        fn output_len(&self) -> usize {
            1
        }
        fn eval<S: Scalar>(&self, _x: &[S]) -> Result<Vec<S>> {
            Ok(vec![S::zero()])
        }
    }

    #[test]
    fn square_gradient_sup_is_two() {
        let grid = box_grid(&[0.0; 3], &[1.0; 3], 5);
        let s = grid_sup_norm(&Square, &grid, 1, &DerivativeScheme::default()).unwrap();
        assert!((s - 2.0).abs() < 1e-9, "{s}");
    }

    #[test]
    fn zero_field_has_zero_norms() {
        let grid = box_grid(&[0.0; 2], &[1.0; 2], 4);
        for order in 0..3 {
            assert_eq!(grid_sup_norm(&Zero, &grid, order, &DerivativeScheme::default()).unwrap(), 0.0);
        }
    }
}
