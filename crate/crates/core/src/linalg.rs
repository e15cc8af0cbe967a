use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Solves `(I - gamma * K^T) xi = (1 - gamma) e_start` for a row-stochastic
/// `n x n` kernel `K` given in row-major order.
///
/// `xi` is the discounted state-visitation distribution of the chain driven by
/// `K` and started at `start`.
pub(crate) fn discounted_visitation(
    kernel: &[f64],
    n: usize,
    gamma: f64,
    start: usize,
) -> Result<Vec<f64>> {
    debug_assert_eq!(kernel.len(), n * n);
    let system = DMatrix::from_fn(n, n, |i, j| {
        let identity = if i == j { 1.0 } else { 0.0 };
        identity - gamma * kernel[j * n + i]
    });
    let mut rhs = DVector::zeros(n);
    rhs[start] = 1.0 - gamma;
    let xi = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("singular occupancy system".into()))?;
    if xi.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite occupancy solution".into()));
    }
    Ok(xi.iter().copied().collect())
}
