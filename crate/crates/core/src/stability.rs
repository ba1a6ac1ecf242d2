//! Linearisation at the origin.

use alloc::vec;
use alloc::vec::Vec;

use crate::diff::differentiate;
use crate::expr::{DomainError, System};
use crate::linalg::{eigenvalues, Mat};

/// Jacobian of `f` at the origin.
pub fn jacobian_at_origin(sys: &System) -> Result<Mat, DomainError> {
    let n = sys.dim();
    let zero = vec![0.0; n];
    let mut j = Mat::zeros(n, n);
    for (i, fi) in sys.equations.iter().enumerate() {
        for k in 0..n {
            let v = differentiate(fi, k).eval(&zero)?;
            if !v.is_finite() {
                return Err(DomainError::NonFinite);
            }
            j[(i, k)] = v;
        }
    }
    Ok(j)
}

/// Eigenvalues of the Jacobian at the origin as `(re, im)` pairs.
pub fn linear_spectrum(sys: &System) -> Result<Vec<(f64, f64)>, DomainError> {
    eigenvalues(&jacobian_at_origin(sys)?).ok_or(DomainError::NonFinite)
}

/// Largest real part of the Jacobian eigenvalues at the origin.
pub fn spectral_abscissa(sys: &System) -> Result<f64, DomainError> {
    Ok(linear_spectrum(sys)?
        .into_iter()
        .map(|(re, _)| re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Systems with abscissa above `tol` are locally exponentially unstable.
pub const WILD_TOLERANCE: f64 = 1e-9;

pub fn passes_wild_filter(sys: &System) -> bool {
    matches!(spectral_abscissa(sys), Ok(a) if a <= WILD_TOLERANCE)
}
