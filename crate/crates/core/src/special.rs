//! Gaussian tail function and its inverse, backed by `statrs`' error functions.

use statrs::function::erf;

use crate::error::{Error, Result};
use crate::Scalar;

/// `Q(x) = P[N(0,1) > x]`.
pub fn q_function<T: Scalar>(x: T) -> T {
    T::lit(0.5 * erf::erfc(x.as_f64() / std::f64::consts::SQRT_2))
}

/// Inverse of [`q_function`] on `(0, 1)`.
pub fn q_inverse<T: Scalar>(eps: T) -> Result<T> {
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::domain(format!("Q^-1 needs 0 < eps < 1, got {eps}")));
    }
    Ok(T::lit(std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * eps.as_f64())))
}
