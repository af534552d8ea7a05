//! Constant-coefficient elliptic solves: diagonal inversions in Fourier space.

use crate::error::Error;
use crate::field::RealField;
use crate::ops;
use crate::Result;

/// Solve (a·I - b·Δ) x = rhs with a > 0, b >= 0.
///
/// The operator symbol a + b·k² is strictly positive on every mode, so the
/// inversion is exact up to roundoff.
pub fn solve_helmholtz(a: f64, b: f64, rhs: &RealField) -> Result<RealField> {
    if !(a > 0.0) {
        return Err(Error::SingularOperator(format!(
            "Helmholtz solve needs a > 0 (zero mode not invertible), got a = {a}"
        )));
    }
    if b < 0.0 {
        return Err(Error::SingularOperator(format!(
            "Helmholtz solve needs b >= 0, got b = {b}"
        )));
    }
    let grid = rhs.grid().clone();
    Ok(rhs
        .to_spectral()
        .scale_modes(|jx, jy| 1.0 / (a + b * grid.k_squared(jx, jy)))
        .to_physical())
}

/// Solve Δx = rhs on the periodic domain under the zero-mean gauge.
///
/// The zero mode of x is set to zero exactly; the rhs must be compatible,
/// i.e. have (numerically) zero mean. Modes where the derivative symbol
/// vanishes (the Nyquist corners) are also nulled.
pub fn solve_poisson_zero_mean(rhs: &RealField) -> Result<RealField> {
    let scale = rhs.max_abs();
    let m = ops::mean(rhs);
    if m.abs() > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::IncompatibleRhs {
            mean: m,
            limit: 1e-10 * scale,
        });
    }
    let grid = rhs.grid().clone();
    Ok(rhs
        .to_spectral()
        .scale_modes(|jx, jy| {
            let k2 = grid.k_squared(jx, jy);
            if k2 == 0.0 {
                0.0
            } else {
                -1.0 / k2
            }
        })
        .to_physical())
}
