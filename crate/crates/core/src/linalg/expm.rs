use super::{ComplexMatrix, ONE};
use crate::error::{Error, Result};

/// Norm each scaled matrix must satisfy before the series is summed.
const SCALED_NORM: f64 = 0.5;
/// Highest Taylor term kept.
const SERIES_ORDER: usize = 18;
/// Beyond this the squarings overflow f64 for any non-trivial spectrum.
const MAX_NORM: f64 = 700.0 * 64.0;

/// Matrix exponential by scaling and squaring a truncated Taylor series.
///
/// With ‖M/2ˢ‖ ≤ 0.5 the 18th-order remainder is below 0.5¹⁹/19! ≈ 2e-23,
/// so squaring error dominates and stays near machine precision for the
/// desk-scale norms this crate deals with.
pub fn matrix_exp(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    m.check_finite()?;
    let norm = m.norm_inf();
    if norm > MAX_NORM {
        return Err(Error::ExpOverflow { norm });
    }
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > SCALED_NORM {
        scaled_norm *= 0.5;
        squarings += 1;
    }
    let a = m.scale_real(0.5f64.powi(squarings as i32));

    // Horner: I + A(I + A/2(I + A/3(...)))
    let n = m.dim();
    let mut acc = ComplexMatrix::identity(n);
    for k in (1..=SERIES_ORDER).rev() {
        acc = (&a * &acc).scale_real(1.0 / k as f64).add_diag(ONE);
    }
    for _ in 0..squarings {
        acc = &acc * &acc;
    }
    if !acc.is_finite() {
        return Err(Error::ExpOverflow { norm });
    }
    Ok(acc)
}
