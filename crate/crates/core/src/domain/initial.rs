//! Initial data families used by the spreading experiments.

use crate::domain::field::Field;
use crate::domain::habitat::{Direction, Habitat};
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// `1` for `s <= 0`, linear down to `0` at `s = 1`, `0` beyond.
fn unit_ramp<T: Scalar>(s: T) -> T {
    (T::one() - s).max(T::zero()).min(T::one())
}

/// Front-like data: `σ0` for `x·ξ <= 0`, a linear ramp to zero on
/// `0 <= x·ξ <= 1`, and zero beyond.
pub fn make_front_initial<T: Scalar>(
    habitat: &Habitat<T>,
    xi: &Direction<T>,
    sigma0: T,
) -> Result<Field<T>> {
    if !(sigma0 > T::zero()) {
        return Err(invalid("sigma0", "front height must be positive"));
    }
    habitat.check_direction(xi)?;
    Ok(Field::from_fn(*habitat, |x| sigma0 * unit_ramp(xi.dot(&x))))
}

/// Plateau `σ` on the ball `|x| <= r`, ramping linearly to zero at `|x| = r + 1`.
pub fn make_compact_initial<T: Scalar>(habitat: &Habitat<T>, r: T, sigma: T) -> Result<Field<T>> {
    if !(r > T::zero()) || !(sigma > T::zero()) {
        return Err(invalid("initial", "radius and height must be positive"));
    }
    if r + T::one() >= habitat.half_extent() {
        return Err(Error::DomainTooSmall(format!(
            "plateau radius {r} + 1 does not fit in half extent {}",
            habitat.half_extent()
        )));
    }
    Ok(Field::from_fn(*habitat, |x| {
        let d = (x[0] * x[0] + x[1] * x[1]).sqrt();
        sigma * unit_ramp(d - r)
    }))
}

/// Plateau `σ` on the strip `|x·ξ| <= r`, ramping linearly to zero at
/// `|x·ξ| = r + 1`.
pub fn make_strip_initial<T: Scalar>(
    habitat: &Habitat<T>,
    xi: &Direction<T>,
    r: T,
    sigma: T,
) -> Result<Field<T>> {
    if !(r > T::zero()) || !(sigma > T::zero()) {
        return Err(invalid("initial", "half width and height must be positive"));
    }
    habitat.check_direction(xi)?;
    if r + T::one() >= habitat.extent_along(xi) {
        return Err(Error::DomainTooSmall(format!(
            "strip half width {r} + 1 does not fit in the habitat"
        )));
    }
    Ok(Field::from_fn(*habitat, |x| sigma * unit_ramp(xi.dot(&x).abs() - r)))
}
