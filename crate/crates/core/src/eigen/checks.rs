use serde::Serialize;

use crate::dispersal::DispersalOp;
use crate::domain::{Direction, Kernel};
use crate::eigen::cell::{assemble_cell_operator, PeriodicCoefficient};
use crate::eigen::closed_form::lambda_grid_symbol;
use crate::eigen::solver::principal_eigen;
use crate::error::Result;
use crate::scalar::Scalar;

/// Number of sampled directions for the half-mass infimum in 2-D.
pub const HALF_MASS_DIRECTIONS: usize = 64;
/// Slack in the averaged-coefficient lower bound.
pub const AVERAGE_BOUND_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeExistenceReport<T> {
    /// `max a - min a < threshold`.
    pub condition2_ok: bool,
    /// Oscillation `max a - min a`.
    pub gap: T,
    /// `inf_ξ ∫_{z·ξ <= 0} κ(z) dz` over the sampled directions.
    pub threshold: T,
}

/// Sufficient condition for a nonlocal principal eigenvalue: the oscillation
/// of `a` stays below the smallest half-space mass of the kernel.
pub fn check_pe_existence<T: Scalar>(
    a: &PeriodicCoefficient<T>,
    kernel: &Kernel<T>,
) -> PeExistenceReport<T> {
    let threshold = Direction::sphere_sample(kernel.dim(), HALF_MASS_DIRECTIONS)
        .iter()
        .map(|xi| kernel.half_mass(xi))
        .fold(T::infinity(), T::min);
    let gap = a.oscillation();
    PeExistenceReport {
        condition2_ok: gap < threshold,
        gap,
        threshold,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AverageBoundReport<T> {
    /// Principal eigenvalue with the periodic coefficient.
    pub lambda: T,
    /// Constant-coefficient eigenvalue at the cell average.
    pub lambda_average: T,
    pub average: T,
    pub holds: bool,
}

/// Checks `λ(μ, ξ, a) >= λ(μ, ξ, â) - slack`.
///
/// The right-hand side is the constant-coefficient eigenvalue of the same
/// discretization, so that quadrature error in the kernel moment does not
/// enter the comparison.
pub fn check_average_lower_bound<T: Scalar>(
    op: &DispersalOp<T>,
    mu: T,
    xi: &Direction<T>,
    a: &PeriodicCoefficient<T>,
    tolerance: T,
    max_iter: usize,
) -> Result<AverageBoundReport<T>> {
    let cell_op = assemble_cell_operator(op, mu, xi, a)?;
    let eig = principal_eigen(&cell_op, tolerance, max_iter)?;
    let average = a.average();
    let lambda_average = lambda_grid_symbol(op, mu, xi, average);
    Ok(AverageBoundReport {
        lambda: eig.lambda,
        lambda_average,
        average,
        holds: eig.lambda >= lambda_average - T::lit(AVERAGE_BOUND_SLACK),
    })
}
