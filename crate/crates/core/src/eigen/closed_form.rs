use crate::dispersal::DispersalOp;
use crate::domain::Direction;
use crate::scalar::Scalar;

fn lattice_symbol<T: Scalar>(
    w: &crate::domain::LatticeWeights<T>,
    mu: T,
    xi: &Direction<T>,
) -> T {
    let c = xi.components();
    w.offsets()
        .map(|(axis, step, a)| a * ((-mu * T::from_isize(step).unwrap() * c[axis]).exp() - T::one()))
        .sum()
}

/// Principal eigenvalue of the twisted operator with constant coefficient `r`:
///
/// * random: `r + μ²`;
/// * nonlocal: `∫ e^{-μ z·ξ} κ(z) dz - 1 + r`, the moment taken by quadrature at
///   four times the kernel's resolution;
/// * discrete: `Σ_k a_k (e^{-μ k·ξ} - 1) + r`.
pub fn lambda_closed_form<T: Scalar>(op: &DispersalOp<T>, mu: T, xi: &Direction<T>, r: T) -> T {
    match op {
        DispersalOp::Random => r + mu * mu,
        DispersalOp::Nonlocal(k) => k.moment(mu, xi) - T::one() + r,
        DispersalOp::Discrete(w) => lattice_symbol(w, mu, xi) + r,
    }
}

/// Same as [`lambda_closed_form`] but with the nonlocal moment taken on the
/// kernel's own grid, i.e. the exact constant-coefficient eigenvalue of the
/// assembled cell operator.
pub fn lambda_grid_symbol<T: Scalar>(op: &DispersalOp<T>, mu: T, xi: &Direction<T>, r: T) -> T {
    match op {
        DispersalOp::Nonlocal(k) => k.grid_moment(mu, xi) - T::one() + r,
        _ => lambda_closed_form(op, mu, xi, r),
    }
}
