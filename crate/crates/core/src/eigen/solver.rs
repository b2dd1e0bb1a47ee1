use serde::Serialize;

use crate::eigen::cell::{CellField, CellOperator};
use crate::eigen::lu::DenseLu;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default residual tolerance for principal eigenpairs.
pub const EIGEN_TOL: f64 = 1e-10;
/// Default iteration cap.
pub const EIGEN_MAX_ITER: usize = 50_000;
/// Largest cell handled by the dense resolvent iteration.
pub const MAX_DENSE_POINTS: usize = 4096;
/// Power-iteration budget for bounded operators before switching to the
/// resolvent on cells small enough to factor.
pub const POWER_ITER_BUDGET: usize = 5_000;

/// Principal eigenpair of a cell operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult<T> {
    pub lambda: T,
    /// Positive eigenfunction normalized to maximum 1.
    pub eigenfunction: CellField<T>,
    /// `max |A φ - λ φ|`.
    pub residual: T,
    pub iterations: usize,
}

struct Estimate<T> {
    lambda: T,
    residual: T,
    cw_min: T,
    cw_max: T,
}

/// Rayleigh-quotient estimate, residual and Collatz–Wielandt bounds for a
/// positive vector `x` with `ax = A x`.
fn estimate<T: Scalar>(x: &[T], ax: &[T]) -> Estimate<T> {
    let num: T = x.iter().zip(ax).map(|(&a, &b)| a * b).sum();
    let den: T = x.iter().map(|&a| a * a).sum();
    let lambda = num / den;
    let mut residual = T::zero();
    let mut cw_min = T::infinity();
    let mut cw_max = T::neg_infinity();
    for (&xi, &yi) in x.iter().zip(ax) {
        residual = residual.max((yi - lambda * xi).abs());
        if xi > T::zero() {
            let r = yi / xi;
            cw_min = cw_min.min(r);
            cw_max = cw_max.max(r);
        }
    }
    Estimate {
        lambda,
        residual,
        cw_min,
        cw_max,
    }
}

fn normalize_max<T: Scalar>(x: &mut [T]) {
    let m = x.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    if m > T::zero() {
        for v in x.iter_mut() {
            *v /= m;
        }
    }
}

fn finish<T: Scalar>(
    op: &CellOperator<T>,
    x: Vec<T>,
    est: Estimate<T>,
    iterations: usize,
) -> Result<EigenResult<T>> {
    let min = x.iter().copied().fold(T::infinity(), T::min);
    if !(min > T::zero()) {
        return Err(Error::PerronViolation {
            min: min.to_f64_lossy(),
        });
    }
    Ok(EigenResult {
        lambda: est.lambda,
        eigenfunction: CellField::new(*op.cell(), x)?,
        residual: est.residual,
        iterations,
    })
}

/// Principal eigenvalue and positive eigenfunction of `op`, converged once
/// `max |A φ - λ φ| <= tolerance (1 + |λ|)`.
///
/// Bounded operators (nonlocal, discrete) use power iteration on `A + s I`,
/// whose entries are nonnegative with a positive diagonal, starting from the
/// constant vector. The differential operator iterates the resolvent
/// `(σ I - A)^{-1}` instead, with `σ` kept above the Collatz–Wielandt upper
/// bound so that the resolvent stays entrywise positive; a fixed positive
/// shift would have to grow like `h^-2` and stall the iteration. On large
/// cells the spectral gap of a bounded operator is small too, so power
/// iteration that has not converged within [`POWER_ITER_BUDGET`] steps hands
/// over to the resolvent when the cell has at most [`MAX_DENSE_POINTS`] points.
pub fn principal_eigen<T: Scalar>(
    op: &CellOperator<T>,
    tolerance: T,
    max_iter: usize,
) -> Result<EigenResult<T>> {
    if !(tolerance > T::zero()) {
        return Err(crate::error::invalid("tolerance", "must be positive"));
    }
    if op.is_differential() {
        resolvent_iteration(op, tolerance, max_iter)
    } else if op.len() <= MAX_DENSE_POINTS && max_iter > POWER_ITER_BUDGET {
        match shifted_power_iteration(op, tolerance, POWER_ITER_BUDGET) {
            Err(Error::EigenNotConverged { .. }) => resolvent_iteration(op, tolerance, max_iter),
            other => other,
        }
    } else {
        shifted_power_iteration(op, tolerance, max_iter)
    }
}

fn shifted_power_iteration<T: Scalar>(
    op: &CellOperator<T>,
    tolerance: T,
    max_iter: usize,
) -> Result<EigenResult<T>> {
    let n = op.len();
    let s = op.shift();
    let mut x = vec![T::one(); n];
    let mut ax = vec![T::zero(); n];
    let mut last = T::infinity();
    for it in 0..=max_iter {
        op.apply_into(&x, &mut ax);
        let est = estimate(&x, &ax);
        if !est.residual.is_finite() {
            break;
        }
        last = est.residual;
        if est.residual <= tolerance * (T::one() + est.lambda.abs()) {
            return finish(op, x, est, it);
        }
        for (v, &a) in x.iter_mut().zip(&ax) {
            *v = a + s * *v;
        }
        normalize_max(&mut x);
    }
    Err(Error::EigenNotConverged {
        iterations: max_iter,
        residual: last.to_f64_lossy(),
    })
}

fn shifted_resolvent<T: Scalar>(dense: &[T], n: usize, sigma: T) -> Result<DenseLu<T>> {
    let mut m: Vec<T> = dense.iter().map(|&a| -a).collect();
    for i in 0..n {
        m[i * n + i] += sigma;
    }
    DenseLu::factor(m, n).ok_or(Error::EigenNotConverged {
        iterations: 0,
        residual: f64::NAN,
    })
}

fn resolvent_iteration<T: Scalar>(
    op: &CellOperator<T>,
    tolerance: T,
    max_iter: usize,
) -> Result<EigenResult<T>> {
    let n = op.len();
    if n > MAX_DENSE_POINTS {
        return Err(Error::InvalidCell(format!(
            "{n} cell points exceed the dense resolvent limit of {MAX_DENSE_POINTS}"
        )));
    }
    let dense = op.to_dense();
    let mut sigma = op.max_row_sum() + T::one();
    let mut lu = shifted_resolvent(&dense, n, sigma)?;
    let mut x = vec![T::one(); n];
    let mut ax = vec![T::zero(); n];
    let mut last = T::infinity();
    for it in 0..=max_iter {
        op.apply_into(&x, &mut ax);
        let est = estimate(&x, &ax);
        if !est.residual.is_finite() {
            break;
        }
        last = est.residual;
        if est.residual <= tolerance * (T::one() + est.lambda.abs()) {
            return finish(op, x, est, it);
        }
        if it % 8 == 7 && x.iter().all(|&v| v > T::zero()) {
            // Move σ toward λ while staying strictly above the upper bound.
            let spread = (est.cw_max - est.cw_min).max(T::lit(1e-9) * (T::one() + est.cw_max.abs()));
            let target = est.cw_max + spread;
            if target < sigma - T::lit(0.25) * (sigma - est.cw_max) {
                sigma = target;
                lu = shifted_resolvent(&dense, n, sigma)?;
            }
        }
        x = lu.solve(&x);
        normalize_max(&mut x);
    }
    Err(Error::EigenNotConverged {
        iterations: max_iter,
        residual: last.to_f64_lossy(),
    })
}
