//! Spreading speeds `c*(ξ) = inf_{μ>0} λ(μ, ξ) / μ` from dispersion relations.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::dispersal::{DispersalKind, DispersalOp};
use crate::domain::{Direction, Reaction};
use crate::eigen::{
    assemble_cell_operator, lambda_closed_form, lambda_grid_symbol, principal_eigen,
    PeriodicCoefficient,
};
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Upper end of the μ scan.
pub const MU_MAX: f64 = 20.0;
/// Lower end of the μ scan.
pub const MU_MIN: f64 = 1e-3;
/// Number of log-spaced scan points.
pub const SCAN_POINTS: usize = 60;
/// Relative μ tolerance used by [`theoretical_speed`].
pub const SPEED_TOL: f64 = 1e-10;

type Evaluator<T> = Arc<dyn Fn(T) -> Result<T> + Send + Sync>;

/// The map `μ ↦ λ(μ, ξ)` for one dispersal kind and direction.
#[derive(Clone)]
pub struct DispersionRelation<T> {
    kind: DispersalKind,
    xi: Direction<T>,
    mu_max: T,
    evaluator: Evaluator<T>,
}

impl<T: Scalar> fmt::Debug for DispersionRelation<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DispersionRelation")
            .field("kind", &self.kind)
            .field("xi", &self.xi)
            .field("mu_max", &self.mu_max)
            .finish_non_exhaustive()
    }
}

impl<T: Scalar> DispersionRelation<T> {
    pub fn from_fn(
        kind: DispersalKind,
        xi: Direction<T>,
        f: impl Fn(T) -> Result<T> + Send + Sync + 'static,
    ) -> Self {
        Self {
            kind,
            xi,
            mu_max: T::lit(MU_MAX),
            evaluator: Arc::new(f),
        }
    }

    /// Constant-coefficient closed form at growth rate `r`.
    pub fn closed_form(op: &DispersalOp<T>, xi: Direction<T>, r: T) -> Self {
        let op = op.clone();
        let kind = op.kind();
        Self::from_fn(kind, xi, move |mu| Ok(lambda_closed_form(&op, mu, &xi, r)))
    }

    /// Constant-coefficient symbol of the grid discretization at growth rate `r`.
    pub fn grid_symbol(op: &DispersalOp<T>, xi: Direction<T>, r: T) -> Self {
        let op = op.clone();
        let kind = op.kind();
        Self::from_fn(kind, xi, move |mu| Ok(lambda_grid_symbol(&op, mu, &xi, r)))
    }

    /// Principal eigenvalue of the twisted periodic operator with coefficient
    /// `coefficient`, recomputed for every μ.
    pub fn eigen_backed(
        op: &DispersalOp<T>,
        xi: Direction<T>,
        coefficient: PeriodicCoefficient<T>,
        tolerance: T,
        max_iter: usize,
    ) -> Self {
        let op = op.clone();
        let kind = op.kind();
        Self::from_fn(kind, xi, move |mu| {
            let cell_op = assemble_cell_operator(&op, mu, &xi, &coefficient)?;
            Ok(principal_eigen(&cell_op, tolerance, max_iter)?.lambda)
        })
    }

    pub fn with_mu_max(mut self, mu_max: T) -> Self {
        self.mu_max = mu_max;
        self
    }

    pub fn kind(&self) -> DispersalKind {
        self.kind
    }

    pub fn direction(&self) -> &Direction<T> {
        &self.xi
    }

    pub fn mu_max(&self) -> T {
        self.mu_max
    }

    pub fn lambda(&self, mu: T) -> Result<T> {
        let v = (self.evaluator)(mu)?;
        if !v.is_finite() {
            return Err(invalid("dispersion relation", format!("non-finite value at mu = {mu}")));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedResult<T> {
    pub c_star: T,
    pub mu_star: T,
    pub bracket: [T; 2],
    pub evaluations: usize,
}

/// One row of a dispersion curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint<T> {
    pub mu: T,
    pub lambda: T,
    pub ratio: T,
}

/// `(μ, λ(μ), λ(μ)/μ)` at each requested μ.
pub fn speed_curve<T: Scalar>(rel: &DispersionRelation<T>, mus: &[T]) -> Result<Vec<CurvePoint<T>>> {
    mus.iter()
        .map(|&mu| {
            let lambda = rel.lambda(mu)?;
            Ok(CurvePoint {
                mu,
                lambda,
                ratio: lambda / mu,
            })
        })
        .collect()
}

/// `count` log-spaced points on `[lo, hi]`.
pub fn log_grid<T: Scalar>(lo: T, hi: T, count: usize) -> Vec<T> {
    let (a, b) = (lo.ln(), hi.ln());
    let last = T::from_usize_lossy(count.max(2) - 1);
    (0..count)
        .map(|k| (a + (b - a) * T::from_usize_lossy(k) / last).exp())
        .collect()
}

/// Minimizes `λ(μ)/μ` over `μ ∈ (0, μ_max]`.
///
/// A log-spaced scan brackets the minimizer, then golden-section search
/// shrinks the bracket to relative width `tol`. A scan minimum at either end of
/// the scan is refused.
pub fn minimize_speed<T: Scalar>(rel: &DispersionRelation<T>, tol: T) -> Result<SpeedResult<T>> {
    if !(tol > T::zero()) {
        return Err(invalid("tol", "must be positive"));
    }
    let lambda0 = rel.lambda(T::lit(1e-6))?;
    if !(lambda0 > T::zero()) {
        return Err(Error::StableZeroState {
            lambda: lambda0.to_f64_lossy(),
        });
    }
    let mut evaluations = 1;
    let ratio = |mu: T, evals: &mut usize| -> Result<T> {
        *evals += 1;
        Ok(rel.lambda(mu)? / mu)
    };

    let grid = log_grid(T::lit(MU_MIN), rel.mu_max(), SCAN_POINTS);
    let mut best = (T::infinity(), 0usize);
    for (k, &mu) in grid.iter().enumerate() {
        let g = ratio(mu, &mut evaluations)?;
        if g < best.0 {
            best = (g, k);
        }
    }
    let k = best.1;
    if k == 0 || k + 1 == grid.len() {
        return Err(Error::BracketEdge {
            mu: grid[k].to_f64_lossy(),
        });
    }
    let bracket = [grid[k - 1], grid[k + 1]];

    let inv_phi = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let (mut a, mut b) = (bracket[0], bracket[1]);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = ratio(x1, &mut evaluations)?;
    let mut f2 = ratio(x2, &mut evaluations)?;
    let mut best_pt = (best.0, grid[k]);
    for _ in 0..200 {
        if b - a <= tol * T::lit(0.5) * (a + b) {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = ratio(x1, &mut evaluations)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = ratio(x2, &mut evaluations)?;
        }
    }
    for (f, x) in [(f1, x1), (f2, x2)] {
        if f < best_pt.0 {
            best_pt = (f, x);
        }
    }
    Ok(SpeedResult {
        c_star: best_pt.0,
        mu_star: best_pt.1,
        bracket,
        evaluations,
    })
}

/// Spreading speed of the limit equation linearized at zero: the closed-form
/// relation at `r = f0(0)`. The localized perturbation does not enter.
pub fn theoretical_speed<T: Scalar>(
    op: &DispersalOp<T>,
    reaction: &Reaction<T>,
    xi: &Direction<T>,
) -> Result<SpeedResult<T>> {
    let rel = DispersionRelation::closed_form(op, *xi, reaction.base_rate());
    minimize_speed(&rel, T::lit(SPEED_TOL))
}

/// Smallest and largest theoretical speed over the sampled directions of `dim`.
pub fn speed_range<T: Scalar>(
    op: &DispersalOp<T>,
    reaction: &Reaction<T>,
    dim: usize,
    directions: usize,
) -> Result<(T, T)> {
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for xi in Direction::sphere_sample(dim, directions) {
        let c = theoretical_speed(op, reaction, &xi)?.c_star;
        lo = lo.min(c);
        hi = hi.max(c);
    }
    Ok((lo, hi))
}
