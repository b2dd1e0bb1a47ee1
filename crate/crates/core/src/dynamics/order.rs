//! Order-structure diagnostics: comparison, part metric and exponential
//! super-solutions.

use serde::Serialize;

use crate::dispersal::DispersalOp;
use crate::domain::{Direction, Field, Reaction};
use crate::dynamics::integrate::{evolve, EvolveOptions, Trajectory};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Allowed ordering violation between two solutions.
pub const COMPARISON_TOL: f64 = 5e-10;
/// Allowed increase of the part metric between consecutive records.
pub const PART_METRIC_SLACK: f64 = 1e-8;
/// Relative slack for exponential super-solution bounds.
pub const SUPERSOLUTION_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonReport<T> {
    /// `max_t max_x (u1 - u2)^+`.
    pub violation: T,
    pub passes: bool,
    /// `u2 - u1` at the origin at the first record with `t >= 1`, if any.
    pub strict_gap: Option<T>,
}

fn check_same_sampling<T: Scalar>(a: &Trajectory<T>, b: &Trajectory<T>) -> Result<()> {
    if a.habitat != b.habitat || a.times.len() != b.times.len() {
        return Err(Error::MismatchedSampling);
    }
    let tol = T::lit(1e-12);
    if a.times.iter().zip(&b.times).any(|(&s, &t)| (s - t).abs() > tol * (T::one() + t.abs())) {
        return Err(Error::MismatchedSampling);
    }
    Ok(())
}

/// Measures how far `traj1` rises above `traj2` over all records.
pub fn check_comparison<T: Scalar>(
    traj1: &Trajectory<T>,
    traj2: &Trajectory<T>,
) -> Result<ComparisonReport<T>> {
    check_same_sampling(traj1, traj2)?;
    let mut violation = T::zero();
    for (a, b) in traj1.snapshots.iter().zip(&traj2.snapshots) {
        for (&x, &y) in a.values().iter().zip(b.values()) {
            violation = violation.max(x - y);
        }
    }
    let strict_gap = traj1
        .times
        .iter()
        .position(|&t| t >= T::one())
        .map(|k| traj2.snapshots[k].at_origin() - traj1.snapshots[k].at_origin());
    Ok(ComparisonReport {
        violation,
        passes: violation <= T::lit(COMPARISON_TOL),
        strict_gap,
    })
}

/// `ρ(u, v) = max_x |ln u(x) - ln v(x)| = inf{ln α : u/α <= v <= α u}`.
pub fn part_metric<T: Scalar>(u: &Field<T>, v: &Field<T>) -> Result<T> {
    u.check_same_habitat(v)?;
    for f in [u, v] {
        if !f.is_strictly_positive() {
            return Err(Error::NonPositive {
                min: f.min().to_f64_lossy(),
            });
        }
    }
    Ok(u.values()
        .iter()
        .zip(v.values())
        .map(|(&a, &b)| (a.ln() - b.ln()).abs())
        .fold(T::zero(), T::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartMetricDecayReport<T> {
    pub times: Vec<T>,
    pub values: Vec<T>,
    /// Largest increase between consecutive records.
    pub worst_increase: T,
    /// Record indices `k` with `ρ_k > ρ_{k-1} + slack`.
    pub violations: Vec<usize>,
    pub passes: bool,
}

/// Evolves `u0` and `v0` side by side and checks that their part-metric
/// distance never grows.
pub fn check_part_metric_decay<T: Scalar>(
    op: &DispersalOp<T>,
    reaction: &Reaction<T>,
    u0: &Field<T>,
    v0: &Field<T>,
    opts: &EvolveOptions<T>,
) -> Result<PartMetricDecayReport<T>> {
    part_metric(u0, v0)?;
    let a = evolve(op, reaction, u0, opts)?;
    let b = evolve(op, reaction, v0, opts)?;
    let values = a
        .snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(x, y)| part_metric(x, y))
        .collect::<Result<Vec<_>>>()?;
    let slack = T::lit(PART_METRIC_SLACK);
    let mut worst = T::neg_infinity();
    let mut violations = Vec::new();
    for k in 1..values.len() {
        let inc = values[k] - values[k - 1];
        worst = worst.max(inc);
        if inc > slack {
            violations.push(k);
        }
    }
    Ok(PartMetricDecayReport {
        times: a.times,
        passes: violations.is_empty(),
        values,
        worst_increase: if worst.is_finite() { worst } else { T::zero() },
        violations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupersolutionReport<T> {
    /// `max_{t,x} u(t,x) - d e^{-μ(x·ξ - c t)}`.
    pub max_excess: T,
    pub passes: bool,
}

/// Compares a trajectory against the travelling exponential `d e^{-μ(x·ξ - c t)}`.
///
/// Initial data above the exponential is an input error, not a failed bound.
pub fn check_exponential_supersolution<T: Scalar>(
    traj: &Trajectory<T>,
    d: T,
    mu: T,
    c: T,
    xi: &Direction<T>,
) -> Result<SupersolutionReport<T>> {
    traj.habitat.check_direction(xi)?;
    let hab = traj.habitat;
    let bar = |t: T, idx: usize| d * (-mu * (xi.dot(&hab.coords(idx)) - c * t)).exp();
    let u0 = traj.initial();
    for (idx, &v) in u0.values().iter().enumerate() {
        if v > bar(T::zero(), idx) {
            return Err(Error::Precondition(format!(
                "initial data exceeds d·exp(-μ x·ξ) at index {idx}"
            )));
        }
    }
    let mut max_excess = T::neg_infinity();
    for (&t, snap) in traj.times.iter().zip(&traj.snapshots) {
        for (idx, &v) in snap.values().iter().enumerate() {
            max_excess = max_excess.max(v - bar(t, idx));
        }
    }
    Ok(SupersolutionReport {
        max_excess,
        passes: max_excess <= T::lit(SUPERSOLUTION_REL_TOL) * d,
    })
}
