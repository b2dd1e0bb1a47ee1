use serde::Serialize;

use crate::domain::{Direction, Field};
use crate::dynamics::Trajectory;
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Fraction of the horizon, counted from the end, over which the asymptotic
/// cone statements are checked.
pub const FINAL_WINDOW: f64 = 0.25;
pub const DEFAULT_MARGIN: f64 = 0.2;
/// Inside the persistence cone `u` must stay above this fraction of `u0`.
pub const INSIDE_FLOOR: f64 = 0.5;
/// Outside the extinction cone `u` must stay below this fraction of `u0`.
pub const OUTSIDE_CEILING: f64 = 0.01;
/// Allowed `|u - u*|` inside the convergence region, as a fraction of `u0`.
pub const CONVERGENCE_TOL: f64 = 0.05;

/// Indices of the recorded times in the final window.
pub(crate) fn final_indices<T: Scalar>(traj: &Trajectory<T>) -> Vec<usize> {
    let t_end = traj.final_time();
    let start = (T::one() - T::lit(FINAL_WINDOW)) * t_end;
    (0..traj.len())
        .filter(|&k| traj.times[k] >= start - T::lit(1e-9) && traj.times[k] > T::zero())
        .collect()
}

/// Finite-horizon surrogate of the two spreading-speed cones along `ξ`.
///
/// A cone that contains no grid point at the final times cannot be verified
/// and counts as not passing; when both are empty the check is an error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeVerdict<T> {
    pub c: T,
    pub margin: T,
    /// Smallest `u` with `x·ξ <= (1 - margin) c t` over the final window.
    pub inside_min: Option<T>,
    /// Largest `u` with `x·ξ >= (1 + margin) c t` over the final window.
    pub outside_max: Option<T>,
    pub inside_ok: bool,
    pub outside_ok: bool,
    pub times_checked: usize,
}

impl<T: Scalar> ConeVerdict<T> {
    pub fn passes(&self) -> bool {
        self.inside_ok && self.outside_ok
    }
}

/// Checks persistence behind `(1 - margin) c t` and extinction ahead of
/// `(1 + margin) c t` at every recorded time of the final window.
pub fn check_front_cones<T: Scalar>(
    traj: &Trajectory<T>,
    xi: &Direction<T>,
    c: T,
    margin: T,
    u0_star: T,
) -> Result<ConeVerdict<T>> {
    traj.habitat.check_direction(xi)?;
    if !(c > T::zero()) || !(margin >= T::zero() && margin < T::one()) {
        return Err(invalid("cone", "need c > 0 and margin in [0, 1)"));
    }
    let idx = final_indices(traj);
    let hab = &traj.habitat;
    let mut inside_min = T::infinity();
    let mut outside_max = T::neg_infinity();
    let (mut seen_in, mut seen_out) = (false, false);
    for &k in &idx {
        let t = traj.times[k];
        let lo = (T::one() - margin) * c * t;
        let hi = (T::one() + margin) * c * t;
        for (i, &v) in traj.snapshots[k].values().iter().enumerate() {
            let p = xi.dot(&hab.coords(i));
            if p <= lo {
                seen_in = true;
                inside_min = inside_min.min(v);
            }
            if p >= hi {
                seen_out = true;
                outside_max = outside_max.max(v);
            }
        }
    }
    if !seen_in && !seen_out {
        return Err(Error::EmptyWindow(
            "both spreading cones are empty at the final times".into(),
        ));
    }
    let inside_min = seen_in.then_some(inside_min);
    let outside_max = seen_out.then_some(outside_max);
    Ok(ConeVerdict {
        c,
        margin,
        inside_min,
        outside_max,
        inside_ok: inside_min.is_some_and(|v| v >= T::lit(INSIDE_FLOOR) * u0_star),
        outside_ok: outside_max.is_some_and(|v| v <= T::lit(OUTSIDE_CEILING) * u0_star),
        times_checked: idx.len(),
    })
}

/// `max |u - u*|` over `x·ξ <= bound`.
pub fn max_gap_behind<T: Scalar>(u: &Field<T>, u_star: &Field<T>, xi: &Direction<T>, bound: T) -> Result<T> {
    u.check_same_habitat(u_star)?;
    let hab = u.habitat();
    let mut worst = T::neg_infinity();
    for (i, (&a, &b)) in u.values().iter().zip(u_star.values()).enumerate() {
        if xi.dot(&hab.coords(i)) <= bound {
            worst = worst.max((a - b).abs());
        }
    }
    if worst == T::neg_infinity() {
        return Err(Error::EmptyWindow("convergence region is empty".into()));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Boundary, Habitat};
    use crate::dynamics::Scheme;

    fn moving_step(c: f64) -> Trajectory<f64> {
        let hab = Habitat::continuum(1, 100.0, 0.5, Boundary::ClampToConstant).unwrap();
        let times: Vec<f64> = (0..=20).map(f64::from).collect();
        let snapshots = times
            .iter()
            .map(|&t| Field::from_fn(hab, |x| if x[0] <= c * t { 1.0 } else { 0.0 }))
            .collect();
        Trajectory {
            habitat: hab,
            times,
            snapshots,
            dt: 0.1,
            scheme: Scheme::Rk4,
            clip_count: 0,
        }
    }

    #[test]
    fn exact_step_passes_and_controls_fail() {
        let traj = moving_step(2.0);
        let xi = Direction::positive_x();
        let v = check_front_cones(&traj, &xi, 2.0, 0.2, 1.0).unwrap();
        assert!(v.passes());
        assert_eq!(v.times_checked, 6);
        let fast = check_front_cones(&traj, &xi, 4.0, 0.2, 1.0).unwrap();
        assert!(!fast.inside_ok && fast.outside_ok);
        let slow = check_front_cones(&traj, &xi, 1.0, 0.2, 1.0).unwrap();
        assert!(slow.inside_ok && !slow.outside_ok);
    }

    #[test]
    fn empty_cones() {
        let traj = moving_step(2.0);
        let v = check_front_cones(&traj, &Direction::positive_x(), 10.0, 0.2, 1.0).unwrap();
        assert_eq!(v.outside_max, None);
        assert!(!v.outside_ok && !v.passes());
    }

    #[test]
    fn gap_behind() {
        let traj = moving_step(2.0);
        let u = traj.last();
        let star = Field::constant(*u.habitat(), 1.0);
        let g = max_gap_behind(u, &star, &Direction::positive_x(), 20.0).unwrap();
        assert_eq!(g, 0.0);
        let g = max_gap_behind(u, &star, &Direction::positive_x(), 50.0).unwrap();
        assert_eq!(g, 1.0);
    }
}
