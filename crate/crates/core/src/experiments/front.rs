use serde::Serialize;

use crate::domain::{Direction, Field};
use crate::dynamics::Trajectory;
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Guard, in grid spacings beyond the kernel reach, between the fit window
/// and the habitat edge.
pub const BOUNDARY_GUARD_CELLS: f64 = 10.0;
/// Minimum number of samples in a speed fit.
pub const MIN_FIT_SAMPLES: usize = 10;
pub const DEFAULT_BURN_IN: f64 = 0.5;

/// Position of a level set along `ξ` at every recorded time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontTrace<T> {
    pub times: Vec<T>,
    /// `NaN` where the level set is empty.
    pub positions: Vec<T>,
    pub level: T,
    pub direction: Direction<T>,
    /// Positions beyond this value are too close to the habitat edge.
    pub safe_limit: T,
}

/// Largest `x·ξ` with `u(x) >= level`, refined by linear interpolation towards
/// the neighbour below the level along the dominant axis of `ξ`.
pub fn front_position<T: Scalar>(u: &Field<T>, xi: &Direction<T>, level: T) -> T {
    let hab = u.habitat();
    let c = xi.components();
    let axis = if hab.dim() == 2 && c[1].abs() > c[0].abs() { 1 } else { 0 };
    let step: isize = if c[axis] >= T::zero() { 1 } else { -1 };
    let n = hab.points_per_axis() as isize;
    let h = hab.spacing();
    let vals = u.values();
    let mut best = T::nan();
    for (i, &v) in vals.iter().enumerate() {
        if !(v >= level) {
            continue;
        }
        let mut p = xi.dot(&hab.coords(i));
        let mut ij = hab.axis_indices(i);
        let next = ij[axis] as isize + step;
        if (0..n).contains(&next) {
            ij[axis] = next as usize;
            let w = vals[hab.flat_index(ij)];
            if w < level {
                p += (v - level) / (v - w) * h * c[axis].abs();
            }
        }
        if best.is_nan() || p > best {
            best = p;
        }
    }
    best
}

/// Tracks the `level` set of every snapshot along `ξ`. `reach` is the kernel
/// support radius (zero for local operators); it widens the boundary guard.
pub fn track_front<T: Scalar>(
    traj: &Trajectory<T>,
    xi: &Direction<T>,
    level: T,
    reach: T,
) -> Result<FrontTrace<T>> {
    traj.habitat.check_direction(xi)?;
    if !(level > T::zero()) {
        return Err(invalid("level", "must be positive"));
    }
    let positions = traj
        .snapshots
        .iter()
        .map(|u| front_position(u, xi, level))
        .collect();
    let safe_limit = traj.habitat.extent_along(xi)
        - reach
        - T::lit(BOUNDARY_GUARD_CELLS) * traj.habitat.spacing();
    Ok(FrontTrace {
        times: traj.times.clone(),
        positions,
        level,
        direction: *xi,
        safe_limit,
    })
}

/// Least-squares front speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedEstimate<T> {
    pub slope: T,
    pub intercept: T,
    pub window: [T; 2],
    pub samples: usize,
    pub rms: T,
    pub theory: Option<T>,
    pub relative_error: Option<T>,
}

impl<T: Scalar> SpeedEstimate<T> {
    pub fn with_theory(mut self, c: T) -> Self {
        self.theory = Some(c);
        self.relative_error = Some((self.slope - c).abs() / c.abs());
        self
    }
}

/// Fits `position = slope·t + intercept` over `[burn_in·T, T_safe]`, where
/// `T_safe` is the last time before the front first passes the safe limit.
pub fn estimate_speed<T: Scalar>(trace: &FrontTrace<T>, burn_in_fraction: T) -> Result<SpeedEstimate<T>> {
    if !(burn_in_fraction >= T::zero() && burn_in_fraction < T::one()) {
        return Err(invalid("burn_in_fraction", "must lie in [0, 1)"));
    }
    let t_end = *trace
        .times
        .last()
        .ok_or_else(|| Error::EmptyWindow("trace has no samples".into()))?;
    let t1 = burn_in_fraction * t_end;
    let mut stop = trace.times.len();
    for (k, (&t, &p)) in trace.times.iter().zip(&trace.positions).enumerate() {
        if p > trace.safe_limit {
            if t <= t1 {
                return Err(Error::FrontHitBoundary { time: t.to_f64_lossy() });
            }
            stop = k;
            break;
        }
    }
    let window: Vec<(T, T)> = trace.times[..stop]
        .iter()
        .zip(&trace.positions[..stop])
        .filter(|(&t, _)| t >= t1)
        .map(|(&t, &p)| (t, p))
        .collect();
    if window.len() < MIN_FIT_SAMPLES {
        return Err(Error::EmptyWindow(format!(
            "{} samples in the fit window, need {MIN_FIT_SAMPLES}",
            window.len()
        )));
    }
    if window.iter().any(|(_, p)| p.is_nan()) {
        return Err(Error::EmptyWindow("level set empty inside the fit window".into()));
    }
    let n = T::from_usize_lossy(window.len());
    let tm = window.iter().map(|w| w.0).sum::<T>() / n;
    let pm = window.iter().map(|w| w.1).sum::<T>() / n;
    let mut stt = T::zero();
    let mut stp = T::zero();
    for &(t, p) in &window {
        stt += (t - tm) * (t - tm);
        stp += (t - tm) * (p - pm);
    }
    let slope = stp / stt;
    let intercept = pm - slope * tm;
    let sse = window
        .iter()
        .map(|&(t, p)| {
            let r = p - (slope * t + intercept);
            r * r
        })
        .sum::<T>();
    Ok(SpeedEstimate {
        slope,
        intercept,
        window: [window[0].0, window[window.len() - 1].0],
        samples: window.len(),
        rms: (sse / n).sqrt(),
        theory: None,
        relative_error: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_front_initial, Boundary, Habitat};
    use crate::dynamics::Scheme;

    fn line() -> Habitat<f64> {
        Habitat::continuum(1, 20.0, 0.1, Boundary::ClampToConstant).unwrap()
    }

    fn trace(times: Vec<f64>, positions: Vec<f64>) -> FrontTrace<f64> {
        FrontTrace {
            times,
            positions,
            level: 0.5,
            direction: Direction::positive_x(),
            safe_limit: 1e9,
        }
    }

    #[test]
    fn step_front_sits_at_origin() {
        let hab = line();
        let u = Field::from_fn(hab, |x| if x[0] <= 1e-12 { 1.0 } else { 0.0 });
        let p = front_position(&u, &Direction::positive_x(), 0.5);
        assert!(p.abs() <= 0.1 + 1e-12);
        let ramp = make_front_initial(&hab, &Direction::positive_x(), 1.0).unwrap();
        assert!((front_position(&ramp, &Direction::positive_x(), 0.5) - 0.5).abs() < 1e-9);
        let mirrored = make_front_initial(&hab, &Direction::negative_x(), 1.0).unwrap();
        assert!((front_position(&mirrored, &Direction::negative_x(), 0.5) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn empty_level_set_is_nan() {
        let u = Field::zeros(line());
        assert!(front_position(&u, &Direction::positive_x(), 0.5).is_nan());
    }

    #[test]
    fn translation_shifts_position() {
        let hab = line();
        let prof = |x: f64| 1.0 / (1.0 + (2.0 * x).exp());
        let base = Field::from_fn(hab, |x| prof(x[0]));
        let moved = Field::from_fn(hab, |x| prof(x[0] - 3.7));
        let xi = Direction::positive_x();
        let d = front_position(&moved, &xi, 0.5) - front_position(&base, &xi, 0.5);
        assert!((d - 3.7).abs() <= 0.05);
    }

    #[test]
    fn two_dimensional_diagonal_tracks_ball() {
        let hab = Habitat::<f64>::continuum(2, 10.0, 0.1, Boundary::ClampToConstant).unwrap();
        let u = Field::from_fn(hab, |x: [f64; 2]| if (x[0] * x[0] + x[1] * x[1]).sqrt() <= 4.0 { 1.0 } else { 0.0 });
        let xi = Direction::from_angle(0.7f64);
        let p = front_position(&u, &xi, 0.5);
        assert!((p - 4.0).abs() <= 0.15, "{p}");
    }

    #[test]
    fn synthetic_linear_trace() {
        let times: Vec<f64> = (0..=100).map(|k| k as f64 * 0.5).collect();
        let positions = times
            .iter()
            .enumerate()
            .map(|(k, t)| 2.0 * t + 1.0 + 1e-3 * if k % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let e = estimate_speed(&trace(times, positions), 0.5).unwrap().with_theory(2.0);
        assert!((e.slope - 2.0).abs() < 1e-2);
        assert!(e.relative_error.unwrap() < 5e-3);
        assert!(e.rms < 2e-3);
        assert_eq!(e.window, [25.0, 50.0]);
    }

    #[test]
    fn short_or_clipped_windows_fail() {
        let times: Vec<f64> = (0..10).map(f64::from).collect();
        let positions = times.clone();
        assert!(matches!(estimate_speed(&trace(times.clone(), positions.clone()), 0.5), Err(Error::EmptyWindow(_))));
        let mut t = trace(times, positions);
        t.safe_limit = 2.5;
        assert!(matches!(estimate_speed(&t, 0.5), Err(Error::FrontHitBoundary { .. })));
    }

    #[test]
    fn tracker_reads_trajectory() {
        let hab = line();
        let u0 = make_front_initial(&hab, &Direction::positive_x(), 1.0).unwrap();
        let traj = Trajectory {
            habitat: hab,
            times: vec![0.0],
            snapshots: vec![u0],
            dt: 0.01,
            scheme: Scheme::Rk4,
            clip_count: 0,
        };
        let t = track_front(&traj, &Direction::positive_x(), 0.5, 0.0).unwrap();
        assert!((t.positions[0] - 0.5).abs() < 1e-9);
        assert!((t.safe_limit - 19.0).abs() < 1e-12);
    }
}
