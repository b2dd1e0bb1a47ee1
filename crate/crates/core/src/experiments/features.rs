use serde::Serialize;

use crate::dispersal::DispersalOp;
use crate::domain::{check_kpp_hypotheses, make_compact_initial, Direction, Field, Habitat, Reaction};
use crate::dynamics::{evolve, Stepping, Trajectory};
use crate::error::{invalid, Error, Result};
use crate::experiments::cone::{final_indices, CONVERGENCE_TOL, OUTSIDE_CEILING};
use crate::scalar::Scalar;
use crate::speeds::theoretical_speed;
use crate::stationary::{solve_stationary, Route, StationaryOptions};

/// Directions sampled on the circle for the sup/inf of the speed in 2-D.
pub const DIRECTION_SAMPLES: usize = 8;

/// The four spreading statements for localized initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clause {
    /// Data supported in a strip die out beyond `|x·ξ| = (1 + m) c_max t`.
    StripExtinction,
    /// Data above `σ` on a strip converge to `u*` within `|x·ξ| = (1 - m) c_min t`.
    StripConvergence,
    /// Compactly supported data die out beyond `|x| = (1 + m) c_max t`.
    BallExtinction,
    /// Data above `σ` on a ball converge to `u*` within `|x| = (1 - m) c_min t`.
    BallConvergence,
}

impl Clause {
    pub const ALL: [Clause; 4] = [
        Clause::StripExtinction,
        Clause::StripConvergence,
        Clause::BallExtinction,
        Clause::BallConvergence,
    ];

    pub fn number(self) -> usize {
        match self {
            Clause::StripExtinction => 1,
            Clause::StripConvergence => 2,
            Clause::BallExtinction => 3,
            Clause::BallConvergence => 4,
        }
    }

    pub fn from_number(n: usize) -> Option<Self> {
        Self::ALL.get(n.checked_sub(1)?).copied()
    }

    pub fn is_extinction(self) -> bool {
        matches!(self, Clause::StripExtinction | Clause::BallExtinction)
    }

    pub fn is_ball(self) -> bool {
        matches!(self, Clause::BallExtinction | Clause::BallConvergence)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClauseVerdict<T> {
    pub clause: Clause,
    /// Speed bounding the region (`c_max` or `c_min`, after any scaling).
    pub c: T,
    pub margin: T,
    /// Largest `u` (extinction) or `|u - u*|` (convergence) in the region.
    pub worst: T,
    pub threshold: T,
    pub passes: bool,
    pub times_checked: usize,
}

/// Plateau data of radius `radius` and height `sigma`, which meet the
/// hypotheses of all four clauses at once.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureConfig<T> {
    pub op: DispersalOp<T>,
    pub reaction: Reaction<T>,
    pub habitat: Habitat<T>,
    pub direction: Direction<T>,
    pub radius: T,
    pub sigma: T,
    pub t_final: T,
    pub margin: T,
    pub stepping: Stepping<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureRun<T> {
    pub trajectory: Trajectory<T>,
    pub u_star: Field<T>,
    pub u0_star: T,
    /// `(min, max)` of `c*` over `{ξ, -ξ}`.
    pub strip_speeds: (T, T),
    /// `(min, max)` of `c*` over the sampled sphere.
    pub ball_speeds: (T, T),
    pub direction: Direction<T>,
}

/// Evolves plateau data and computes the stationary state and speed bounds
/// needed by [`FeatureRun::verdict`].
pub fn run_spreading_features<T: Scalar>(cfg: &FeatureConfig<T>) -> Result<FeatureRun<T>> {
    let report = check_kpp_hypotheses(&cfg.reaction, &cfg.habitat)?;
    if !(report.h1_ok && report.h2_ok) {
        return Err(Error::Precondition("reaction violates the monostable hypotheses".into()));
    }
    cfg.habitat.check_direction(&cfg.direction)?;
    let speed = |xi: &Direction<T>| theoretical_speed(&cfg.op, &cfg.reaction, xi).map(|s| s.c_star);
    let a = speed(&cfg.direction)?;
    let b = speed(&cfg.direction.reversed())?;
    let strip_speeds = (a.min(b), a.max(b));
    let mut ball_speeds = (T::infinity(), T::neg_infinity());
    for xi in Direction::sphere_sample(cfg.habitat.dim(), DIRECTION_SAMPLES) {
        let c = speed(&xi)?;
        ball_speeds = (ball_speeds.0.min(c), ball_speeds.1.max(c));
    }

    let u0 = make_compact_initial(&cfg.habitat, cfg.radius, cfg.sigma)?;
    let opts = cfg.stepping.options(&cfg.op, &cfg.reaction, &u0, cfg.t_final);
    let trajectory = evolve(&cfg.op, &cfg.reaction, &u0, &opts)?;
    let star = solve_stationary(&cfg.op, &cfg.reaction, &cfg.habitat, Route::FromAbove, &StationaryOptions::default())?;
    Ok(FeatureRun {
        trajectory,
        u_star: star.u_star,
        u0_star: report.u0_star,
        strip_speeds,
        ball_speeds,
        direction: cfg.direction,
    })
}

impl<T: Scalar> FeatureRun<T> {
    /// Verdict for `clause`, with the bounding speed multiplied by `scale`
    /// (1 for the real check; negative controls use 0.5 or 2).
    pub fn verdict(&self, clause: Clause, margin: T, scale: T) -> Result<ClauseVerdict<T>> {
        let (cmin, cmax) = if clause.is_ball() {
            self.ball_speeds
        } else {
            self.strip_speeds
        };
        let c = scale * if clause.is_extinction() { cmax } else { cmin };
        evaluate_clause(
            &self.trajectory,
            &self.u_star,
            self.u0_star,
            clause,
            &self.direction,
            c,
            margin,
        )
    }
}

/// Checks one clause at every recorded time of the final window.
pub fn evaluate_clause<T: Scalar>(
    traj: &Trajectory<T>,
    u_star: &Field<T>,
    u0_star: T,
    clause: Clause,
    xi: &Direction<T>,
    c: T,
    margin: T,
) -> Result<ClauseVerdict<T>> {
    if !(c > T::zero()) || !(margin >= T::zero() && margin < T::one()) {
        return Err(invalid("clause", "need c > 0 and margin in [0, 1)"));
    }
    u_star.check_same_habitat(traj.last())?;
    let hab = &traj.habitat;
    let dist = |i: usize| {
        let x = hab.coords(i);
        if clause.is_ball() {
            (x[0] * x[0] + x[1] * x[1]).sqrt()
        } else {
            xi.dot(&x).abs()
        }
    };
    let idx = final_indices(traj);
    let mut worst = T::zero();
    let mut seen = false;
    for &k in &idx {
        let t = traj.times[k];
        let u = traj.snapshots[k].values();
        if clause.is_extinction() {
            let r = (T::one() + margin) * c * t;
            for (i, &v) in u.iter().enumerate() {
                if dist(i) >= r {
                    seen = true;
                    worst = worst.max(v);
                }
            }
        } else {
            let r = (T::one() - margin) * c * t;
            for (i, (&v, &s)) in u.iter().zip(u_star.values()).enumerate() {
                if dist(i) <= r {
                    seen = true;
                    worst = worst.max((v - s).abs());
                }
            }
        }
    }
    if !seen {
        return Err(Error::EmptyWindow(format!(
            "clause {} region contains no grid point at the final times",
            clause.number()
        )));
    }
    let threshold = if clause.is_extinction() {
        T::lit(OUTSIDE_CEILING) * u0_star
    } else {
        T::lit(CONVERGENCE_TOL) * u0_star
    };
    Ok(ClauseVerdict {
        clause,
        c,
        margin,
        worst,
        threshold,
        passes: worst <= threshold,
        times_checked: idx.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clause_numbers_round_trip() {
        for c in Clause::ALL {
            assert_eq!(Clause::from_number(c.number()), Some(c));
        }
        assert_eq!(Clause::from_number(0), None);
        assert_eq!(Clause::from_number(5), None);
    }
}
