use rayon::prelude::*;
use serde::Serialize;

use crate::dispersal::{DispersalKind, DispersalOp};
use crate::domain::{check_kpp_hypotheses, make_front_initial, BaseGrowth, Direction, Habitat, Reaction};
use crate::dynamics::{evolve, Stepping, Trajectory};
use crate::error::{Error, Result};
use crate::experiments::cone::{check_front_cones, max_gap_behind, ConeVerdict, CONVERGENCE_TOL};
use crate::experiments::front::{estimate_speed, track_front, FrontTrace, SpeedEstimate};
use crate::scalar::Scalar;
use crate::speeds::{theoretical_speed, SpeedResult};
use crate::stationary::{solve_stationary, Route, StationaryOptions};

/// Amplitudes of the localized perturbation swept by default.
pub const DEFAULT_AMPLITUDES: [f64; 4] = [-0.5, 0.0, 0.5, 1.0];
pub const THEORY_TOL: f64 = 0.05;
pub const PAIRWISE_TOL: f64 = 0.02;

/// A single front run: front initial data of height `u0` along `ξ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontRunConfig<T> {
    pub op: DispersalOp<T>,
    pub reaction: Reaction<T>,
    pub habitat: Habitat<T>,
    pub direction: Direction<T>,
    pub t_final: T,
    /// Tracked level as a fraction of `u0`.
    pub level_fraction: T,
    pub burn_in: T,
    pub stepping: Stepping<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontRun<T> {
    pub u0_star: T,
    pub theory: SpeedResult<T>,
    pub trace: FrontTrace<T>,
    pub estimate: SpeedEstimate<T>,
    pub trajectory: Trajectory<T>,
}

impl<T: Scalar> FrontRun<T> {
    /// Cone check with the theoretical speed multiplied by `scale`.
    pub fn cones(&self, scale: T, margin: T) -> Result<ConeVerdict<T>> {
        check_front_cones(
            &self.trajectory,
            &self.trace.direction,
            scale * self.theory.c_star,
            margin,
            self.u0_star,
        )
    }
}

/// Evolves front data, tracks the level set and fits its speed.
pub fn run_front<T: Scalar>(cfg: &FrontRunConfig<T>) -> Result<FrontRun<T>> {
    let report = check_kpp_hypotheses(&cfg.reaction, &cfg.habitat)?;
    if !(report.h1_ok && report.h2_ok) {
        return Err(Error::Precondition(format!(
            "reaction with amplitude {} violates the monostable hypotheses",
            cfg.reaction.amplitude()
        )));
    }
    let u0_star = report.u0_star;
    let theory = theoretical_speed(&cfg.op, &cfg.reaction, &cfg.direction)?;
    let u0 = make_front_initial(&cfg.habitat, &cfg.direction, u0_star)?;
    let opts = cfg.stepping.options(&cfg.op, &cfg.reaction, &u0, cfg.t_final);
    let trajectory = evolve(&cfg.op, &cfg.reaction, &u0, &opts)?;
    let trace = track_front(
        &trajectory,
        &cfg.direction,
        cfg.level_fraction * u0_star,
        cfg.op.reach(),
    )?;
    let estimate = estimate_speed(&trace, cfg.burn_in)?.with_theory(theory.c_star);
    Ok(FrontRun {
        u0_star,
        theory,
        trace,
        estimate,
        trajectory,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig<T> {
    pub op: DispersalOp<T>,
    pub base: BaseGrowth<T>,
    pub radius: T,
    pub amplitudes: Vec<T>,
    pub habitat: Habitat<T>,
    pub direction: Direction<T>,
    pub t_final: T,
    pub level_fraction: T,
    pub burn_in: T,
    pub margin: T,
    pub stepping: Stepping<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow<T> {
    pub amplitude: T,
    pub estimate: SpeedEstimate<T>,
    /// `max |u(T) - u*|` over `x·ξ <= c T / 2`.
    pub stationary_gap: T,
    pub cone: ConeVerdict<T>,
    /// Cone check at twice the theoretical speed; must fail.
    pub doubled: ConeVerdict<T>,
    /// Cone check at half the theoretical speed; must fail.
    pub halved: ConeVerdict<T>,
    pub trace: FrontTrace<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport<T> {
    pub kind: DispersalKind,
    pub u0_star: T,
    /// Speed of the unperturbed equation.
    pub theory: SpeedResult<T>,
    pub rows: Vec<SweepRow<T>>,
    pub max_theory_error: T,
    /// `(max - min) / min` over the empirical speeds.
    pub pairwise_spread: T,
    pub theory_ok: bool,
    pub pairwise_ok: bool,
    pub convergence_ok: bool,
    pub cones_ok: bool,
    /// Every negative control failed as it should.
    pub controls_fail: bool,
}

impl<T: Scalar> SweepReport<T> {
    pub fn passes(&self) -> bool {
        self.theory_ok && self.pairwise_ok && self.convergence_ok && self.cones_ok && self.controls_fail
    }
}

fn sweep_row<T: Scalar>(cfg: &SweepConfig<T>, amplitude: T, theory: &SpeedResult<T>) -> Result<SweepRow<T>> {
    let reaction = Reaction::new(cfg.base, amplitude, cfg.radius)?;
    let run = run_front(&FrontRunConfig {
        op: cfg.op.clone(),
        reaction,
        habitat: cfg.habitat,
        direction: cfg.direction,
        t_final: cfg.t_final,
        level_fraction: cfg.level_fraction,
        burn_in: cfg.burn_in,
        stepping: cfg.stepping,
    })?;
    let star = solve_stationary(&cfg.op, &reaction, &cfg.habitat, Route::FromAbove, &StationaryOptions::default())?;
    let c = theory.c_star;
    let t_end = run.trajectory.final_time();
    let stationary_gap = max_gap_behind(
        run.trajectory.last(),
        &star.u_star,
        &cfg.direction,
        T::lit(0.5) * c * t_end,
    )?;
    let cone = |scale: f64| {
        check_front_cones(&run.trajectory, &cfg.direction, T::lit(scale) * c, cfg.margin, run.u0_star)
    };
    Ok(SweepRow {
        amplitude,
        estimate: run.estimate.with_theory(c),
        stationary_gap,
        cone: cone(1.0)?,
        doubled: cone(2.0)?,
        halved: cone(0.5)?,
        trace: run.trace,
    })
}

/// Runs the front experiment for every amplitude concurrently and compares the
/// empirical speeds with the speed of the unperturbed equation and with each
/// other.
pub fn run_amplitude_sweep<T: Scalar>(cfg: &SweepConfig<T>) -> Result<SweepReport<T>> {
    if cfg.amplitudes.is_empty() {
        return Err(crate::error::invalid("amplitudes", "sweep needs at least one amplitude"));
    }
    let unperturbed = Reaction::homogeneous(cfg.base);
    let theory = theoretical_speed(&cfg.op, &unperturbed, &cfg.direction)?;
    let u0_star = unperturbed.equilibrium(unperturbed.beta0(&cfg.habitat))?;
    let rows = cfg
        .amplitudes
        .par_iter()
        .map(|&a| sweep_row(cfg, a, &theory))
        .collect::<Result<Vec<_>>>()?;

    let slopes: Vec<T> = rows.iter().map(|r| r.estimate.slope).collect();
    let lo = slopes.iter().copied().fold(T::infinity(), T::min);
    let hi = slopes.iter().copied().fold(T::neg_infinity(), T::max);
    let pairwise_spread = (hi - lo) / lo;
    let max_theory_error = rows
        .iter()
        .map(|r| r.estimate.relative_error.unwrap_or(T::infinity()))
        .fold(T::zero(), T::max);
    let gap_tol = T::lit(CONVERGENCE_TOL) * u0_star;
    Ok(SweepReport {
        kind: cfg.op.kind(),
        u0_star,
        theory,
        max_theory_error,
        pairwise_spread,
        theory_ok: max_theory_error <= T::lit(THEORY_TOL),
        pairwise_ok: pairwise_spread <= T::lit(PAIRWISE_TOL),
        convergence_ok: rows.iter().all(|r| r.stationary_gap < gap_tol),
        cones_ok: rows.iter().all(|r| r.cone.passes()),
        controls_fail: rows.iter().all(|r| !r.doubled.inside_ok && !r.halved.outside_ok),
        rows,
    })
}
