//! End-to-end spreading experiments: front tracking, speed regression and
//! finite-horizon verdicts on the spreading cones.

mod cone;
mod features;
mod front;
mod sweep;

pub use cone::{
    check_front_cones, max_gap_behind, ConeVerdict, CONVERGENCE_TOL, DEFAULT_MARGIN, FINAL_WINDOW,
    INSIDE_FLOOR, OUTSIDE_CEILING,
};
pub use features::{
    evaluate_clause, run_spreading_features, Clause, ClauseVerdict, FeatureConfig, FeatureRun,
    DIRECTION_SAMPLES,
};
pub use front::{
    estimate_speed, front_position, track_front, FrontTrace, SpeedEstimate, BOUNDARY_GUARD_CELLS,
    DEFAULT_BURN_IN, MIN_FIT_SAMPLES,
};
pub use sweep::{
    run_amplitude_sweep, run_front, FrontRun, FrontRunConfig, SweepConfig, SweepReport, SweepRow,
    DEFAULT_AMPLITUDES, PAIRWISE_TOL, THEORY_TOL,
};
