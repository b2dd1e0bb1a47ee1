//! Time integration and the order structure of the solution semiflow.

mod integrate;
mod order;

pub use integrate::{
    evolve, stability_bound, unit_fraction_step, EvolveOptions, Integrator, Scheme, Stepping,
    Trajectory,
    CLIP_THRESHOLD, DIFFUSIVE_SAFETY,
};
pub(crate) use integrate::rhs_into;
pub use order::{
    check_comparison, check_exponential_supersolution, check_part_metric_decay, part_metric,
    ComparisonReport, PartMetricDecayReport, SupersolutionReport, COMPARISON_TOL,
    PART_METRIC_SLACK, SUPERSOLUTION_REL_TOL,
};
