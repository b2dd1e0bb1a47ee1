//! Habitats, fields, reactions, kernels and lattice weights.

pub mod field;
pub mod habitat;
pub mod initial;
pub mod kernel;
pub mod lattice;
pub mod reaction;

pub use field::Field;
pub use habitat::{Boundary, Direction, Habitat, HabitatKind, Point};
pub use initial::{make_compact_initial, make_front_initial, make_strip_initial};
pub use kernel::{Kernel, KernelProfile, KernelTap};
pub use lattice::LatticeWeights;
pub use reaction::{bump, check_kpp_hypotheses, BaseGrowth, KppReport, Reaction};
