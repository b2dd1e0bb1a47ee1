//! Numerical laboratory for KPP equations whose growth rate differs from a
//! homogeneous law only on a bounded region.
//!
//! Three dispersal mechanisms are supported: random (Laplacian), nonlocal
//! (convolution with a compactly supported kernel) and discrete
//! (nearest-neighbour exchange on the lattice). The crate integrates the
//! equations, computes principal eigenvalues of the twisted periodic
//! linearizations, derives spreading speeds from the dispersion relations,
//! computes the positive stationary state by monotone evolution, and runs the
//! front-propagation experiments that compare all of these.
//!
//! Numerics are generic over [`Scalar`] (`f32` or `f64`); the `*64` aliases at
//! the crate root fix the scalar to `f64`.

pub mod dispersal;
pub mod domain;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod experiments;
pub mod export;
pub mod scalar;
pub mod speeds;
pub mod stationary;

pub use dispersal::{DispersalKind, DispersalOp};
pub use domain::{
    check_kpp_hypotheses, make_compact_initial, make_front_initial, make_strip_initial,
    BaseGrowth, Boundary, Direction, Field, Habitat, HabitatKind, Kernel, KernelProfile,
    KppReport, LatticeWeights, Reaction,
};
pub use error::{Error, Result};
pub use scalar::Scalar;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Habitat64 = Habitat<f64>;
pub type Field64 = Field<f64>;
pub type Reaction64 = Reaction<f64>;
pub type Kernel64 = Kernel<f64>;
pub type LatticeWeights64 = LatticeWeights<f64>;
pub type DispersalOp64 = DispersalOp<f64>;
pub type Direction64 = Direction<f64>;
pub type Trajectory64 = dynamics::Trajectory<f64>;
pub type EigenResult64 = eigen::EigenResult<f64>;
pub type PeriodicCoefficient64 = eigen::PeriodicCoefficient<f64>;
pub type SpeedResult64 = speeds::SpeedResult<f64>;
pub type StationaryResult64 = stationary::StationaryResult<f64>;

pub type Field32 = Field<f32>;
pub type Habitat32 = Habitat<f32>;
pub type Trajectory32 = dynamics::Trajectory<f32>;
