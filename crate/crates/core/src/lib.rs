//! Numerical toolkit for one-shot entropies and relative thermalization.
//!
//! Entropies are in bits. All operations are pure functions over immutable
//! values and can be called concurrently.

pub mod bounds;
pub mod entropies;
pub mod error;
pub mod heatflow;
pub mod linalg;
pub mod metrics;
pub mod random;
pub mod sdp;
pub mod spin_model;
pub mod thermalization;

pub use bounds::BoundCheck;
pub use entropies::{EntropyKind, EntropyValue};
pub use error::{Error, Result};
pub use heatflow::{HeatExchange, ThermalPair};
pub use linalg::{ComplexMatrix, DensityOperator, DimensionSpec, PureState};
pub use random::Seed;
pub use sdp::{SdpProblem, SdpSolution, SdpStatus};
pub use spin_model::SpinShellSpec;
pub use thermalization::{ConstraintSubspace, ThermalizationReport};
