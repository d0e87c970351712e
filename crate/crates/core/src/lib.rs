//! Geodesic and horocycle flows on the unit tangent bundles of the modular
//! surface and its level-2 cover: reduction, measure, equidistribution,
//! cusp excursions and the Diophantine data they encode.

// `!(x > 0.0)` rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cusp_dioph;
pub mod ergodic;
pub mod error;
pub mod flow_geometry;
pub mod psl2;
pub mod quotient;
pub mod random_walk;
pub mod sampling;

pub use error::{Error, Result};
pub use psl2::{FlowKind, TangentPoint, UnimodularMatrix};
pub use quotient::{FuchsianGroupSpec, ReducedPoint};
