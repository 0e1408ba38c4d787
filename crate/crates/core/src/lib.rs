//! Reconstruction of a star-shaped source support in a time-fractional
//! diffusion equation on the unit disc from boundary flux traces.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eigensystem;
pub mod experiments;
pub mod error;
pub mod forward;
pub mod inversion;
pub mod shape;
pub mod specfun;
pub mod steady;
pub mod trace;

pub use eigensystem::{build_basis, eigenfunction_value, EigenBasis, EigenMode, Phase};
pub use error::{Error, Result};
pub use forward::{FluxTable, PolarGrid, SourceSampling, TimeGrid};
pub use shape::{ObservationSet, StarShape, TrigPoly};
pub use trace::{FluxTrace, MeasurementSchedule};
