//! Verification toolkit for the static, cylindrically symmetric spacetime
//! sourced by a massless scalar field and a positive cosmological constant.
//!
//! The closed-form solution lives in [`model`]. Every other module re-derives
//! one of its properties by an independent route: curvature residuals
//! ([`curvature`]), the scalar first integral ([`scalar_field`]), linear
//! stability of the reduced system ([`stability`]), energy-condition margins
//! ([`energy`]), geodesic congruences and the tortoise coordinate
//! ([`congruence`], [`special`]). [`suites`] bundles the checks into
//! [`report::VerificationReport`]s that the `lbverify` binary serializes.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the type
//! aliases at the crate root fix it to `f64`, which is what the tolerances
//! in the suites assume.

pub mod cli;
pub mod congruence;
pub mod curvature;
pub mod energy;
mod error;
pub mod model;
pub mod quadrature;
pub mod report;
pub mod roots;
mod scalar;
pub mod scalar_field;
pub mod special;
pub mod stability;
pub mod suites;

pub use error::{LbError, Result};
pub use scalar::Real;

pub type Solution = model::Solution<f64>;
pub type SolutionParams = model::SolutionParams<f64>;
pub type RawConstants = model::RawConstants<f64>;
pub type MetricSample = model::MetricSample<f64>;
pub type FieldResidual = curvature::FieldResidual<f64>;
pub type FrameStress = energy::FrameStress<f64>;
pub type ConditionMargins = energy::ConditionMargins<f64>;
pub type CongruenceConfig = congruence::CongruenceConfig<f64>;
pub type KinematicsSample = congruence::KinematicsSample<f64>;
pub type StabilityReport = stability::StabilityReport<f64>;
pub type HypergeometricQuery = special::HypergeometricQuery<f64>;
