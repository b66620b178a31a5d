//! Continuous-approximation model of a ring-radial rapid-transit network with
//! fixed-route and demand-responsive feeders, plus the bi-level optimizer that
//! dimensions it over an operating day.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`, which is what the optimizer and the CLI use.

pub mod cost;
pub mod design;
pub mod error;
pub mod experiment;
pub mod feeder;
pub mod grid;
pub mod mrt;
pub mod optimizer;
pub mod scalar;
pub mod scenario;
pub mod sim_oracle;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Scenario = scenario::ScenarioParams<f64>;
pub type Costs = scenario::CostCoefficients<f64>;
pub type Demand = scenario::DemandField<f64>;
pub type Profile = design::DesignProfile<f64>;
pub type Breakdown = cost::CostBreakdown<f64>;
