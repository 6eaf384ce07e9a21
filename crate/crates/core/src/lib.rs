//! Barge unloading and tank blending schedules.
//!
//! Instances describe supply barges, storage tanks with tracked specs, and
//! production runs with spec and spec-ratio requirements. The nonconvex
//! blending model is approximated by MILPs over digit-discretized tank specs,
//! solved over the whole horizon or in rolling steps, and the resulting flows
//! are simulated exactly to audit the true specs.

pub mod bench;
pub mod discretization;
pub mod error;
pub mod instance;
pub mod model;
pub mod rolling;
pub mod sim;
pub mod solver;

pub use error::{Error, Result};
