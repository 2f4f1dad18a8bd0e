//! Finite-dimension performance model for Bell-state quantum illumination.

pub mod baselines;
pub mod binomial;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod multi_shot;
pub mod params;
pub mod report;
pub mod roots;
pub mod single_shot;

pub use error::{Error, Result};
pub use params::{LogProb, ScenarioParams, ShotProbs};
