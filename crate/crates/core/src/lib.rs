//! Metric distortion of voting rules under limited ordinal information.

pub mod dataio;
pub mod election;
pub mod error;
pub mod extended;
pub mod instances;
pub mod lp;
pub mod mechanisms;
pub mod sampling;

pub use election::{Election, MetricWitness, Point, Preference};
pub use error::{Error, Result};
pub use extended::ExtReal;
