pub mod channel;
pub mod error;
pub mod experiments;
pub mod numerics;
pub mod params;
pub mod reservoir;
pub mod squeezing;
pub mod volterra;

pub use error::{Error, ErrorKind, Result};
pub use params::{DispersionModel, EnsembleParams, ReservoirParams, RunConfig, TimeGrid};
