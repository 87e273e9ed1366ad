pub mod attack;
pub mod codec;
pub mod distortions;
pub mod error;
pub mod fourier;
pub mod harness;
pub mod media;
pub mod metrics;
pub mod rng;
pub mod watermark;

pub use error::{Error, Result};
