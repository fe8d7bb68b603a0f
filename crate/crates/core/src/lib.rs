pub mod enhancement;
pub mod error;
pub mod harness;
pub mod image;
pub mod metrics;
pub mod nr_quality;
pub mod optimizer;

pub use error::{Error, ErrorClass, Result};
