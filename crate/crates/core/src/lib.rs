pub mod birman_schwinger;
pub mod effective;
pub mod error;
pub mod gl;
pub mod kernels;
pub mod model;
pub mod pipeline;
pub mod radial;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
