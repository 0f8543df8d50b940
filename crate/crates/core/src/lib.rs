pub mod error;
pub mod realspec;
pub mod sequences;
pub mod engine;
pub mod beatty;
pub mod verify;
pub mod cli;

pub use error::{Error, Result};
pub use realspec::RealSpec;
