pub mod cli;
pub mod compiler;
pub mod error;
pub mod harness;
pub mod lattice;
pub mod oracle;
pub mod patterns;
pub mod resource;
pub mod tensornet;

pub use error::{Error, Result};
