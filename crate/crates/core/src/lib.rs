pub mod ancova;
pub mod cli;
pub mod config;
pub mod designs;
pub mod equivalence;
pub mod dist;
pub mod error;
pub mod kernel;
pub mod mmrm;
pub mod simulate;
pub mod tables;

pub use error::{Error, Result};
