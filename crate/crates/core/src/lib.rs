//! Mining of local process models from event logs.

pub mod alignment;
pub mod chaotic;
pub mod datasets;
pub mod error;
pub mod gap;
pub mod log;
pub mod miner;
pub mod petri;
pub mod projections;
pub mod quality;
pub mod run;
pub mod selection;
pub mod service;
pub mod tree;

pub use error::{Error, Result};
