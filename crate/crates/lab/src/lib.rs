//! Experiment pipelines for perfect t-embeddings of Aztec-type graphs and
//! the command line front end.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod pipeline;
pub mod report;
pub mod residue;

pub use error::{LabError, Result};
