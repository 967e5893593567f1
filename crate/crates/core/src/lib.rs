//! Dimer graphs, Kasteleyn matrices, perfect t-embeddings via Coulomb
//! gauges, t-holomorphic functions and T-graph walks.

pub mod domain;
pub mod dual;
pub mod embedding;
pub mod error;
pub mod families;
pub mod gauge;
pub mod graph;
pub mod kasteleyn;
pub mod lsq;
pub mod tgraph;
pub mod tholo;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
