pub mod edge_stats;
pub mod ensembles;
pub mod error;
pub mod flow;
pub mod persist;
pub mod poly;
pub mod quadrature;
pub mod refined_law;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
