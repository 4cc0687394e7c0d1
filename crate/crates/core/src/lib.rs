pub mod cloud;
pub mod connection;
pub mod embedding;
pub mod error;
pub mod limit;
pub mod quadrature;
pub mod similitude;
pub mod solver;
pub mod surface;
pub mod tracking;

pub use error::{Error, Result};
