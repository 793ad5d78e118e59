//! Mixed stabilizer simulation of the toric code under stochastic ZX dephasing.

pub mod channel;
pub mod ensemble;
pub mod error;
pub mod f2;
pub mod lattice;
pub mod observables;
pub mod pauli;
pub mod percolation;
pub mod plots;
pub mod scaling;
pub mod stabilizer;
pub mod validate;

pub use error::{Error, Result};
