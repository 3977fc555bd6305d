//! Quantum channel reversibility, complementary channels and Holevo-type capacities.

pub mod capacity;
pub mod channels;
pub mod cli;
pub mod entropy;
pub mod error;
pub mod io;
pub mod matcore;
pub mod petz;
pub mod random;

pub use error::{Error, Result};
