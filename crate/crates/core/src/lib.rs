pub mod circuit;
pub mod clifford;
pub mod error;
pub mod gf2;
pub mod harness;
pub mod observables;
pub mod pauli;
pub mod scaling;
pub mod stabilizer;
pub mod statmech;
pub mod xeb;

pub use error::{Error, Result};
