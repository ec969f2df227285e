//! Random unitary channels at desk scale: reproducible Haar sampling, sphere
//! geometry and ε-nets, channel construction with Stinespring and conjugate
//! views, and certification of randomizing behaviour with a Monte Carlo
//! experiment battery.

pub mod error;
pub mod linalg;
pub mod randgen;
pub mod spheregeo;
pub mod channel;
pub mod certify;
pub mod io;

pub use error::{Error, Result};
