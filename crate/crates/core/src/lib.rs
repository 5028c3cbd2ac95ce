//! Radially symmetric Keller-Segel ring collapse: profile data, discretized
//! operators, spectral audits, physical and renormalized solvers, modulation
//! and bootstrap diagnostics.

pub mod banded;
pub mod diagnostics;
pub mod eigen;
pub mod error;
pub mod grid;
pub mod interp;
pub mod jet;
pub mod modulation;
pub mod operators;
pub mod physical;
pub mod profiles;
pub mod renormalized;
pub mod record;
pub mod series;
pub mod spectral;

pub use error::{Error, Result};
