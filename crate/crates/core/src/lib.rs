//! Exact and brute-force dynamics of a qubit coupled to a dissipative
//! cavity.
//!
//! The Jaynes-Cummings model is combined with either photon-number
//! dephasing or photon loss of the cavity. [`dephasing`] and [`loss`] hold
//! the closed-form solutions; [`oracle`] integrates the full master
//! equation on a truncated Fock space and is used to check them.
//! [`repro`] drives the `qdyn` command-line tool.

pub mod dephasing;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod loss;
pub mod model;
pub mod oracle;
pub mod repro;
pub mod series;

pub use error::{Error, Result};
pub use hilbert::{DensityMatrix, HilbertDims, Tolerances};
pub use linalg::{ComplexMatrix, SpectralDecomposition, C64};
pub use model::{ModelParams, Scenario};
pub use series::TimeSeries;
