//! Entanglement entropy, tensor-train truncation and ground-state locality
//! analysis for one-dimensional quantum chains with nearest-neighbour
//! interactions.
//!
//! Everything is dense and exact at desk scale: states are amplitude
//! vectors, operators are full matrices on the chain space, and spectral
//! quantities come from dense eigendecompositions (or a Lanczos ground-state
//! solve above the dense cap).

pub mod arealaw_analysis;
pub mod error;
pub mod fit;
pub mod linalg;
pub mod locality_filters;
pub mod nni_hamiltonian;
pub mod operator;
pub mod par;
pub mod random;
pub mod spectra_entropy;
pub mod tensor_core;

pub use error::{Error, Result};
pub use linalg::Interval;
