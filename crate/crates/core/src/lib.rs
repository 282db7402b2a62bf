//! Krylov spread complexity of Gaussian states.
//!
//! The crate builds Lanczos chains for states generated by quadratic
//! Hamiltonians, either from a truncated Fock-space generator or from the
//! moments of the survival amplitude, propagates the chain amplitudes,
//! and compares the resulting spread complexity with the covariance-matrix
//! bound `C_F = ∓¼Tr(I − Δ)`.

pub mod error;
pub mod evolve;
pub mod family;
pub mod gaussian;
pub mod hilbert;
pub mod jet;
pub mod lanczos;
pub mod moments;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use family::{DiracKind, DiracModeParams, StateFamily, TfdParams};
