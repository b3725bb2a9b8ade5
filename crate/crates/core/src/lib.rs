//! Nonunitary dynamics of two coupled qubits in a bosonic or spin environment.
//!
//! The reduced density matrix is built from exact closed forms (no master
//! equation integration). On top of it the crate computes the mixed-state
//! kinematic geometric phase, its environmental correction, the Wootters
//! concurrence and the von Neumann entropy.
//!
//! Basis ordering is `|00>, |01>, |10>, |11>` throughout.

// NaN inputs must fail the `!(x >= 0.0)` style guards used throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boson;
pub mod entanglement;
pub mod error;
pub mod evolution;
pub mod geophase;
pub mod quad;
pub mod spin;
pub mod state;

pub use error::{Error, Result};

/// Complex scalar used for all state amplitudes and matrix entries.
pub type C64 = num_complex::Complex64;
