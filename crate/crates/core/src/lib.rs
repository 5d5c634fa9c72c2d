//! Exact open-system dynamics of two qubits sharing a leaky cavity mode.
//!
//! The qubits couple resonantly to a single damped bosonic mode (the
//! pseudomode of a Lorentzian reservoir) and each can also decay
//! independently into a flat continuum. The crate integrates the resulting
//! Lindblad equation on the truncated qubit ⊗ qubit ⊗ Fock space, traces out
//! the mode and reports the two-qubit concurrence.
//!
//! Module map:
//!
//! - [`operators`]: composite Hilbert space, ladder operators, Hamiltonian.
//! - [`dynamics`]: Lindblad right-hand side and the Runge–Kutta integrators.
//! - [`entanglement`]: partial trace and concurrence (general and X-state).
//! - [`states`]: Bell-like and Werner-like initial states.
//! - [`sweep`]: parameter sweeps, dark-period detection, CSV and raw-state IO.

pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod operators;
pub mod states;
pub mod sweep;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
