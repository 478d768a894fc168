//! Exact-diagonalization laboratory for nearest-neighbor spin chains.
//!
//! The crate builds local Hamiltonians in a canonical form (traceless,
//! pairwise Hilbert-Schmidt-orthogonal two-site terms), fully diagonalizes
//! them at desk scale, and measures how far mid-spectrum eigenstates fall
//! short of maximal subsystem entanglement. Three reference values are
//! available for comparison: the exact mean entanglement entropy of
//! Haar-random states, a closed-form universal deficit curve, and the
//! thermodynamic-entropy upper bound at the matching effective temperature.
//!
//! Module map:
//! - [`linalg`]: dense complex Hermitian eigensolver, Kronecker products,
//!   matrix functions via spectral calculus.
//! - [`hamiltonian`]: canonical-form construction, model builders, dense
//!   assembly, subsystem splits, variance/moment reports.
//! - [`entanglement`]: partial trace, von Neumann / Renyi entropies,
//!   Haar sampling, the Page mean and the universal deficit curve.
//! - [`spectrum`]: microcanonical windows, ensemble entropy statistics,
//!   band-weight and projector diagnostics, spectral Gaussianity.
//! - [`thermo`]: subsystem thermal states, energy/entropy curves, the
//!   effective-inverse-temperature solver, small-beta expansion checks.
//! - [`cli`]: config-driven experiment runner with CSV output.

pub mod cli;
pub mod entanglement;
pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod seed;
pub mod spectrum;
pub mod stats;
pub mod thermo;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, EigenDecomposition};

/// Default cap on the total Hilbert-space dimension d^N (N = 14 qubits).
pub const DEFAULT_DIMENSION_CAP: usize = 16384;
