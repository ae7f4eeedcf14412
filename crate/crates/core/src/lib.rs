//! Exact state-vector simulation of preparing injective PEPS by growing a
//! sequence of parent Hamiltonians and projecting between their ground states.
//!
//! - [`linalg`]: dense complex kernels (SVD, Hermitian eigensolver, polar form).
//! - [`network`]: graphs, tensors, the positive gauge and the contraction oracle.
//! - [`hamiltonian`]: the `H_t` family and exact ground-space analysis.
//! - [`dynamics`]: measurements, the repair loop and its closed-form statistics.
//! - [`harness`]: configs, instance generation, sweeps and the CLI.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod harness;
pub mod linalg;
pub mod network;

pub use error::{Error, Result};
