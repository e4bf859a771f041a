//! Quadratic knapsack problems attacked through their Ising encoding.
//!
//! The crate layers, bottom to top:
//!
//! * [`tensor`]: dense complex tensors, contraction and truncated SVD.
//! * [`mps`]: matrix product states and operators, canonical forms,
//!   expectation values, entanglement entropy and dense conversion.
//! * [`automata`]: rule tables compiled into MPOs/MPSs, including the
//!   annealing Hamiltonian `-(1-s) Σ Xᵢ + s (Σ hᵢ Zᵢ + Σ Jᵢⱼ Zᵢ Zⱼ)`.
//! * [`encoding`]: knapsack → QUBO (unbalanced penalization) → Ising.
//! * [`dmrg`]: two-site DMRG, penalty-projected excited states and gap scans.
//! * [`anneal`]: dense exact diagonalization, state-vector annealing,
//!   gap-driven schedules and a simulated-annealing QUBO sampler.
//! * [`solvers`]: instance generation, brute force, dynamic programming and
//!   report comparison.
//!
//! Qubit `k` (0-based) is the `k`-th most significant bit of a dense basis
//! index, `Z|0⟩ = |0⟩` and `Z|1⟩ = -|1⟩`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anneal;
pub mod automata;
pub mod dmrg;
pub mod encoding;
pub mod error;
pub mod mps;
pub mod solvers;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{C64, Tensor};
