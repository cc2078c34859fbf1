//! Statevector simulation and fast gradient estimation for structured
//! parameterized quantum circuits.
//!
//! The crate centers on two circuit classes whose gradients can be estimated
//! from far fewer circuits than the parameter-shift baseline:
//!
//! - **Commuting-generator circuits** ([`grad`]): an arbitrary preparation
//!   `V`, parameterized gates `exp(-i θ_j G_j)` with mutually commuting Pauli
//!   generators, and a Pauli observable. The whole gradient, all same-order
//!   (and even all same-parity) partial derivatives, and the Fisher
//!   information matrix are each estimable by post-processing samples from a
//!   single circuit per diagonal observable group.
//! - **Commuting-block circuits** ([`block`]): ordered blocks of commuting
//!   generators with a uniform commute/anticommute relation between blocks.
//!   The gradient of a `B`-block circuit is estimable from at most `2B - 1`
//!   ancilla-assisted circuits on `N + 1` qubits.
//!
//! Supporting modules: [`pauli`] (phase-exact Pauli algebra, cyclic twirls,
//! anticommuting sets, Lie-closure dimensions), [`sim`] (dense statevector
//! simulator with seeded sampling), [`dense`] (independent dense-matrix
//! reference used for verification), [`models`] (the bars-and-dots
//! classification benchmark with exact shot accounting), and [`experiment`]
//! (the declarative experiment runner behind the `paragrad` binary).
//!
//! See the crate `examples/` directory for one runnable example per major
//! capability.

pub mod block;
pub mod dense;
pub mod error;
pub mod experiment;
pub mod grad;
pub mod models;
pub mod pauli;
pub mod report;
pub mod sim;

pub use error::{Error, Result};
