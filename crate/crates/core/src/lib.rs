//! Direct-coupling coherent observers for closed linear quantum systems.
//!
//! The crate builds the commutation structure and Hamiltonian algebra of
//! linear quantum systems, synthesizes a direct-coupled observer for a plant
//! with trivial free dynamics, and propagates the joint plant/observer
//! system in the Heisenberg picture through its real transition matrix.
//! Running time averages of that matrix expose the observer's convergence
//! property, and the `experiment` module turns all of this into
//! reproducible CSV scenarios.
//!
//! Variables are always ordered as interleaved quadrature pairs
//! `(q_1, p_1, q_2, p_2, ...)`.

pub mod ccr;
pub mod closed_form;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod simulation;
pub mod synthesis;

pub use error::{Error, Result};
pub use linalg::Matrix;
