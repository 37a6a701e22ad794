//! quopt: a workbench for quantum-assisted combinatorial optimization.
//!
//! The crate walks a capacitated vehicle routing instance through the full
//! decision tree of a hybrid solution: capacity clustering, one-hot QUBO
//! and Ising encoding with automated penalty and scaling selection, exact
//! statevector simulation of QAOA circuits, a lineup of classical
//! optimizers, monitoring artifacts, and ranked recommendations of complete
//! solution paths against classical baselines.

pub mod ansatz;
pub mod decompose;
pub mod encode;
pub mod error;
pub mod instances;
pub mod monitor;
pub mod optimizers;
pub mod pathfinder;
pub mod qsim;

pub use error::{Error, Result};
