//! Exact construction of crystallographic root systems, the exact coupling
//! 4-form and its canonical constant, and numerical verification that the
//! trigonometric prepotential satisfies the WDVV associativity equations.
//!
//! Modules:
//! - [`rootsystems`]: exact realizations, reflections, closures, projectors.
//! - [`exactform`]: the coupling tensor, canonical constant c, table audit,
//!   parity check, and multiplicity polynomial.
//! - [`prepotential`]: trilog/coth scalar pieces, third-derivative tensors,
//!   finite-difference validation, chamber sampling.
//! - [`wdvv`]: residuals in commutator and direct form, gamma scanning.
//! - [`dunkl`]: fiber partition by Weyl element and the fiber-wise identity
//!   check.
//! - [`cli`]: deterministic machine-readable reports and exit codes.

pub mod cli;
pub mod dunkl;
pub mod exactform;
pub mod linalg;
pub mod prepotential;
pub mod rat;
pub mod report;
pub mod rootsystems;
pub mod wdvv;
