//! Desk-scale laboratory for q-Gaussian operator algebras.
//!
//! The crate realizes, at finite truncation, the objects needed to check
//! moment and Wick-calculus identities numerically:
//!
//! * [`partitions`]: pair partitions, singleton/pair partitions, crossings.
//! * [`qfock`]: truncated q-Fock spaces, field operators, second quantization.
//! * [`wick`]: Wick words, their product expansion and finite replica surrogates.
//! * [`gqg`]: generalized q-Gaussian crossed products by finite groups.
//! * [`rigidity`]: grid measures on the 2-torus under the dual `SL₂(ℤ)` action.
//!
//! Every construction is cross-checked in the test suites against an
//! independent combinatorial route.

pub mod error;
pub mod gqg;
pub mod linalg;
pub mod partitions;
pub mod qfock;
pub mod rigidity;
pub mod wick;

pub use error::{Error, Result};

/// Complex scalar used by every operator.
pub type C64 = num_complex::Complex64;
