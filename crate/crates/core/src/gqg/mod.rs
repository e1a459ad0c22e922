//! Generalized q-Gaussian crossed products `A ⋊ Γ_q(G, K)` at desk scale.
//!
//! `G` is a finite group acting on a finite set `X` (so `A = ℓ^∞(X)` with the
//! normalized counting trace) and `K` is replaced by `ℝ^d`.

mod gap;
mod group;
mod model;
mod relations;

pub use gap::{spectral_gap, GapReport, POSITIVITY_TOL};
pub use group::{builtin_action, load_action, FiniteGroup, GroupAction, GroupSpec};
pub use model::{model_size, CrossedProductModel, KronTerm, ModelOp, RepChoice, MODEL_LIMIT};
pub use relations::*;
