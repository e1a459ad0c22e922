//! Host package for the `acceptance` test target.
//!
//! The target lives in its own package so that `cargo test --workspace`
//! runs it after every other test binary: a failing criterion stops cargo,
//! and the remaining suites should already have reported by then.
