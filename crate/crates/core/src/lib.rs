//! Deterministic correlation-decay algorithms for ferromagnetic two-spin
//! systems.
//!
//! The crate is `no_std` and only needs `alloc`. Everything is plain `f64`
//! arithmetic routed through [`num_traits::Float`] so that the same code runs
//! on targets without a system math library.
//!
//! Module map:
//!
//! * [`spin`]: instances, configuration weights, the brute-force oracle and
//!   the random-cluster split.
//! * [`tree`]: rooted trees, the ratio recursion and interval bounds.
//! * [`saw`]: self-avoiding-walk trees built from graphs.
//! * [`thresholds`]: critical degree and fields, fixed points, uniqueness.
//! * [`potentials`]: potential functions and their contraction certificates.
//! * [`fptas`]: truncated-tree marginals and the partition function estimator.
//! * [`experiments`]: spatial-mixing runs and the alternating-tree example.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod experiments;
pub mod fptas;
pub mod graphs;
pub mod numeric;
pub mod potentials;
pub mod saw;
pub mod spin;
pub mod thresholds;
pub mod tree;

pub use error::{Error, Result};
pub use spin::{Spin, SpinParams, SpinSystem, VertexId};
pub use tree::{BoundsPair, Ratio, RootedTree};
