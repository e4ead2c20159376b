//! Numerical toolkit for firmly nonexpansive mappings and the sets they
//! generate.
//!
//! The crate has two halves that meet in the middle:
//!
//! * An **operator calculus**: projections onto primitive convex sets,
//!   proximal maps of convex functions, resolvents of monotone linear
//!   operators, convex combinations of all of these, the resolvent average,
//!   and a fixed-point iteration engine with convergence/divergence
//!   diagnostics ([`convex_sets`], [`prox_calculus`], [`operators`],
//!   [`averaging`], [`iteration`]).
//!
//! * A **discretized set calculus**: point clouds and occupancy grids with
//!   closure, relative interior, convex hull, Minkowski combinations,
//!   Hausdorff distances, and the near-equality / near-convexity tests that
//!   let range identities be verified numerically ([`set_analysis`]).
//!
//! Everything is deterministic given a seed; all maps are immutable after
//! construction and safe to evaluate from multiple threads.

pub mod averaging;
pub mod convex_sets;
pub mod descriptor;
mod error;
pub mod iteration;
pub mod operators;
pub mod prox_calculus;
pub mod roots;
pub mod sampling;
pub mod set_analysis;
mod vector;

pub use error::{Error, Result};
pub use vector::Vector;
