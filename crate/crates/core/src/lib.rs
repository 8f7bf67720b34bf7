//! Extrinsic geometry of surfaces immersed in Euclidean space.
//!
//! The crate evaluates fundamental forms and radial (extrinsic distance)
//! quantities on parametric surfaces, cuts them into extrinsic sublevel sets
//! `M_t = {x : |x - x0| < t}`, and turns the classical identities that hold
//! on those sets into numerical residuals: the Gauss–Bonnet boundary
//! identity, the first-variation identity, monotone weighted area ratios,
//! quadratic area growth, and the limit of `area(M_t) / (π t²)`.
//!
//! Everything here is `no_std` with `alloc`; file formats, threading and the
//! command line live in the `extrinsic` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod curvature;
pub mod discrete;
mod error;
pub mod identities;
pub mod immersion;
pub mod linalg;
pub mod sublevel;
pub mod sum;

pub use error::{Error, Result};
pub use linalg::{AmbientVec, Sym2, MAX_AMBIENT_DIM};
