//! Geometric quantum speed limits for ground-state preparation with restricted
//! control spaces.
//!
//! The crate compares two lengths for a protocol `λ(t)`:
//!
//! * `l_g`, the Fubini–Study length of a path of instantaneous ground states
//!   inside the ground-state manifold, and
//! * `l_E = ∫ δE dt`, the Fubini–Study length of the actually evolving state.
//!
//! Four model systems are provided (a qubit on a circle, a shifted and a
//! squeezed harmonic oscillator, and a linearly driven qutrit), together with
//! metric oracles, time-evolution engines and ready-made scenarios.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod linalg;
pub mod model;
pub mod protocols;
pub mod quad;

pub use error::{Error, Result};
pub use model::{ControlPoint, DenseHamiltonian, Family, StateVector, C64};
