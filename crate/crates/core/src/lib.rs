//! Finite element analysis of nonlocal Euler-Bernoulli beams whose strain is a
//! Riesz-Caputo fractional derivative of the displacement field.
//!
//! The pipeline is: [`beam::BeamSpec`] → [`mesh::Mesh`] → nonlocal stiffness and
//! load ([`assembly`]) → constrained solve and field recovery ([`solve`]).
//! [`bench`] drives the manufactured-solution, convergence and parametric studies.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod beam;
pub mod bench;
pub mod error;
pub mod fracops;
pub mod mesh;
pub mod par;
pub mod solve;

pub use assembly::{AssemblyOptions, Mode, NonlocalSystem, PartialHorizon};
pub use beam::{BeamSpec, BoundaryCondition, FractionalParams, LoadCase};
pub use error::{Error, Result};
pub use fracops::{FractionalOrder, Horizon};
pub use mesh::{ElementKind, Mesh};
pub use solve::{ConstraintSet, Normalization, SolutionField};
