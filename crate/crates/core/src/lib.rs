//! Resolvent kernels on rotationally symmetric model manifolds and decay
//! bounds for their spherical sums.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod interp;
pub mod ode;
pub mod quad;
pub mod specfun;
pub mod model;
pub mod resolvent;
pub mod bounds;
pub mod verify;
pub mod output;
pub mod cli;
