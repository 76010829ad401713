//! Spherically symmetric asymptotically flat vacuum initial data for the
//! Einstein constraint equations via the radial conformal method.

// `!(x <= tol)` is used deliberately so that NaN fails every check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conformal;
pub mod error;
pub mod radial;
pub mod scenario;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
