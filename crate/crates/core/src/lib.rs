//! Margulis invariants, affine cross ratios and properness diagnostics for
//! affine deformations of free groups acting on `sl(n, R)` through the
//! adjoint representation.

pub mod affine;
pub mod cartan;
pub mod cli;
pub mod cyclic;
pub mod error;
pub mod fixtures;
pub mod freegroup;
pub mod hitchin;
pub mod numkernel;
pub mod spectra;

pub use error::{Error, Result};
pub use numkernel::Mat;
