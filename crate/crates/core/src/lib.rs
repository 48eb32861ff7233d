//! Band-limited fast multipole summation of radial basis function expansions.

pub mod bandlimit;
pub mod error;
pub mod experiments;
pub mod fmm;
pub mod geometry;
pub mod io;
pub mod kernels;
pub mod mlfmm;
pub mod quadrature;
pub mod solver;
pub mod special;

pub use error::{Error, Result};
pub use kernels::{FourierValue, RadialKernel, TransformKind, WendlandForm};
