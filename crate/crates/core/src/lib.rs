//! Radial perfectly matched layers and Hardy-space infinite elements for the
//! scalar anisotropic wave equation in two dimensions.
//!
//! The crate provides the analytic machinery of radial complex scalings
//! (classical and complex-frequency-shifted), the classification of source
//! positions into stable/unstable sets, the Laplace-domain fundamental
//! solution built on modified Bessel functions, the radial Hardy-space
//! infinite-element matrices, desk-scale 1D time-domain solvers with three
//! exterior treatments, and a semi-analytic error oracle for the 1D layer
//! problem (explicit series and convolution-quadrature inversion).

pub mod anisotropy;
pub mod band;
pub mod bessel;
pub mod erroracle;
pub mod fem;
pub mod fundsol;
pub mod hardy;
pub mod output;
pub mod quad;
pub mod scaling;
pub mod solver1d;

mod error;

pub use error::{Error, Result};
pub use num_complex::Complex64;
