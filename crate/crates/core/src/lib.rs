//! Exact computer algebra for twisted generalized complex geometry on
//! invariant models: exterior algebra with Gaussian-rational coefficients,
//! generalized complex linear algebra, twisted and equivariant cohomology,
//! Cartan maps and Duistermaat-Heckman densities.

pub mod cartan;
pub mod cli;
pub mod error;
pub mod form;
pub mod gclinear;
pub mod gcy;
pub mod linalg;
pub mod model;
pub mod modelfile;
pub mod scalar;

pub use error::{Error, Result};
pub use form::{Blade, Form, WVec};
pub use scalar::{GaussRat, Monomial, Scalar};
