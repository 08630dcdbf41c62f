//! Schmüdgen-type sum-of-squares certificates on the hypercube `[-1,1]ⁿ`
//! built with the Jackson kernel operator.
//!
//! The pipeline: represent `f` in the tensor Chebyshev basis
//! ([`chebpoly`]), invert the diagonal kernel operator ([`kernelop`]),
//! check the preimage is nonnegative, and expand `f + η` as a positive
//! quadrature combination ([`quadrature`]) of kernel slices, each of which
//! is decomposed constructively ([`sos1d`]). The result is checked by
//! re-expansion ([`certificate`]).

pub mod certificate;
pub mod chebpoly;
pub mod error;
pub mod jackson;
pub mod kernelop;
pub mod quadrature;
pub mod sos1d;

pub use chebpoly::{ChebPoly, MonoPoly, Multidegree};
pub use error::{Error, Result};
