//! Sharp L^p norms of Toeplitz eigenfunctions and quasimodes on the Fock
//! space of ℂⁿ and on the projective space ℂℙⁿ.
//!
//! Closed-form norms are computed in the log domain ([`LogReal`]) and checked
//! against independent quadrature in [`quad`]. The [`spectral`] module builds
//! truncated Toeplitz matrices, spectral windows and random quasimodes, and
//! [`fbi`] discretises the FBI transform onto the weighted space of
//! Φ(z) = Im(z)²/2.

pub mod cpn;
pub mod error;
pub mod fbi;
pub mod fock;
pub mod quad;
pub mod spectral;
pub mod special_fn;
pub mod types;

pub use error::{Error, Result};
pub use special_fn::LogReal;
pub use types::{binomial, Exponent, MultiIndex};
