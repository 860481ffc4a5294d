//! Twisted spherical means on ℂⁿ: exact bigraded harmonic algebra, sphere
//! quadrature, radial-profile calculus and annular characterization checks.

pub mod cq;
pub mod error;
pub mod fields;
pub mod functions;
pub mod harmonic;
pub mod linalg;
pub mod poly;
pub mod quad;
pub mod radial;
pub mod selftest;
pub mod zspace;

pub use error::{Error, Result};
