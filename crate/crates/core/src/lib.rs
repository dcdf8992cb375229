//! Exact finite-precision toolkit for p-adic dynamics on the Markoff-type
//! surfaces `x^2 + y^2 + z^2 = xyz + D`.
//!
//! Layering, bottom up: [`padic`] arithmetic, [`chebyshev`] polynomials and
//! companion matrices, [`surface`] points and automorphisms, [`flow`]
//! interpolation of iterates, [`polydisk`] charts, [`census`] enumeration
//! and orbits, and the [`certify`] pipeline.

pub mod census;
pub mod certify;
pub mod chebyshev;
pub mod error;
pub mod flow;
pub mod padic;
pub mod polydisk;
pub mod report;
pub mod surface;

pub use error::{Error, Result};
pub use padic::PadicInt;
pub use report::Report;

/// Version tag carried by every JSON report.
pub const SCHEMA_VERSION: u32 = 1;
