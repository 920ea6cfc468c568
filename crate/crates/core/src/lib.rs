//! Exact-arithmetic toolkit for logarithmic matrices over truncated p-adic
//! power-series rings, with Iwasawa-algebra structure tools (involution,
//! Weierstrass invariants, characteristic polynomials) on top.

pub mod error;
pub mod iwasawa;
pub mod json;
pub mod logmatrix;
pub mod padic;
pub mod report;
pub mod sample;
pub mod series;

pub use error::{Error, Result};
pub use logmatrix::{FrobeniusData, SeriesMatrix, Side};
pub use padic::PadicScalar;
pub use series::TruncatedSeries;
