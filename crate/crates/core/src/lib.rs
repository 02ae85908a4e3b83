//! Exact computations on analytic curve singularities
//! `R = k[[g_1(t), ..., g_n(t)]]` over the rationals.

pub mod curve;
pub mod differentials;
pub mod error;
pub mod implicitize;
pub mod linalg;
pub mod poly;
pub mod pullback;
pub mod report;
pub mod series;
pub mod staircase;
pub mod transform;

pub use error::{Error, Result};
pub use series::TruncatedSeries;

/// Exact rational numbers over arbitrary-precision integers.
pub type Rational = num_rational::BigRational;
