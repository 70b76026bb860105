//! Power-log transseries: series in the monomials `x^alpha L^k` with
//! `L = -1/log x`, truncated to explicit exactness regions.
//!
//! The crate covers ring arithmetic, composition and inversion, Lie
//! brackets, reduction to finite normal forms by elementary changes of
//! variables, and embedding of parabolic and hyperbolic series into flows
//! of formal vector fields.

pub mod cli;
pub mod coeff;
pub mod compose;
pub mod embed;
pub mod error;
pub mod grid;
pub mod normalize;
pub mod series;

pub use coeff::{Coefficient, Rational};
pub use error::{Error, Result};
pub use grid::{Exponent, Region, Q};
pub use series::{Classification, Transseries};
