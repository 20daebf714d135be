//! Spectra and resolvent norms of damped-wave generators, quadratic operator
//! pencils and generalized Airy operators on truncated grids.

pub mod airy;
pub mod coeffs;
pub mod config;
pub mod error;
pub mod generator;
pub mod grids;
pub mod linalg;
pub mod oscillator;
pub mod output;
pub mod quadratic;
pub mod semigroup;
pub mod verify;

pub use coeffs::CoefficientFunction;
pub use error::{Error, Result};
pub use grids::{Grid1D, NormTag, Space};
pub use linalg::C64;
