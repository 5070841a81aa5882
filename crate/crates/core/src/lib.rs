//! Differentiation of functions along Lipschitz unit vector fields.
//!
//! Perturbation maps `S_s(X) = X + s·v(X)` and their certified inverses,
//! directional averages and maximal operators, grid measure estimates, and
//! runners that check the associated inequalities numerically.

pub mod averaging;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod measure;
pub mod perturb;
pub mod point;
pub mod quadrature;

pub use error::{Error, Result};
pub use point::{BoxRegion, Point, MAX_DIM};
