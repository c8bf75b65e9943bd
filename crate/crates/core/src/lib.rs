//! Compact gas-kinetic finite-volume solver for steady 2D compressible flow on
//! unstructured meshes, accelerated by agglomeration multigrid with
//! multi-color LU-SGS smoothing.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agglomeration;
pub mod boundary;
pub mod coloring;
pub mod driver;
pub mod error;
pub mod gas;
pub mod kinetic;
pub mod mesh;
pub mod multigrid;
pub mod reconstruction;
pub mod residual;
pub mod smoother;

pub use error::{Error, MeshError, Result, StateError};
pub use gas::{Conserved, Gas, Primitive, Slopes};
