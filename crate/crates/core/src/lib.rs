//! Spectral laboratory for the semiclassical Robin Laplacian
//! `-h^2 Laplacian` with boundary condition `du/dnu = h^{-1/2} u`.

pub mod decay;
pub mod effective_op;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod model1d;
pub mod numerics;
pub(crate) mod par;
pub mod robin2d;
pub mod steklov;

pub use error::{Error, Result};
