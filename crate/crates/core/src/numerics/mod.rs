//! Numerical building blocks shared by the spectral modules.

pub mod bessel;
pub mod eigen;
pub mod fit;
pub mod fourier;
pub mod quadrature;
pub mod roots;
