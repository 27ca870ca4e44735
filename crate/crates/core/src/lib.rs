//! Spectral stability certificates for noisy matrices.
//!
//! Given a symmetric matrix `A` and a perturbation `E`, this crate decides
//! when a region of the real line keeps the same number of eigenvalues of
//! `A + E` as of `A`, bounds the smallest singular value and individual
//! eigenvalues of the noisy matrix, bounds the distance between spectral
//! projectors, and checks every inequality it relies on numerically
//! (eigendecomposition, resolvent contour quadrature, random sampling).

pub mod certify;
pub mod contour;
pub mod eigen;
pub mod error;
pub mod matrix;
pub mod randmat;
pub mod rectangular;
pub mod region;
pub mod svd;

pub use certify::{Certificate, KStrategy, Theorem};
pub use eigen::{operator_norm, spectral_decompose, SpectralDecomposition};
pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, DenseMatrix};
pub use region::{Interval, Region, RegionStats};
