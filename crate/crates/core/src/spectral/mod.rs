//! Grids, spectral fields, transforms and the Fourier operator calculus.

mod field;
mod grid;
mod init;
mod ops;

pub use field::{SpectralField, TensorField, VectorField};
pub use grid::GridSpec;
pub use init::{make_initial_data, periodized_gaussian, random_slope_band_limited, InitialData};
pub use ops::{
    divergence_of_tensor, divergence_ratio, fractional_laplacian, gradient, heat_semigroup,
    heat_semigroup_vec, laplacian, leray_project, nonlinear_term, riesz_transform,
    tensor_product_dealiased, ZERO_MODE_TOL,
};
