//! Periodic grids, fields and their spectral calculus.

pub mod field;
pub mod grid;
pub mod norm;
pub mod spectral;

pub use field::{ScalarField, VectorField};
pub use grid::{TorusGrid, DEFAULT_POINT_BUDGET};
pub use norm::{NormFlavor, NormSpec, Normed};
pub use spectral::{
    antidivergence_unchecked, bandwidth, check_mean_zero, dealiased_product, dilate, dilate_unchecked, dilate_vector,
    inv_laplacian, leray_project, mollify, mollify_vector, resample, resample_vector, translate, MollifierSpec, Spectrum,
};
