//! Random test fields.

use alloc::vec;

use num_complex::Complex64;
use rand::Rng;

use crate::torus::{leray_project, ScalarField, Spectrum, TorusGrid, VectorField};

/// Real field with random Gaussian-like coefficients on `max_a |k_a| <= bandwidth`.
///
/// Coefficients decay like `1/(1+|k|^2)` so the fields look smooth at every
/// bandwidth. With `mean_zero` the zero mode is dropped.
pub fn bandlimited<R: Rng + ?Sized>(
    grid: TorusGrid,
    bandwidth: usize,
    mean_zero: bool,
    rng: &mut R,
) -> ScalarField {
    let d = grid.dim();
    let bw = bandwidth.min(grid.n() / 2 - 1) as i64;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut idx = vec![0usize; d];
    for (flat, c) in coeffs.iter_mut().enumerate() {
        grid.unravel(flat, &mut idx);
        let mut k2 = 0i64;
        let mut inside = true;
        for &i in &idx {
            let k = grid.wavenumber(i);
            inside &= k.abs() <= bw;
            k2 += k * k;
        }
        if !inside || (mean_zero && k2 == 0) {
            continue;
        }
        let amp = 1.0 / (1.0 + k2 as f64);
        *c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amp;
    }
    Spectrum::from_coeffs(grid, coeffs)
        .expect("sized to grid")
        .to_field()
}

pub fn bandlimited_vector<R: Rng + ?Sized>(
    grid: TorusGrid,
    bandwidth: usize,
    mean_zero: bool,
    rng: &mut R,
) -> VectorField {
    VectorField::from_components(
        (0..grid.dim())
            .map(|_| bandlimited(grid, bandwidth, mean_zero, rng))
            .collect(),
    )
    .expect("same grid")
}

/// Random divergence-free, mean-zero drift of the given bandwidth.
pub fn divergence_free<R: Rng + ?Sized>(grid: TorusGrid, bandwidth: usize, rng: &mut R) -> VectorField {
    leray_project(&bandlimited_vector(grid, bandwidth, true, rng))
}
