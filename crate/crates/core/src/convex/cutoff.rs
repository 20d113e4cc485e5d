use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::torus::{ScalarField, VectorField};

fn psi(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// C-infinity transition from 0 (for `t <= 0`) to 1 (for `t >= 1`), monotone in between.
pub fn ramp(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = psi(t);
        a / (a + psi(1.0 - t))
    }
}

/// Cutoff value at `|f_j| = v`: 0 up to `delta/(4d)`, 1 from `delta/(2d)`.
pub fn cutoff_value(v: f64, delta: f64, d: usize) -> f64 {
    let lo = delta / (4.0 * d as f64);
    let hi = delta / (2.0 * d as f64);
    ramp((v.abs() - lo) / (hi - lo))
}

/// The cutoffs `chi_j = ramp(|f_j|)` of every component of `f`.
pub fn build_cutoffs(f: &VectorField, delta: f64) -> Result<Vec<ScalarField>> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("cutoff threshold delta must be positive".into()));
    }
    let d = f.grid().dim();
    Ok(f
        .components()
        .iter()
        .map(|c| c.map(|v| cutoff_value(v, delta, d)))
        .collect())
}
