use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::grid::TorusGrid;
use super::spectral::{self, Spectrum};
use crate::error::{Error, Result};

/// Real scalar field sampled on a torus grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: TorusGrid,
    values: Vec<f64>,
}

/// Vector field with one scalar field per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: TorusGrid,
    comps: Vec<ScalarField>,
}

impl ScalarField {
    pub fn zeros(grid: TorusGrid) -> Self {
        ScalarField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        ScalarField {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn from_values(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(ScalarField { grid, values })
    }

    /// Samples `f` at every grid point; `f` receives the point's coordinates.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let d = grid.dim();
        let mut idx = vec![0usize; d];
        let mut x = vec![0.0; d];
        let values = (0..grid.len())
            .map(|flat| {
                grid.unravel(flat, &mut idx);
                for (xa, &ia) in x.iter_mut().zip(&idx) {
                    *xa = grid.coord(ia);
                }
                f(&x)
            })
            .collect();
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.weight()
    }

    /// Integral over the torus; equal to the mean because the torus has unit volume.
    pub fn integral(&self) -> f64 {
        self.mean()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "fields on different grids");
        ScalarField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// In-place `self += c * other`, used to accumulate large fields without copies.
    pub fn axpy(&mut self, c: f64, other: &ScalarField) {
        assert_eq!(self.grid, other.grid, "fields on different grids");
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }

    pub fn add_scalar(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    /// Pointwise product on the grid (no de-aliasing).
    pub fn pointwise(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    /// The same field with its mean removed.
    pub fn mean_free(&self) -> Self {
        let m = self.mean();
        self.add_scalar(-m)
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::of(self)
    }

    /// Spectral derivative along `axis`; the Nyquist mode is dropped.
    pub fn partial(&self, axis: usize) -> ScalarField {
        let n = self.grid.n();
        let mult: Vec<Complex64> = (0..n)
            .map(|i| {
                if self.grid.is_nyquist(i) {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, 2.0 * core::f64::consts::PI * self.grid.wavenumber(i) as f64)
                }
            })
            .collect();
        let mut values = self.values.clone();
        spectral::real_axis_multiplier(&mut values, self.grid, axis, &mult);
        ScalarField {
            grid: self.grid,
            values,
        }
    }

    pub fn gradient(&self) -> VectorField {
        VectorField {
            grid: self.grid,
            comps: (0..self.grid.dim()).map(|a| self.partial(a)).collect(),
        }
    }

    /// Laplacian as the sum of squared first-derivative multipliers, so it
    /// coincides with `divergence(gradient(.))` in spectral arithmetic.
    pub fn laplacian(&self) -> ScalarField {
        let n = self.grid.n();
        let mult: Vec<Complex64> = (0..n)
            .map(|i| {
                if self.grid.is_nyquist(i) {
                    Complex64::new(0.0, 0.0)
                } else {
                    let k = 2.0 * core::f64::consts::PI * self.grid.wavenumber(i) as f64;
                    Complex64::new(-k * k, 0.0)
                }
            })
            .collect();
        let mut out = ScalarField::zeros(self.grid);
        for axis in 0..self.grid.dim() {
            let mut values = self.values.clone();
            spectral::real_axis_multiplier(&mut values, self.grid, axis, &mult);
            for (o, v) in out.values.iter_mut().zip(&values) {
                *o += v;
            }
        }
        out
    }
}

impl VectorField {
    pub fn zeros(grid: TorusGrid) -> Self {
        VectorField {
            grid,
            comps: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    pub fn from_components(comps: Vec<ScalarField>) -> Result<Self> {
        let grid = comps.first().ok_or(Error::GridMismatch)?.grid;
        if comps.len() != grid.dim() || comps.iter().any(|c| c.grid != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(VectorField { grid, comps })
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(&[f64], usize) -> f64) -> Self {
        VectorField {
            grid,
            comps: (0..grid.dim())
                .map(|a| ScalarField::from_fn(grid, |x| f(x, a)))
                .collect(),
        }
    }

    /// `value * e_axis`.
    pub fn along(value: ScalarField, axis: usize) -> Self {
        let grid = value.grid;
        let mut out = VectorField::zeros(grid);
        out.comps[axis] = value;
        out
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn component(&self, axis: usize) -> &ScalarField {
        &self.comps[axis]
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.comps
    }

    pub fn divergence(&self) -> ScalarField {
        let mut out = ScalarField::zeros(self.grid);
        for (axis, c) in self.comps.iter().enumerate() {
            out.axpy(1.0, &c.partial(axis));
        }
        out
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let mut sq = vec![0.0; self.grid.len()];
        for c in &self.comps {
            for (s, v) in sq.iter_mut().zip(c.values()) {
                *s += v * v;
            }
        }
        ScalarField {
            grid: self.grid,
            values: sq.into_iter().map(num_traits::Float::sqrt).collect(),
        }
    }

    pub fn mean(&self) -> Vec<f64> {
        self.comps.iter().map(ScalarField::mean).collect()
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_components(|f| f * c)
    }

    /// Pointwise `scalar * self`.
    pub fn times_scalar(&self, s: &ScalarField) -> Self {
        self.map_components(|f| f.pointwise(s))
    }

    pub fn map_components(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        VectorField {
            grid: self.grid,
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn axpy(&mut self, c: f64, other: &VectorField) {
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            a.axpy(c, b);
        }
    }

    pub fn component_mut(&mut self, axis: usize) -> &mut ScalarField {
        &mut self.comps[axis]
    }

    pub fn max_abs(&self) -> f64 {
        self.magnitude().max_abs()
    }
}

impl<'a> Add for &'a ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &'a ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl<'a> Sub for &'a ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &'a ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.map(|a| a * rhs)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.map(|a| -a)
    }
}

impl<'a> Add for &'a VectorField {
    type Output = VectorField;
    fn add(self, rhs: &'a VectorField) -> VectorField {
        VectorField {
            grid: self.grid,
            comps: self.comps.iter().zip(&rhs.comps).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub for &'a VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &'a VectorField) -> VectorField {
        VectorField {
            grid: self.grid,
            comps: self.comps.iter().zip(&rhs.comps).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<f64> for &VectorField {
    type Output = VectorField;
    fn mul(self, rhs: f64) -> VectorField {
        self.scale(rhs)
    }
}
