use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::field::{ScalarField, VectorField};
use super::grid::TorusGrid;
use crate::error::{Error, Result};
use crate::fft::{self, Direction, Fft};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Normalized discrete Fourier coefficients: `f(x_i) = sum_k c_k exp(2 pi i k . i / N)`.
///
/// Storage follows the field layout; index `i` along an axis carries frequency
/// `grid.wavenumber(i)`.
#[derive(Clone, Debug)]
pub struct Spectrum {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn of(field: &ScalarField) -> Self {
        let grid = field.grid();
        let mut coeffs: Vec<Complex64> = field
            .values()
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        fft::transform_all(&mut coeffs, grid.n(), grid.dim(), Direction::Forward);
        let w = grid.weight();
        for c in &mut coeffs {
            *c *= w;
        }
        Spectrum { grid, coeffs }
    }

    pub fn from_coeffs(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Spectrum { grid, coeffs })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Back to physical space; the imaginary part is discarded.
    pub fn to_field(&self) -> ScalarField {
        let mut data = self.coeffs.clone();
        fft::transform_all(&mut data, self.grid.n(), self.grid.dim(), Direction::Inverse);
        let values = data.into_iter().map(|c| c.re).collect();
        ScalarField::from_values(self.grid, values).expect("same grid")
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest `max_a |k_a|` among coefficients above `rel_tol * max |c|`.
    pub fn bandwidth(&self, rel_tol: f64) -> usize {
        let cmax = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        if cmax == 0.0 {
            return 0;
        }
        let mut idx = vec![0usize; self.grid.dim()];
        let mut bw = 0;
        for (flat, c) in self.coeffs.iter().enumerate() {
            if c.norm() > rel_tol * cmax {
                self.grid.unravel(flat, &mut idx);
                for &i in &idx {
                    bw = bw.max(self.grid.wavenumber(i).unsigned_abs() as usize);
                }
            }
        }
        bw
    }

    /// Multiplies each coefficient by `mult(k)` where `k` is the signed frequency vector.
    pub fn apply(&mut self, mult: impl Fn(&[i64]) -> Complex64) {
        let d = self.grid.dim();
        let mut idx = vec![0usize; d];
        let mut k = vec![0i64; d];
        for (flat, c) in self.coeffs.iter_mut().enumerate() {
            self.grid.unravel(flat, &mut idx);
            for (ka, &ia) in k.iter_mut().zip(&idx) {
                *ka = self.grid.wavenumber(ia);
            }
            *c *= mult(&k);
        }
    }
}

/// Default threshold for deciding which coefficients count toward the bandwidth.
pub const BANDWIDTH_TOL: f64 = 1e-12;

/// Applies a one-dimensional Fourier multiplier along `axis` to a real array.
///
/// `mult[i]` acts on storage index `i` and must be Hermitian
/// (`mult[n - i] = conj(mult[i])`) so that real input stays real. Two lines are
/// packed into one complex transform.
pub(crate) fn real_axis_multiplier(values: &mut [f64], grid: TorusGrid, axis: usize, mult: &[Complex64]) {
    let n = grid.n();
    let stride = grid.stride(axis);
    let outer = grid.len() / (n * stride);
    let fwd = Fft::new(n, Direction::Forward);
    let inv = Fft::new(n, Direction::Inverse);
    let scale = 1.0 / n as f64;
    let mut scratch = vec![ZERO; n];
    let mut line = vec![ZERO; n];
    let apply = |line: &mut [Complex64], scratch: &mut [Complex64]| {
        fwd.process(line, scratch);
        for (c, m) in line.iter_mut().zip(mult) {
            *c *= m * scale;
        }
        inv.process(line, scratch);
    };
    if stride == 1 {
        for pair in values.chunks_exact_mut(2 * n) {
            let (a, b) = pair.split_at_mut(n);
            for t in 0..n {
                line[t] = Complex64::new(a[t], b[t]);
            }
            apply(&mut line, &mut scratch);
            for t in 0..n {
                a[t] = line[t].re;
                b[t] = line[t].im;
            }
        }
        return;
    }
    // stride is a power of n >= 8, hence even: pair lane `i` with lane `i + 1`
    const LANES: usize = 16;
    let lanes = LANES.min(stride);
    let mut buf = vec![ZERO; (lanes / 2) * n];
    for o in 0..outer {
        let base = o * n * stride;
        let mut i0 = 0;
        while i0 < stride {
            let b = lanes.min(stride - i0);
            for t in 0..n {
                let row = base + t * stride + i0;
                for p in 0..b / 2 {
                    buf[p * n + t] = Complex64::new(values[row + 2 * p], values[row + 2 * p + 1]);
                }
            }
            for p in 0..b / 2 {
                apply(&mut buf[p * n..(p + 1) * n], &mut scratch);
            }
            for t in 0..n {
                let row = base + t * stride + i0;
                for p in 0..b / 2 {
                    let c = buf[p * n + t];
                    values[row + 2 * p] = c.re;
                    values[row + 2 * p + 1] = c.im;
                }
            }
            i0 += b;
        }
    }
}

/// Applies a real, even full-dimensional multiplier to a real field.
pub fn real_multiplier(field: &ScalarField, mult: impl Fn(&[i64]) -> f64) -> ScalarField {
    let mut s = field.spectrum();
    s.apply(|k| Complex64::new(mult(k), 0.0));
    s.to_field()
}

fn sq_freq(grid: TorusGrid, k: &[i64]) -> f64 {
    let half = (grid.n() / 2) as i64;
    k.iter()
        .filter(|&&ka| ka != -half)
        .map(|&ka| (2.0 * PI * ka as f64).powi(2))
        .sum()
}

/// Relative size of the mean accepted by `inv_laplacian`.
pub const MEAN_TOL: f64 = 1e-10;

/// Mean-zero solution of `Delta u = f`.
pub fn inv_laplacian(f: &ScalarField) -> Result<ScalarField> {
    check_mean_zero(f)?;
    Ok(inv_laplacian_unchecked(f))
}

/// Rejects fields whose mean exceeds `MEAN_TOL` times their L2 norm.
pub fn check_mean_zero(f: &ScalarField) -> Result<()> {
    let mean = f.mean();
    let norm = super::norm::lp(f, 2.0)?;
    if mean.abs() > MEAN_TOL * norm {
        return Err(Error::NonZeroMean { mean, norm });
    }
    Ok(())
}

/// `Delta^{-1}` on the mean-free part, ignoring any mean of `f`.
pub(crate) fn inv_laplacian_unchecked(f: &ScalarField) -> ScalarField {
    let grid = f.grid();
    real_multiplier(f, |k| {
        let s = sq_freq(grid, k);
        if s == 0.0 {
            0.0
        } else {
            -1.0 / s
        }
    })
}

/// Leray projection onto divergence-free fields; the mean of `b` is kept.
pub fn leray_project(b: &VectorField) -> VectorField {
    let grid = b.grid();
    let d = grid.dim();
    let half = (grid.n() / 2) as i64;
    let mut spectra: Vec<Spectrum> = b.components().iter().map(ScalarField::spectrum).collect();
    let total = grid.len();
    let mut idx = vec![0usize; d];
    let mut kv = vec![0.0; d];
    for flat in 0..total {
        grid.unravel(flat, &mut idx);
        let mut k2 = 0.0;
        for a in 0..d {
            let ka = grid.wavenumber(idx[a]);
            kv[a] = if ka == -half { 0.0 } else { 2.0 * PI * ka as f64 };
            k2 += kv[a] * kv[a];
        }
        if k2 == 0.0 {
            continue;
        }
        let mut dot = ZERO;
        for a in 0..d {
            dot += spectra[a].coeffs[flat] * kv[a];
        }
        for a in 0..d {
            spectra[a].coeffs[flat] -= dot * (kv[a] / k2);
        }
    }
    VectorField::from_components(spectra.iter().map(Spectrum::to_field).collect()).expect("same grid")
}

/// `R = grad Delta^{-1}`: a vector field whose divergence is the mean-free part of `f`.
pub fn antidivergence_unchecked(f: &ScalarField) -> VectorField {
    inv_laplacian_unchecked(f).gradient()
}

/// `f(x - shift)` by spectral interpolation; Nyquist modes are dropped so the
/// result stays real for non-grid shifts.
pub fn translate(f: &ScalarField, shift: &[f64]) -> ScalarField {
    let grid = f.grid();
    let half = (grid.n() / 2) as i64;
    let mut s = f.spectrum();
    s.apply(|k| {
        if k.iter().any(|&ka| ka == -half) {
            return ZERO;
        }
        let phase: f64 = k.iter().zip(shift).map(|(&ka, &sa)| ka as f64 * sa).sum();
        Complex64::from_polar(1.0, -2.0 * PI * phase)
    });
    s.to_field()
}

/// Trigonometric interpolation onto another grid of the same dimension:
/// coefficients with `max_a |k_a| < min(N, N') / 2` are kept, the rest dropped.
/// Refining a band-limited field this way reproduces the same function.
pub fn resample(f: &ScalarField, target: TorusGrid) -> Result<ScalarField> {
    let grid = f.grid();
    if grid.dim() != target.dim() {
        return Err(Error::GridMismatch);
    }
    let d = grid.dim();
    let keep = (grid.n().min(target.n()) / 2) as i64;
    let src = f.spectrum();
    let mut coeffs = vec![ZERO; target.len()];
    let mut idx = vec![0usize; d];
    let tn = target.n() as i64;
    for (flat, c) in src.coeffs().iter().enumerate() {
        grid.unravel(flat, &mut idx);
        let mut out = 0usize;
        let mut inside = true;
        for &i in &idx {
            let k = grid.wavenumber(i);
            inside &= k.abs() < keep;
            out = out * target.n() + k.rem_euclid(tn) as usize;
        }
        if inside {
            coeffs[out] = *c;
        }
    }
    Ok(Spectrum::from_coeffs(target, coeffs)?.to_field())
}

pub fn resample_vector(b: &VectorField, target: TorusGrid) -> Result<VectorField> {
    VectorField::from_components(
        b.components()
            .iter()
            .map(|c| resample(c, target))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Maximum coefficient bandwidth of a field at the default threshold.
pub fn bandwidth(f: &ScalarField) -> usize {
    f.spectrum().bandwidth(BANDWIDTH_TOL)
}

/// `f(lambda x)`, exact on the grid through an index remap.
pub fn dilate(f: &ScalarField, lambda: usize) -> Result<ScalarField> {
    if lambda == 0 {
        return Err(Error::InvalidParameter("dilation factor must be at least 1".into()));
    }
    let grid = f.grid();
    let bw = bandwidth(f);
    if lambda * bw > grid.n() / 2 {
        return Err(Error::Aliasing {
            lambda,
            bandwidth: bw,
            n: grid.n(),
        });
    }
    Ok(dilate_unchecked(f, lambda))
}

/// Grid remap `f(lambda x)` without the aliasing check.
pub fn dilate_unchecked(f: &ScalarField, lambda: usize) -> ScalarField {
    let grid = f.grid();
    let n = grid.n();
    let d = grid.dim();
    let map: Vec<usize> = (0..n).map(|i| grid.dilated_index(i, lambda)).collect();
    let src = f.values();
    let mut idx = vec![0usize; d];
    let values = (0..grid.len())
        .map(|flat| {
            grid.unravel(flat, &mut idx);
            let j = idx.iter().fold(0, |acc, &i| acc * n + map[i]);
            src[j]
        })
        .collect();
    ScalarField::from_values(grid, values).expect("same grid")
}

pub fn dilate_vector(b: &VectorField, lambda: usize) -> Result<VectorField> {
    let comps = b
        .components()
        .iter()
        .map(|c| dilate(c, lambda))
        .collect::<Result<Vec<_>>>()?;
    VectorField::from_components(comps)
}

/// The standard bump `exp(-1/(1-|x|^2))` mollifier at radius `eps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MollifierSpec {
    pub radius: f64,
}

impl MollifierSpec {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < 0.25) {
            return Err(Error::InvalidParameter("mollifier radius must lie in (0, 1/4)".into()));
        }
        Ok(MollifierSpec { radius })
    }

    fn profile(r2: f64) -> f64 {
        if r2 >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - r2)).exp()
        }
    }

    /// Kernel sampled on the grid around the origin, normalized to unit discrete mass.
    fn kernel(&self, grid: TorusGrid) -> ScalarField {
        let eps = self.radius;
        let n = grid.n();
        let d = grid.dim();
        let mut idx = vec![0usize; d];
        let mut values: Vec<f64> = (0..grid.len())
            .map(|flat| {
                grid.unravel(flat, &mut idx);
                let r2: f64 = idx
                    .iter()
                    .map(|&i| {
                        let off = grid.wavenumber(i) as f64 / n as f64 / eps;
                        off * off
                    })
                    .sum();
                Self::profile(r2)
            })
            .collect();
        let total: f64 = values.iter().sum();
        if total > 0.0 {
            for v in &mut values {
                *v /= total;
            }
        } else {
            values[0] = 1.0;
        }
        ScalarField::from_values(grid, values).expect("same grid")
    }
}

/// Periodic convolution with the mollifier, computed spectrally.
pub fn mollify(f: &ScalarField, m: &MollifierSpec) -> ScalarField {
    let grid = f.grid();
    let kernel = m.kernel(grid);
    // kernel samples are stored by offset index, so its unnormalized DFT is the multiplier
    let mut k: Vec<Complex64> = kernel.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::transform_all(&mut k, grid.n(), grid.dim(), Direction::Forward);
    let mut s = f.spectrum();
    for (c, kk) in s.coeffs.iter_mut().zip(&k) {
        *c *= kk.re;
    }
    s.to_field()
}

pub fn mollify_vector(b: &VectorField, m: &MollifierSpec) -> VectorField {
    b.map_components(|c| mollify(c, m))
}

/// Product of two fields with 3/2-rule zero padding; the result keeps
/// frequencies `|k_a| < N/2` only.
pub fn dealiased_product(a: &ScalarField, b: &ScalarField) -> ScalarField {
    assert_eq!(a.grid(), b.grid(), "fields on different grids");
    let grid = a.grid();
    let n = grid.n();
    let d = grid.dim();
    let m = 3 * n / 2;
    let mlen = m.pow(d as u32);
    let half = (n / 2) as i64;
    let sa = a.spectrum();
    let sb = b.spectrum();
    let mut buf = vec![ZERO; mlen];
    let mut idx = vec![0usize; d];
    let i_unit = Complex64::new(0.0, 1.0);
    for flat in 0..grid.len() {
        grid.unravel(flat, &mut idx);
        let mut target = 0usize;
        let mut nyq = false;
        for &i in &idx {
            let k = grid.wavenumber(i);
            nyq |= k == -half;
            target = target * m + k.rem_euclid(m as i64) as usize;
        }
        if !nyq {
            buf[target] = sa.coeffs[flat] + i_unit * sb.coeffs[flat];
        }
    }
    drop(sa);
    drop(sb);
    fft::transform_all(&mut buf, m, d, Direction::Inverse);
    for c in &mut buf {
        *c = Complex64::new(c.re * c.im, 0.0);
    }
    fft::transform_all(&mut buf, m, d, Direction::Forward);
    let inv_m = 1.0 / mlen as f64;
    let mut coeffs = vec![ZERO; grid.len()];
    let mut midx = vec![0usize; d];
    for (flat, c) in coeffs.iter_mut().enumerate() {
        grid.unravel(flat, &mut midx);
        let mut src = 0usize;
        let mut nyq = false;
        for &i in &midx {
            let k = grid.wavenumber(i);
            nyq |= k == -half;
            src = src * m + k.rem_euclid(m as i64) as usize;
        }
        if !nyq {
            *c = buf[src] * inv_m;
        }
    }
    Spectrum { grid, coeffs }.to_field()
}
