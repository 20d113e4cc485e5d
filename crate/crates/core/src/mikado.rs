//! Mikado densities and fields: axis-parallel pipes carrying an odd transverse
//! profile, scaled so that `div W = div(Theta W) = 0`, `int Theta = int W = 0`
//! and `int Theta^j W^j = e_j`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::loglog_slope;
use crate::torus::norm::{lp, lp_vec};
use crate::torus::{ScalarField, TorusGrid, VectorField};

/// Grid cells required per unit of concentration: `N >= MIN_CELLS_PER_MU * mu`.
pub const MIN_CELLS_PER_MU: f64 = 8.0;

/// `gamma = (d-1)(1/p + 1/2 - 1 - 1/(d-1))`, positive iff `p < 2(d-1)/(d+1)`.
pub fn gamma(d: usize, p: f64) -> f64 {
    let dm = (d - 1) as f64;
    dm * (1.0 / p + 0.5 - 1.0 - 1.0 / dm)
}

pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// Unnormalized odd profile `d/dy_1 exp(-1/(1-|y|^2))` on the unit ball.
fn raw_profile(y: &[f64]) -> f64 {
    let r2: f64 = y.iter().map(|v| v * v).sum();
    if r2 >= 1.0 {
        return 0.0;
    }
    let one = 1.0 - r2;
    -2.0 * y[0] * (-1.0 / one).exp() / (one * one)
}

/// Serializable summary of a family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyManifest {
    pub d: usize,
    pub n: usize,
    pub p: f64,
    pub mu: f64,
    pub offsets: Vec<Vec<f64>>,
    pub measured_m: f64,
    pub gamma: f64,
}

/// The `d` Mikado pairs `(Theta^j, W^j)` at concentration `mu` on an `N`-grid.
///
/// Pipe `j` runs along `e_j`; all its transverse coordinates sit at
/// `(2j-1)/(2d) - 1/2` snapped to the grid, and its support has radius `1/mu`.
/// Only the transverse profile is stored; `d`-dimensional fields are
/// materialized on request.
#[derive(Clone, Debug)]
pub struct MikadoFamily {
    grid: TorusGrid,
    transverse: TorusGrid,
    p: f64,
    mu: f64,
    a_theta: f64,
    a_w: f64,
    /// Transverse profile centered at the origin, normalized so that
    /// `int s^2 = mu^{-(d-1)}`; every pipe is a grid translate of it.
    profile: ScalarField,
    centers: Vec<usize>,
    theta_scale: Vec<f64>,
    measured_m: f64,
    min_cells: f64,
}

/// Norms of one pipe measured on its transverse grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipeNorms {
    pub theta: f64,
    pub w: f64,
    pub grad_theta: f64,
    pub grad_w: f64,
}

impl MikadoFamily {
    pub fn build(grid: TorusGrid, p: f64, mu: f64) -> Result<Self> {
        Self::build_with_min_cells(grid, p, mu, MIN_CELLS_PER_MU)
    }

    /// As `build`, with `N >= min_cells * mu` as the resolution requirement.
    pub fn build_with_min_cells(grid: TorusGrid, p: f64, mu: f64, min_cells: f64) -> Result<Self> {
        let d = grid.dim();
        if d < 3 {
            return Err(Error::DimensionTooSmall(d));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!(
                "Mikado exponent p = {p} must lie in (1, inf)"
            )));
        }
        if !(mu > 2.0 * d as f64) {
            return Err(Error::ConcentrationTooSmall { mu, two_d: 2 * d });
        }
        let required = min_cells * mu;
        if (grid.n() as f64) < required {
            return Err(Error::Unresolved {
                n: grid.n(),
                concentration: mu,
                required,
            });
        }
        let n = grid.n();
        let transverse = TorusGrid::with_budget(d - 1, n, u128::MAX)?;
        let dm = (d - 1) as f64;
        let a_theta = mu.powf(dm / conjugate(p));
        let a_w = mu.powf(dm / p);
        let target = mu.powf(-dm);
        // one profile centered at the origin; pipe j reads it shifted by its center
        let mut idx = vec![0usize; d - 1];
        let mut y = vec![0.0; d - 1];
        let values: Vec<f64> = (0..transverse.len())
            .map(|flat| {
                transverse.unravel(flat, &mut idx);
                for (ya, &ia) in y.iter_mut().zip(&idx) {
                    *ya = mu * transverse.wavenumber(ia) as f64 / n as f64;
                }
                raw_profile(&y)
            })
            .collect();
        let mean_sq = values.iter().map(|v| v * v).sum::<f64>() * transverse.weight();
        let scale = (target / mean_sq).sqrt();
        let profile = ScalarField::from_values(transverse, values.into_iter().map(|v| v * scale).collect())?;
        // offset (2j+1)/(2d) in [0,1) coordinates, i.e. index n (2j+1)/(2d)
        let centers = (0..d)
            .map(|j| ((n * (2 * j + 1)) as f64 / (2 * d) as f64).round() as usize % n)
            .collect();
        let mut fam = MikadoFamily {
            grid,
            transverse,
            p,
            mu,
            a_theta,
            a_w,
            profile,
            centers,
            theta_scale: vec![1.0; d],
            measured_m: 0.0,
            min_cells,
        };
        fam.measured_m = fam.compute_m()?;
        Ok(fam)
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn gamma(&self) -> f64 {
        gamma(self.dim(), self.p)
    }

    /// Grid cells required per unit of `mu` (and of `lambda * mu` once dilated).
    pub fn min_cells(&self) -> f64 {
        self.min_cells
    }

    pub fn amplitudes(&self) -> (f64, f64) {
        (self.a_theta, self.a_w)
    }

    /// The family constant `M`: the largest of `3 sum |Theta^j|_{p'}`,
    /// `3 sum |W^j|_p`, `sum |Theta^j W^j|_1` and `mu^gamma sum |Theta^j|_{H^1}`.
    pub fn measured_m(&self) -> f64 {
        self.measured_m
    }

    /// Pipe centers as torus coordinates, one transverse point per pipe.
    pub fn offsets(&self) -> Vec<Vec<f64>> {
        self.centers
            .iter()
            .map(|&c| vec![self.grid.coord(c); self.dim() - 1])
            .collect()
    }

    pub fn manifest(&self) -> FamilyManifest {
        FamilyManifest {
            d: self.dim(),
            n: self.grid.n(),
            p: self.p,
            mu: self.mu,
            offsets: self.offsets(),
            measured_m: self.measured_m,
            gamma: self.gamma(),
        }
    }

    /// Copy with `Theta^j` multiplied by `factor`, used to exercise failing checks.
    pub fn with_scaled_density(&self, j: usize, factor: f64) -> Self {
        let mut out = self.clone();
        out.theta_scale[j] *= factor;
        out
    }

    fn theta_amp(&self, j: usize) -> f64 {
        self.a_theta * self.theta_scale[j]
    }

    /// Transverse profile centered at the origin (unit amplitude).
    pub fn profile(&self) -> &ScalarField {
        &self.profile
    }

    /// `scale * s_j(lambda x_perp)` as a `d`-dimensional field constant along `e_j`.
    fn extend(&self, j: usize, lambda: usize, scale: f64, square: bool) -> ScalarField {
        let d = self.dim();
        let n = self.grid.n();
        let map: Vec<usize> = (0..n).map(|i| self.grid.dilated_index(i, lambda)).collect();
        let src = self.profile.values();
        let c = self.centers[j];
        let mut idx = vec![0usize; d];
        let values = (0..self.grid.len())
            .map(|flat| {
                self.grid.unravel(flat, &mut idx);
                let t = idx
                    .iter()
                    .enumerate()
                    .filter(|(a, _)| *a != j)
                    .fold(0, |acc, (_, &i)| acc * n + (map[i] + n - c) % n);
                let s = src[t];
                scale * if square { s * s } else { s }
            })
            .collect();
        ScalarField::from_values(self.grid, values).expect("sized to grid")
    }

    /// `Theta^j(lambda x)`.
    pub fn density(&self, j: usize, lambda: usize) -> ScalarField {
        self.extend(j, lambda, self.theta_amp(j), false)
    }

    /// The `e_j` component of `W^j(lambda x)`; the other components vanish.
    pub fn field_component(&self, j: usize, lambda: usize) -> ScalarField {
        self.extend(j, lambda, self.a_w, false)
    }

    pub fn field(&self, j: usize, lambda: usize) -> VectorField {
        VectorField::along(self.field_component(j, lambda), j)
    }

    /// `(Theta^j W^j_j)(lambda x)`, whose mean is 1 for an unscaled family.
    pub fn product(&self, j: usize, lambda: usize) -> ScalarField {
        self.extend(j, lambda, self.theta_amp(j) * self.a_w, true)
    }

    /// Whether grid point `flat` lies in the open support of pipe `j`.
    fn in_support(&self, j: usize, idx: &[usize]) -> bool {
        let n = self.grid.n();
        let c = self.centers[j];
        let r2: f64 = idx
            .iter()
            .enumerate()
            .filter(|(a, _)| *a != j)
            .map(|(_, &i)| {
                let off = self.transverse.wavenumber((i + n - c) % n) as f64 * self.mu / n as f64;
                off * off
            })
            .sum();
        r2 < 1.0
    }

    /// Number of grid points where two different pipes overlap.
    pub fn overlap_count(&self) -> usize {
        let d = self.dim();
        let mut idx = vec![0usize; d];
        let mut count = 0;
        for flat in 0..self.grid.len() {
            self.grid.unravel(flat, &mut idx);
            let hits = (0..d).filter(|&j| self.in_support(j, &idx)).count();
            if hits > 1 {
                count += 1;
            }
        }
        count
    }

    /// Norms of pipe `j` in `L^r` and of its gradient, computed on the
    /// transverse grid (exact for fields constant along the pipe).
    pub fn pipe_norms(&self, j: usize, r: f64) -> Result<PipeNorms> {
        let sr = lp(&self.profile, r)?;
        let gr = lp_vec(&self.profile.gradient(), r)?;
        let ta = self.theta_amp(j);
        Ok(PipeNorms {
            theta: ta * sr,
            w: self.a_w * sr,
            grad_theta: ta * gr,
            grad_w: self.a_w * gr,
        })
    }

    /// `|Theta^j|_{H^1}`.
    pub fn theta_h1(&self, j: usize) -> Result<f64> {
        let (s2, g2) = self.profile_h1_parts()?;
        Ok(self.theta_amp(j) * (s2 * s2 + g2 * g2).sqrt())
    }

    fn profile_h1_parts(&self) -> Result<(f64, f64)> {
        Ok((lp(&self.profile, 2.0)?, lp_vec(&self.profile.gradient(), 2.0)?))
    }

    /// `|Theta^j W^j|_1`.
    pub fn product_l1(&self, j: usize) -> Result<f64> {
        // the profile is normalized so that the mean of s^2 is mu^{-(d-1)}
        Ok(self.theta_amp(j) * self.a_w * lp(&self.profile, 2.0)?.powi(2))
    }

    fn compute_m(&self) -> Result<f64> {
        let (s2, g2) = self.profile_h1_parts()?;
        let h1 = (s2 * s2 + g2 * g2).sqrt();
        let sp = lp(&self.profile, self.p)?;
        let spp = lp(&self.profile, conjugate(self.p))?;
        let mut sum_theta = 0.0;
        let mut sum_w = 0.0;
        let mut sum_prod = 0.0;
        let mut sum_h1 = 0.0;
        for j in 0..self.dim() {
            let ta = self.theta_amp(j);
            sum_theta += ta * spp;
            sum_w += self.a_w * sp;
            sum_prod += ta * self.a_w * s2 * s2;
            sum_h1 += ta * h1;
        }
        Ok((3.0 * sum_theta)
            .max(3.0 * sum_w)
            .max(sum_prod)
            .max(self.mu.powf(self.gamma()) * sum_h1))
    }
}

/// Outcome of the identities every family must satisfy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyCheck {
    /// `|div W^j|_2 / |W^j|_2` per pipe.
    pub div_w: Vec<f64>,
    /// `|div(Theta^j W^j)|_2 / |Theta^j W^j|_2` per pipe.
    pub div_theta_w: Vec<f64>,
    /// `int Theta^j` relative to `|Theta^j|_1`.
    pub mean_theta: Vec<f64>,
    /// `int W^j_j` relative to `|W^j|_1`.
    pub mean_w: Vec<f64>,
    /// `int Theta^j W^j`, one vector per pipe.
    pub cancellation: Vec<Vec<f64>>,
    /// Grid points shared by two pipes.
    pub overlaps: usize,
    pub product_l1_sum: f64,
    pub measured_m: f64,
    pub pass: bool,
}

pub const DIV_TOL: f64 = 1e-9;
pub const MEAN_TOL: f64 = 1e-9;
pub const CANCELLATION_TOL: f64 = 1e-8;

/// Checks divergence, mean, normalization and disjointness on the full grid.
pub fn verify_family(fam: &MikadoFamily) -> Result<FamilyCheck> {
    let d = fam.dim();
    let mut div_w = Vec::with_capacity(d);
    let mut div_theta_w = Vec::with_capacity(d);
    let mut mean_theta = Vec::with_capacity(d);
    let mut mean_w = Vec::with_capacity(d);
    let mut cancellation = Vec::with_capacity(d);
    let mut product_l1_sum = 0.0;
    for j in 0..d {
        let theta = fam.density(j, 1);
        let wj = fam.field_component(j, 1);
        let prod = theta.pointwise(&wj);
        let w = VectorField::along(wj, j);
        div_w.push(lp(&w.divergence(), 2.0)? / lp_vec(&w, 2.0)?);
        mean_theta.push(theta.mean().abs() / lp(&theta, 1.0)?);
        mean_w.push(w.component(j).mean().abs() / lp_vec(&w, 1.0)?);
        drop(w);
        drop(theta);
        let tw = VectorField::along(prod, j);
        div_theta_w.push(lp(&tw.divergence(), 2.0)? / lp_vec(&tw, 2.0)?);
        product_l1_sum += lp_vec(&tw, 1.0)?;
        cancellation.push(tw.mean());
    }
    let overlaps = fam.overlap_count();
    let pass = div_w.iter().chain(&div_theta_w).all(|v| *v <= DIV_TOL)
        && mean_theta.iter().chain(&mean_w).all(|v| *v <= MEAN_TOL)
        && cancellation.iter().enumerate().all(|(j, c)| {
            c.iter()
                .enumerate()
                .all(|(a, v)| (v - if a == j { 1.0 } else { 0.0 }).abs() <= CANCELLATION_TOL)
        })
        && overlaps == 0
        && product_l1_sum <= fam.measured_m() * (1.0 + 1e-12);
    Ok(FamilyCheck {
        div_w,
        div_theta_w,
        mean_theta,
        mean_w,
        cancellation,
        overlaps,
        product_l1_sum,
        measured_m: fam.measured_m(),
        pass,
    })
}

/// Fitted and predicted exponents of the Mikado norm scalings in `mu`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub d: usize,
    pub p: f64,
    pub r: f64,
    pub k: usize,
    pub mu: Vec<f64>,
    pub theta_norms: Vec<f64>,
    pub w_norms: Vec<f64>,
    pub h1_norms: Vec<f64>,
    pub theta_fitted: f64,
    pub theta_predicted: f64,
    pub w_fitted: f64,
    pub w_predicted: f64,
    pub h1_fitted: f64,
    pub h1_predicted: f64,
}

/// `k + (d-1)(1/p' - 1/r)`.
pub fn theta_exponent(d: usize, p: f64, r: f64, k: usize) -> f64 {
    k as f64 + (d - 1) as f64 * (1.0 / conjugate(p) - 1.0 / r)
}

/// `k + (d-1)(1/p - 1/r)`.
pub fn w_exponent(d: usize, p: f64, r: f64, k: usize) -> f64 {
    k as f64 + (d - 1) as f64 * (1.0 / p - 1.0 / r)
}

/// Log-log slopes of `|grad^k Theta^1|_r`, `|grad^k W^1|_r` and `|Theta^1|_{H^1}`
/// against `mu` on a shared `N`-grid.
pub fn scaling_report(grid: TorusGrid, p: f64, r: f64, k: usize, mus: &[f64]) -> Result<ScalingReport> {
    if mus.len() < 3 {
        return Err(Error::InvalidParameter("scaling fits need at least 3 mu values".into()));
    }
    if k > 1 {
        return Err(Error::InvalidParameter("only k = 0 and k = 1 are supported".into()));
    }
    let d = grid.dim();
    let mut theta_norms = Vec::new();
    let mut w_norms = Vec::new();
    let mut h1_norms = Vec::new();
    for &mu in mus {
        let fam = MikadoFamily::build(grid, p, mu)?;
        let pn = fam.pipe_norms(0, r)?;
        if k == 0 {
            theta_norms.push(pn.theta);
            w_norms.push(pn.w);
        } else {
            theta_norms.push(pn.grad_theta);
            w_norms.push(pn.grad_w);
        }
        h1_norms.push(fam.theta_h1(0)?);
    }
    let slope = |ys: &[f64]| loglog_slope(mus, ys).unwrap_or(f64::NAN);
    Ok(ScalingReport {
        d,
        p,
        r,
        k,
        mu: mus.to_vec(),
        theta_fitted: slope(&theta_norms),
        theta_predicted: theta_exponent(d, p, r, k),
        w_fitted: slope(&w_norms),
        w_predicted: w_exponent(d, p, r, k),
        h1_fitted: slope(&h1_norms),
        h1_predicted: -gamma(d, p),
        theta_norms,
        w_norms,
        h1_norms,
    })
}
