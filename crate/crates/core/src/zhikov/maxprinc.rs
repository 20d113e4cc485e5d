use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::solver::{solve, SolveConfig};
use crate::error::Result;
use crate::fit::pearson;
use crate::torus::norm::lp_vec;
use crate::torus::{ScalarField, TorusGrid, VectorField};

/// Frozen maximum-principle constants `c_0` by dimension: twice the largest
/// `|u|_inf / |f|_inf` seen by `calibrate_max_principle` (seed `MAXPRINC_SEED`,
/// `d = 2`, `N = 32`), rounded up. Three-dimensional sweeps are too slow to calibrate.
pub const MAXPRINC_CONSTANTS: [(usize, f64); 1] = [(2, 0.036)];
pub const MAXPRINC_SEED: u64 = 77;

pub fn maxprinc_constant(d: usize) -> Option<f64> {
    MAXPRINC_CONSTANTS.iter().find(|(dd, _)| *dd == d).map(|(_, c)| *c)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxPrincipleRow {
    pub drift_l2: f64,
    /// `|u|_inf / |f|_inf`; `None` when skipped or failed.
    pub ratio: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxPrincipleTable {
    pub rows: Vec<MaxPrincipleRow>,
    pub constant: f64,
    pub max_ratio: f64,
    /// Pearson correlation of ratio against `|b|_2`.
    pub correlation: f64,
    /// One-sided t statistic of the correlation.
    pub t_statistic: f64,
    pub bounded: bool,
    /// No significant upward trend at the 5% level.
    pub trend_ok: bool,
}

/// One-sided 95% Student t quantile by the Cornish-Fisher expansion,
/// within 1e-3 of the tabulated values for `nu >= 5`.
pub fn t_quantile_95(nu: f64) -> f64 {
    let z = 1.644_853_626_951_472_2_f64;
    let z3 = z * z * z;
    let z5 = z3 * z * z;
    let z7 = z5 * z * z;
    z + (z3 + z) / (4.0 * nu)
        + (5.0 * z5 + 16.0 * z3 + 3.0 * z) / (96.0 * nu * nu)
        + (3.0 * z7 + 19.0 * z5 + 17.0 * z3 - 15.0 * z) / (384.0 * nu * nu * nu)
}

/// Ratios `|u|_inf / |f|_inf` across a drift family.
pub fn max_principle_sweep(
    f: &ScalarField,
    drifts: &[VectorField],
    constant: f64,
    cfg: &SolveConfig,
) -> Result<MaxPrincipleTable> {
    let fmax = f.max_abs();
    let mut rows = Vec::with_capacity(drifts.len());
    for b in drifts {
        let drift_l2 = lp_vec(b, 2.0)?;
        let row = if fmax == 0.0 {
            MaxPrincipleRow {
                drift_l2,
                ratio: None,
                error: Some("zero data".to_string()),
            }
        } else {
            match solve(b, f, cfg) {
                Ok(u) => MaxPrincipleRow {
                    drift_l2,
                    ratio: Some(u.max_abs() / fmax),
                    error: None,
                },
                Err(e) => MaxPrincipleRow {
                    drift_l2,
                    ratio: None,
                    error: Some(e.to_string()),
                },
            }
        };
        rows.push(row);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().filter_map(|r| r.ratio.map(|q| (r.drift_l2, q))).unzip();
    let max_ratio = ys.iter().copied().fold(0.0, f64::max);
    let correlation = pearson(&xs, &ys);
    let n = xs.len() as f64;
    let t_statistic = if n > 2.0 && correlation.abs() < 1.0 {
        correlation * ((n - 2.0) / (1.0 - correlation * correlation)).sqrt()
    } else if correlation >= 1.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let trend_ok = n <= 2.0 || t_statistic <= t_quantile_95(n - 2.0);
    Ok(MaxPrincipleTable {
        bounded: max_ratio <= constant,
        rows,
        constant,
        max_ratio,
        correlation,
        t_statistic,
        trend_ok,
    })
}

/// `30` drifts: ten random divergence-free shapes, each at three amplitudes
/// spanning two orders of magnitude in `|b|_2`.
pub fn drift_family<R: rand::Rng + ?Sized>(grid: TorusGrid, count: usize, rng: &mut R) -> Vec<VectorField> {
    let amplitudes = [0.5, 5.0, 50.0];
    let shapes: Vec<VectorField> = (0..count.div_ceil(amplitudes.len()))
        .map(|_| {
            let b = crate::random::divergence_free(grid, 3, rng);
            let n = lp_vec(&b, 2.0).unwrap_or(1.0);
            b.scale(1.0 / n)
        })
        .collect();
    (0..count)
        .map(|i| shapes[i / amplitudes.len()].scale(amplitudes[i % amplitudes.len()]))
        .collect()
}

/// Largest ratio over random data and drifts, used to freeze `MAXPRINC_CONSTANTS`.
pub fn calibrate_max_principle<R: rand::Rng + ?Sized>(grid: TorusGrid, rng: &mut R, cfg: &SolveConfig) -> Result<f64> {
    let drifts = drift_family(grid, 30, rng);
    let mut worst = 0.0f64;
    for _ in 0..4 {
        let f = crate::random::bandlimited(grid, 4, true, rng);
        let mut all = drifts.clone();
        all.push(VectorField::zeros(grid));
        worst = worst.max(max_principle_sweep(&f, &all, f64::INFINITY, cfg)?.max_ratio);
    }
    Ok(worst)
}
