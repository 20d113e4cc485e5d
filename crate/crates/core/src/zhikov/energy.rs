use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::norm::{lp, lp_vec};
use crate::torus::{dealiased_product, ScalarField, TorusGrid, VectorField};

/// Relative slack of the energy inequality check.
pub const ENERGY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// `int |grad u|^2`.
    pub dissipation: f64,
    /// `(f, u) = int f u`.
    pub pairing: f64,
    /// `int b u . grad u`, zero for divergence-free `b`.
    pub drift_pairing: f64,
    /// `int |grad u|^2 - (f, u)`.
    pub identity_defect: f64,
    pub relative_defect: f64,
    pub inequality_ok: bool,
}

fn integral_of_product(a: &ScalarField, b: &ScalarField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum::<f64>() * a.grid().weight()
}

pub fn energy_check(u: &ScalarField, b: &VectorField, f: &ScalarField) -> EnergyReport {
    let grad = u.gradient();
    let dissipation: f64 = grad.components().iter().map(|g| integral_of_product(g, g)).sum();
    let pairing = integral_of_product(f, u);
    let drift_pairing: f64 = b
        .components()
        .iter()
        .zip(grad.components())
        .map(|(ba, ga)| integral_of_product(&dealiased_product(ba, u), ga))
        .sum();
    let identity_defect = dissipation - pairing;
    let scale = dissipation.max(pairing.abs());
    EnergyReport {
        dissipation,
        pairing,
        drift_pairing,
        identity_defect,
        relative_defect: if scale > 0.0 { identity_defect.abs() / scale } else { 0.0 },
        inequality_ok: identity_defect <= ENERGY_TOL * scale,
    }
}

/// Frozen constants `C_d` of `|g|_2^2 <= eps |grad g|_2^2 + C_d eps^{-d/2} |g|_1^2`,
/// twice the largest value needed by `calibrate_gns` (`N = 128` for `d = 2`,
/// `N = 32` for `d = 3`), rounded up.
pub const GNS_CONSTANTS: [(usize, f64); 2] = [(2, 0.09), (3, 0.016)];

pub fn gns_constant(d: usize) -> Option<f64> {
    GNS_CONSTANTS.iter().find(|(dd, _)| *dd == d).map(|(_, c)| *c)
}

/// Smallest `C` making the inequality hold for `g` at `eps`.
pub fn gns_required(g: &ScalarField, eps: f64) -> Result<f64> {
    let d = g.grid().dim() as f64;
    let l2 = lp(g, 2.0)?;
    let l1 = lp(g, 1.0)?;
    if l1 == 0.0 {
        return Ok(0.0);
    }
    let grad = lp_vec(&g.gradient(), 2.0)?;
    Ok(((l2 * l2 - eps * grad * grad) * eps.powf(d / 2.0) / (l1 * l1)).max(0.0))
}

/// Calibration set: periodized Gaussians of several widths and smooth
/// positive bumps, over `eps = 2^{-1}, ..., 2^{-12}`.
pub fn calibrate_gns(grid: TorusGrid) -> Result<f64> {
    let mut worst = 0.0f64;
    for &s in &[0.02, 0.03, 0.05, 0.08, 0.12, 0.2, 0.35] {
        let g = ScalarField::from_fn(grid, |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            (-r2 / (2.0 * s * s)).exp()
        });
        for k in 1..=12 {
            worst = worst.max(gns_required(&g, 0.5f64.powi(k))?);
        }
    }
    for m in 1..=4 {
        let g = ScalarField::from_fn(grid, |x| {
            x.iter()
                .map(|v| 1.0 + (2.0 * core::f64::consts::PI * m as f64 * v).cos())
                .product()
        });
        for k in 1..=12 {
            worst = worst.max(gns_required(&g, 0.5f64.powi(k))?);
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GnsRow {
    pub eps: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoserRow {
    pub k: u32,
    /// `((2^k - 1) / 2^{2k-2}) int |grad u^{2^{k-1}}|^2`.
    pub lhs: f64,
    /// `int f u^{2^k - 1}`.
    pub rhs: f64,
    pub relative_defect: f64,
    /// `int b . grad(u^{2^k}) / 2^k` relative to `|b|_2 |grad u^{2^k}|_2 / 2^k`.
    pub drift_term: f64,
    pub gns: Option<GnsRow>,
    /// Set when `max |u|^{2^k}` leaves the floating-point range.
    pub skipped: bool,
}

fn powi_field(u: &ScalarField, e: u32) -> ScalarField {
    u.map(|v| v.powi(e as i32))
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Moser identities and GNS inequalities for `k = 1..=k_max`.
pub fn moser_gns_check(u: &ScalarField, b: &VectorField, f: &ScalarField, k_max: u32) -> Result<Vec<MoserRow>> {
    if u.grid() != f.grid() || b.grid() != u.grid() {
        return Err(Error::GridMismatch);
    }
    let d = u.grid().dim();
    let c_d = gns_constant(d);
    let umax = u.max_abs();
    let b_l2 = lp_vec(b, 2.0)?;
    let mut rows = Vec::new();
    for k in 1..=k_max {
        let top = 1u32 << k;
        if !umax.powi(top as i32).is_finite() || umax.powi(top as i32) > 1e300 {
            rows.push(MoserRow {
                k,
                lhs: f64::NAN,
                rhs: f64::NAN,
                relative_defect: f64::NAN,
                drift_term: f64::NAN,
                gns: None,
                skipped: true,
            });
            continue;
        }
        let g = powi_field(u, top / 2);
        let grad_g = lp_vec(&g.gradient(), 2.0)?;
        let coef = (top - 1) as f64 / (1u64 << (2 * k - 2)) as f64;
        let lhs = coef * grad_g * grad_g;
        let rhs = integral_of_product(f, &powi_field(u, top - 1));
        // chain rule taken before discretizing: b u . grad u^{m} = b . grad u^{m+1} / (m + 1)
        let grad_top = powi_field(u, top).gradient();
        let drift: f64 = b
            .components()
            .iter()
            .zip(grad_top.components())
            .map(|(ba, ga)| integral_of_product(ba, ga))
            .sum::<f64>()
            / top as f64;
        let drift_scale = b_l2 * lp_vec(&grad_top, 2.0)? / top as f64;
        let gns = match c_d {
            Some(c) => {
                let eps = 0.5f64.powi(k as i32);
                let l2 = lp(&g, 2.0)?;
                let l1 = lp(&g, 1.0)?;
                let lhs = l2 * l2;
                let rhs = eps * grad_g * grad_g + c * eps.powf(-(d as f64) / 2.0) * l1 * l1;
                Some(GnsRow {
                    eps,
                    lhs,
                    rhs,
                    ok: lhs <= rhs,
                })
            }
            None => None,
        };
        rows.push(MoserRow {
            k,
            lhs,
            rhs,
            relative_defect: relative(lhs, rhs),
            drift_term: if drift_scale > 0.0 { drift.abs() / drift_scale } else { 0.0 },
            gns,
            skipped: false,
        });
    }
    Ok(rows)
}
