use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::norm::{lp, lp_vec};
use crate::torus::spectral::inv_laplacian_unchecked;
use crate::torus::{check_mean_zero, dealiased_product, ScalarField, VectorField};

/// Largest relative divergence accepted for a drift.
pub const DRIFT_DIV_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Target for `|f - A u|_2 / |f|_2`.
    pub tol: f64,
    /// Total GMRES iterations over all restarts.
    pub max_iter: usize,
    pub restart: usize,
    /// Right preconditioning by `(-Delta)^{-1}`.
    pub precondition: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            tol: 1e-10,
            max_iter: 2000,
            restart: 60,
            precondition: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

/// `A u = -Delta u - div(b u)`, with the drift flux formed by a de-aliased product.
pub fn drift_operator(b: &VectorField, u: &ScalarField) -> ScalarField {
    let mut out = u.laplacian();
    for (a, ba) in b.components().iter().enumerate() {
        out.axpy(1.0, &dealiased_product(ba, u).partial(a));
    }
    out.map(|v| -v)
}

/// Checks that `b` lives on `grid` and is divergence-free.
pub fn check_drift(b: &VectorField) -> Result<()> {
    let nb = lp_vec(b, 2.0)?;
    if nb == 0.0 {
        return Ok(());
    }
    let rel = lp(&b.divergence(), 2.0)? / nb;
    if rel > DRIFT_DIV_TOL {
        return Err(Error::InvalidParameter(alloc::format!(
            "drift is not divergence-free (relative divergence {rel:e})"
        )));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn solve(b: &VectorField, f: &ScalarField, cfg: &SolveConfig) -> Result<ScalarField> {
    solve_with_stats(b, f, cfg).map(|(u, _)| u)
}

/// Restarted, right-preconditioned GMRES for `-div(grad u + b u) = f`.
pub fn solve_with_stats(b: &VectorField, f: &ScalarField, cfg: &SolveConfig) -> Result<(ScalarField, SolveStats)> {
    let grid = f.grid();
    if b.grid() != grid {
        return Err(Error::GridMismatch);
    }
    if !(cfg.tol > 0.0) || cfg.restart == 0 {
        return Err(Error::InvalidParameter("solver needs tol > 0 and restart > 0".into()));
    }
    check_mean_zero(f)?;
    check_drift(b)?;
    let precond = |v: &[f64]| -> ScalarField {
        let field = ScalarField::from_values(grid, v.to_vec()).expect("sized to grid");
        if cfg.precondition {
            inv_laplacian_unchecked(&field).map(|x| -x)
        } else {
            field.mean_free()
        }
    };
    let apply = |v: &[f64]| -> Vec<f64> { drift_operator(b, &precond(v)).into_values() };

    let rhs = f.mean_free().into_values();
    let fnorm = norm2(&rhs);
    if fnorm == 0.0 {
        return Ok((
            ScalarField::zeros(grid),
            SolveStats {
                iterations: 0,
                residual: 0.0,
            },
        ));
    }
    let target = cfg.tol * fnorm;
    let len = grid.len();
    let m = cfg.restart;
    let mut x = vec![0.0; len];
    let mut r = rhs.clone();
    let mut beta = fnorm;
    let mut iterations = 0;
    loop {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut cols = 0;
        for j in 0..m {
            let mut w = apply(&basis[j]);
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(&w, v);
                h[i][j] = hij;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= hij * vk;
                }
            }
            let hn = norm2(&w);
            h[j + 1][j] = hn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let den = (h[j][j] * h[j][j] + hn * hn).sqrt();
            cs[j] = h[j][j] / den;
            sn[j] = hn / den;
            h[j][j] = den;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            cols = j + 1;
            iterations += 1;
            if g[j + 1].abs() <= target || iterations >= cfg.max_iter || hn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        let mut y = vec![0.0; cols];
        for i in (0..cols).rev() {
            let s: f64 = (i + 1..cols).map(|k| h[i][k] * y[k]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (yi, v) in y.iter().zip(&basis) {
            for (xk, vk) in x.iter_mut().zip(v) {
                *xk += yi * vk;
            }
        }
        let ax = apply(&x);
        r = rhs.iter().zip(&ax).map(|(a, b)| a - b).collect();
        beta = norm2(&r);
        if beta <= target {
            break;
        }
        if iterations >= cfg.max_iter {
            return Err(Error::NonConvergence {
                achieved: beta / fnorm,
            });
        }
    }
    Ok((
        precond(&x),
        SolveStats {
            iterations,
            residual: beta / fnorm,
        },
    ))
}
