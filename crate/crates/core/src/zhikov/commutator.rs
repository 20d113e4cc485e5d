use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::loglog_slope;
use crate::quad::GaussLegendre;
use crate::torus::{translate, ScalarField, VectorField};

/// Unnormalized bump `exp(-1/(1-r^2))` on the unit ball.
fn bump(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r2)).exp()
    }
}

/// Quadrature nodes on the unit ball carrying the normalized mollifier and its gradient.
#[derive(Clone, Debug)]
pub struct BallQuadrature {
    pub dim: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// `rho(z)` at each node, normalized so that the rule integrates it to 1.
    pub rho: Vec<f64>,
    pub grad_rho: Vec<Vec<f64>>,
}

impl BallQuadrature {
    /// Gauss-Legendre in the radius (and in `cos theta` for `d = 3`) times a
    /// uniform rule in the azimuth.
    pub fn new(dim: usize, radial: usize, angular: usize) -> Result<Self> {
        if radial == 0 || angular == 0 {
            return Err(Error::InvalidParameter("ball quadrature needs nodes".into()));
        }
        let rr = GaussLegendre::new(radial, 0.0, 1.0);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let dphi = 2.0 * PI / angular as f64;
        match dim {
            2 => {
                for (&r, &wr) in rr.nodes.iter().zip(&rr.weights) {
                    for a in 0..angular {
                        let phi = (a as f64 + 0.5) * dphi;
                        nodes.push(vec![r * phi.cos(), r * phi.sin()]);
                        weights.push(wr * r * dphi);
                    }
                }
            }
            3 => {
                let ct = GaussLegendre::new(angular, -1.0, 1.0);
                for (&r, &wr) in rr.nodes.iter().zip(&rr.weights) {
                    for (&c, &wc) in ct.nodes.iter().zip(&ct.weights) {
                        let s = (1.0 - c * c).sqrt();
                        for a in 0..2 * angular {
                            let phi = (a as f64 + 0.5) * dphi / 2.0;
                            nodes.push(vec![r * s * phi.cos(), r * s * phi.sin(), r * c]);
                            weights.push(wr * r * r * wc * dphi / 2.0);
                        }
                    }
                }
            }
            _ => {
                return Err(Error::InvalidParameter(alloc::format!(
                    "ball quadrature supports d = 2, 3, got {dim}"
                )))
            }
        }
        let raw: Vec<f64> = nodes.iter().map(|z| bump(z.iter().map(|v| v * v).sum())).collect();
        let mass: f64 = raw.iter().zip(&weights).map(|(r, w)| r * w).sum();
        let rho: Vec<f64> = raw.iter().map(|r| r / mass).collect();
        let grad_rho = nodes
            .iter()
            .zip(&rho)
            .map(|(z, &p)| {
                let r2: f64 = z.iter().map(|v| v * v).sum();
                let t = 1.0 - r2;
                z.iter().map(|&za| -2.0 * za / (t * t) * p).collect()
            })
            .collect();
        Ok(BallQuadrature {
            dim,
            nodes,
            weights,
            rho,
            grad_rho,
        })
    }

    /// `int z_j d_i rho(z) dz` as a `d x d` matrix indexed `[i][j]`.
    pub fn moment_matrix(&self) -> Vec<Vec<f64>> {
        let d = self.dim;
        let mut m = vec![vec![0.0; d]; d];
        for ((z, g), &w) in self.nodes.iter().zip(&self.grad_rho).zip(&self.weights) {
            for (i, row) in m.iter_mut().enumerate() {
                for (j, mij) in row.iter_mut().enumerate() {
                    *mij += w * z[j] * g[i];
                }
            }
        }
        m
    }

    pub fn mass(&self) -> f64 {
        self.rho.iter().zip(&self.weights).map(|(r, w)| r * w).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    pub eps: Vec<f64>,
    /// `I(eps)` for each `eps`.
    pub values: Vec<f64>,
    /// Fitted slope of `|I|` against `eps`.
    pub slope: Option<f64>,
    pub moment_matrix: Vec<Vec<f64>>,
    /// `|I|` is non-increasing along the list and ends below a tenth of its start.
    pub decays: bool,
}

/// `I(eps) = int int u(x - eps z) [(b(x) - b(x - eps z)) / eps] . grad rho(z) v(x) dz dx`.
pub fn commutator_value(b: &VectorField, u: &ScalarField, v: &ScalarField, quad: &BallQuadrature, eps: f64) -> f64 {
    let grid = u.grid();
    let weight = grid.weight();
    let mut total = 0.0;
    for ((z, g), &w) in quad.nodes.iter().zip(&quad.grad_rho).zip(&quad.weights) {
        if w * g.iter().map(|x| x.abs()).sum::<f64>() == 0.0 {
            continue;
        }
        let shift: Vec<f64> = z.iter().map(|za| eps * za).collect();
        let us = translate(u, &shift);
        let mut dq = vec![0.0; grid.len()];
        for (a, ba) in b.components().iter().enumerate() {
            let bs = translate(ba, &shift);
            for ((q, &x), &y) in dq.iter_mut().zip(ba.values()).zip(bs.values()) {
                *q += g[a] * (x - y) / eps;
            }
        }
        let s: f64 = dq
            .iter()
            .zip(us.values())
            .zip(v.values())
            .map(|((q, a), c)| q * a * c)
            .sum();
        total += w * s * weight;
    }
    total
}

pub fn commutator_check(
    b: &VectorField,
    u: &ScalarField,
    v: &ScalarField,
    quad: &BallQuadrature,
    eps_list: &[f64],
) -> Result<CommutatorReport> {
    if u.grid() != v.grid() || b.grid() != u.grid() {
        return Err(Error::GridMismatch);
    }
    if quad.dim != u.grid().dim() {
        return Err(Error::InvalidParameter("quadrature dimension differs from the grid".into()));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) || eps_list.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidParameter("eps list must be positive and decreasing".into()));
    }
    let values: Vec<f64> = eps_list.iter().map(|&e| commutator_value(b, u, v, quad, e)).collect();
    let mags: Vec<f64> = values.iter().map(|x| x.abs()).collect();
    let decays = match (mags.first(), mags.last()) {
        (Some(&a), Some(&z)) => mags.windows(2).all(|w| w[1] <= w[0]) && z <= 0.1 * a,
        _ => false,
    };
    Ok(CommutatorReport {
        eps: eps_list.to_vec(),
        slope: loglog_slope(eps_list, &mags),
        values,
        moment_matrix: quad.moment_matrix(),
        decays,
    })
}

/// Divergence-free drift with `|b| ~ |x|^{-a}` near the origin (`a != 1`),
/// regularized at scale `h` and cut off away from the cell boundary (`d = 2` only).
pub fn singular_drift(grid: crate::torus::TorusGrid, a: f64, h: f64) -> Result<VectorField> {
    if grid.dim() != 2 {
        return Err(Error::InvalidParameter("the singular drift is built in d = 2".into()));
    }
    if a == 1.0 || !(h > 0.0) {
        return Err(Error::InvalidParameter("singular drift needs a != 1 and h > 0".into()));
    }
    // stream function (r^2 + h^2)^{(1-a)/2}, so |grad psi| ~ r^{-a}
    let psi = ScalarField::from_fn(grid, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let t = r2 / 0.16;
        let cut = if t >= 1.0 { 0.0 } else { (-(t * t * t * t) / (1.0 - t)).exp() };
        cut * (r2 + h * h).powf((1.0 - a) / 2.0) / (1.0 - a)
    });
    let g = psi.gradient();
    VectorField::from_components(vec![g.component(1).clone(), g.component(0).map(|v| -v)])
}
