//! The ball counterexample: a drift `b = x |x|^{-3} beta(x/|x|)` in `L^{3/2-}` of
//! the unit ball in `R^3` and `v = (1 - |x|^4) alpha(x/|x|)` for which the energy
//! identity fails by exactly one unit.
//!
//! Angular data are zonal (functions of `omega_3` alone) and stored as Legendre
//! coefficients. Integrals use a radial Gauss rule in `s = sqrt(r)`, which
//! clusters nodes at the origin, times Gauss-Legendre in `omega_3` and a uniform
//! azimuthal rule.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;

pub const MAX_DEGREE: usize = 8;
pub const MIN_RADIAL: usize = 32;
pub const MIN_SPHERE_DEGREE: usize = 16;

/// `|int beta|`, `|int alpha beta|`, `|int alpha^2 beta + 2|`.
pub const CONSTRAINT_TOLS: [f64; 3] = [1e-10, 1e-10, 1e-8];

/// `(P_l(x), P_l'(x))` for `l = 0..=n`, finite at the poles.
fn legendre_table(n: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut p = vec![0.0; n + 1];
    let mut dp = vec![0.0; n + 1];
    p[0] = 1.0;
    if n >= 1 {
        p[1] = x;
        dp[1] = 1.0;
    }
    for l in 1..n {
        let lf = l as f64;
        p[l + 1] = ((2.0 * lf + 1.0) * x * p[l] - lf * p[l - 1]) / (lf + 1.0);
        dp[l + 1] = dp[l - 1] + (2.0 * lf + 1.0) * p[l];
    }
    (p, dp)
}

/// A zonal function `sum_l c_l P_l(omega_3)` on the unit sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Zonal {
    pub coeffs: Vec<f64>,
}

impl Zonal {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() > MAX_DEGREE + 1 {
            return Err(Error::InvalidParameter(alloc::format!(
                "zonal degree above {MAX_DEGREE}"
            )));
        }
        Ok(Zonal { coeffs })
    }

    pub fn zero() -> Self {
        Zonal { coeffs: Vec::new() }
    }

    pub fn scaled(&self, t: f64) -> Self {
        Zonal {
            coeffs: self.coeffs.iter().map(|c| c * t).collect(),
        }
    }

    /// Value and derivative in `u = omega_3`.
    pub fn eval(&self, u: f64) -> (f64, f64) {
        if self.coeffs.is_empty() {
            return (0.0, 0.0);
        }
        let (p, dp) = legendre_table(self.coeffs.len() - 1, u);
        let mut v = 0.0;
        let mut d = 0.0;
        for (l, c) in self.coeffs.iter().enumerate() {
            v += c * p[l];
            d += c * dp[l];
        }
        (v, d)
    }

    /// Tangential gradient `f'(u) (e_3 - u omega)`.
    pub fn surface_gradient(&self, omega: &[f64; 3]) -> [f64; 3] {
        let u = omega[2];
        let (_, d) = self.eval(u);
        [-d * u * omega[0], -d * u * omega[1], d * (1.0 - u * u)]
    }
}

/// Product rule on the unit sphere, exact for polynomials of degree `< 2 n_u`
/// in `omega_3` and trigonometric degree `< n_phi` in the azimuth.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl SphereRule {
    /// The smallest rule of this family exact through total degree `degree`.
    pub fn new(degree: usize) -> Self {
        let n_u = degree / 2 + 1;
        let n_phi = degree + 1;
        let gl = GaussLegendre::new(n_u, -1.0, 1.0);
        let dphi = 2.0 * PI / n_phi as f64;
        let mut nodes = Vec::with_capacity(n_u * n_phi);
        let mut weights = Vec::with_capacity(n_u * n_phi);
        for (&u, &wu) in gl.nodes.iter().zip(&gl.weights) {
            let s = (1.0 - u * u).max(0.0).sqrt();
            for a in 0..n_phi {
                let phi = a as f64 * dphi;
                nodes.push([s * phi.cos(), s * phi.sin(), u]);
                weights.push(wu * dphi);
            }
        }
        SphereRule {
            nodes,
            weights,
            degree,
        }
    }

    pub fn integrate(&self, f: impl Fn(&[f64; 3]) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphericalPair {
    pub alpha: Zonal,
    pub beta: Zonal,
    /// `[int beta, int alpha beta, int alpha^2 beta + 2]` over the sphere.
    pub constraint_residuals: [f64; 3],
}

impl SphericalPair {
    /// Computes the constraint residuals with a rule exact for the data.
    pub fn new(alpha: Zonal, beta: Zonal) -> Self {
        let rule = SphereRule::new(3 * MAX_DEGREE + 2);
        let ab = |w: &[f64; 3]| (alpha.eval(w[2]).0, beta.eval(w[2]).0);
        let r = [
            rule.integrate(|w| ab(w).1),
            rule.integrate(|w| {
                let (a, b) = ab(w);
                a * b
            }),
            rule.integrate(|w| {
                let (a, b) = ab(w);
                a * a * b
            }) + 2.0,
        ];
        SphericalPair {
            alpha,
            beta,
            constraint_residuals: r,
        }
    }

    pub fn constraints_ok(&self) -> bool {
        self.constraint_residuals
            .iter()
            .zip(CONSTRAINT_TOLS)
            .all(|(r, t)| r.abs() <= t)
    }
}

impl SphericalPair {
    /// `b(x) = x |x|^{-3} beta(x / |x|)`.
    pub fn b_at(&self, x: &[f64; 3]) -> [f64; 3] {
        let r = norm3(x);
        let be = self.beta.eval(x[2] / r).0;
        core::array::from_fn(|i| be * x[i] / (r * r * r))
    }

    /// `v(x) = (1 - |x|^4) alpha(x / |x|)`.
    pub fn v_at(&self, x: &[f64; 3]) -> f64 {
        let r = norm3(x);
        (1.0 - r.powi(4)) * self.alpha.eval(x[2] / r).0
    }

    /// `grad v = -4 r^3 alpha e_r + (1 - r^4) r^{-1} grad_S alpha`.
    pub fn grad_v_at(&self, x: &[f64; 3]) -> [f64; 3] {
        let r = norm3(x);
        let w = [x[0] / r, x[1] / r, x[2] / r];
        let a = self.alpha.eval(w[2]).0;
        let gs = self.alpha.surface_gradient(&w);
        let dr = -4.0 * r.powi(3) * a;
        let tang = (1.0 - r.powi(4)) / r;
        core::array::from_fn(|i| dr * w[i] + tang * gs[i])
    }
}

fn norm3(x: &[f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// `alpha = omega_3`, `beta = -(15 / 8 pi)(3 omega_3^2 - 1) = -(15 / 4 pi) P_2(omega_3)`.
pub fn make_alpha_beta() -> SphericalPair {
    let alpha = Zonal {
        coeffs: vec![0.0, 1.0],
    };
    let beta = Zonal {
        coeffs: vec![0.0, 0.0, -15.0 / (4.0 * PI)],
    };
    SphericalPair::new(alpha, beta)
}

/// Fields of the counterexample sampled on the radial-spherical tensor grid,
/// radius-major.
#[derive(Clone, Debug)]
pub struct BallFieldSet {
    pub pair: SphericalPair,
    pub radii: Vec<f64>,
    /// Radial weights for `int_0^1 g(r) r^2 dr`.
    pub radial_weights: Vec<f64>,
    pub sphere: SphereRule,
    pub b: Vec<[f64; 3]>,
    pub v: Vec<f64>,
    pub grad_v: Vec<[f64; 3]>,
}

fn radial_rule(n_r: usize) -> (Vec<f64>, Vec<f64>) {
    // r = s^2, so r^2 dr = 2 s^5 ds
    let gl = GaussLegendre::new(n_r, 0.0, 1.0);
    let radii = gl.nodes.iter().map(|s| s * s).collect();
    let weights = gl
        .nodes
        .iter()
        .zip(&gl.weights)
        .map(|(s, w)| 2.0 * w * s.powi(5))
        .collect();
    (radii, weights)
}

pub fn build_fields(pair: SphericalPair, n_r: usize, n_sph: usize) -> Result<BallFieldSet> {
    if n_r < MIN_RADIAL {
        return Err(Error::InvalidParameter(alloc::format!(
            "n_r = {n_r} below {MIN_RADIAL}"
        )));
    }
    if n_sph < MIN_SPHERE_DEGREE {
        return Err(Error::InvalidParameter(alloc::format!(
            "spherical degree {n_sph} below {MIN_SPHERE_DEGREE}"
        )));
    }
    let (radii, radial_weights) = radial_rule(n_r);
    let sphere = SphereRule::new(n_sph);
    let n = radii.len() * sphere.nodes.len();
    let mut b = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    let mut grad_v = Vec::with_capacity(n);
    for &r in &radii {
        for w in &sphere.nodes {
            let x = [r * w[0], r * w[1], r * w[2]];
            b.push(pair.b_at(&x));
            v.push(pair.v_at(&x));
            grad_v.push(pair.grad_v_at(&x));
        }
    }
    Ok(BallFieldSet {
        pair,
        radii,
        radial_weights,
        sphere,
        b,
        v,
        grad_v,
    })
}

impl BallFieldSet {
    fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        let m = self.sphere.nodes.len();
        let mut total = 0.0;
        for (i, wr) in self.radial_weights.iter().enumerate() {
            let s: f64 = self.sphere.weights.iter().enumerate().map(|(j, ws)| ws * f(i * m + j)).sum();
            total += wr * s;
        }
        total
    }

    /// `int_B |grad v|^2`.
    pub fn grad_energy(&self) -> f64 {
        self.integrate(|k| self.grad_v[k].iter().map(|g| g * g).sum())
    }

    /// Outward flux of `b` through the sphere of radius `r`.
    pub fn flux(&self, r: f64) -> f64 {
        self.sphere.integrate(|w| {
            let b = self.pair.b_at(&[r * w[0], r * w[1], r * w[2]]);
            (b[0] * w[0] + b[1] * w[1] + b[2] * w[2]) * r * r
        })
    }

    /// `v` on the unit sphere at the spherical nodes.
    pub fn boundary_values(&self) -> Vec<f64> {
        self.sphere.nodes.iter().map(|w| self.pair.v_at(w)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub grad_energy: f64,
    /// `int_B b v . grad v`.
    pub drift_term: f64,
    /// `int |grad v|^2 - (f, v)` with `(f, phi) = int (grad v + b v) . grad phi`.
    pub defect: f64,
}

pub fn energy_defect(set: &BallFieldSet) -> DefectReport {
    let drift_term = set.integrate(|k| {
        let b = set.b[k];
        let g = set.grad_v[k];
        set.v[k] * (b[0] * g[0] + b[1] * g[1] + b[2] * g[2])
    });
    DefectReport {
        grad_energy: set.grad_energy(),
        drift_term,
        defect: -drift_term,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpRow {
    pub p: f64,
    /// `(r_min, int_{r_min < |x| < 1} |b|^p)` for each cutoff.
    pub partial: Vec<(f64, f64)>,
    /// `|b|_p^p` over the whole ball, `None` when it diverges (`p >= 3/2`).
    pub total: Option<f64>,
}

/// Partial integrals of `|b|^p`. The radial factor `int r^{2 - 2p} dr` is
/// integrated in `t = ln r`, where the integrand is smooth.
pub fn lp_norms(pair: &SphericalPair, ps: &[f64], r_mins: &[f64], n_sph: usize) -> Result<Vec<LpRow>> {
    if r_mins.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::InvalidParameter("radial cutoffs must lie in (0, 1)".into()));
    }
    let sphere = SphereRule::new(n_sph);
    Ok(ps
        .iter()
        .map(|&p| {
            let angular = sphere.integrate(|w| pair.beta.eval(w[2]).0.abs().powf(p));
            let e = 3.0 - 2.0 * p;
            let partial = r_mins
                .iter()
                .map(|&r0| {
                    let gl = GaussLegendre::new(64, r0.ln(), 0.0);
                    (r0, angular * gl.integrate(|t| (e * t).exp()))
                })
                .collect();
            LpRow {
                p,
                partial,
                total: if e > 0.0 { Some(angular / e) } else { None },
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub alpha_spec: String,
    pub beta_spec: String,
    pub alpha_coeffs: Vec<f64>,
    pub beta_coeffs: Vec<f64>,
    pub constraints: [f64; 3],
    pub grad_energy: f64,
    pub drift_term: f64,
    pub defect: f64,
    pub flux: Vec<(f64, f64)>,
    pub lp_norms: Vec<LpRow>,
}

pub const FLUX_RADII: [f64; 3] = [0.1, 0.5, 0.9];
pub const LP_EXPONENTS: [f64; 5] = [1.2, 1.4, 1.45, 1.49, 1.499];
pub const LP_CUTOFFS: [f64; 3] = [1e-2, 1e-4, 1e-8];

/// The standard pair on an `n_r x n_sph` grid with every reported quantity.
pub fn run(n_r: usize, n_sph: usize) -> Result<CounterexampleReport> {
    let pair = make_alpha_beta();
    let set = build_fields(pair.clone(), n_r, n_sph)?;
    let d = energy_defect(&set);
    Ok(CounterexampleReport {
        alpha_spec: "omega_3".into(),
        beta_spec: "-(15/(8 pi)) (3 omega_3^2 - 1)".into(),
        alpha_coeffs: pair.alpha.coeffs.clone(),
        beta_coeffs: pair.beta.coeffs.clone(),
        constraints: pair.constraint_residuals,
        grad_energy: d.grad_energy,
        drift_term: d.drift_term,
        defect: d.defect,
        flux: FLUX_RADII.iter().map(|&r| (r, set.flux(r))).collect(),
        lp_norms: lp_norms(&pair, &LP_EXPONENTS, &LP_CUTOFFS, 4 * n_sph)?,
    })
}
