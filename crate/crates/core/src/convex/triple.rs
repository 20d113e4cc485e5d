#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::norm::{lp, lp_vec};
use crate::torus::spectral::real_multiplier;
use crate::torus::{dealiased_product, NormSpec, Normed, ScalarField, VectorField};

/// Target norm for `u` in the iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Mode {
    H1,
    W1R { r: f64 },
    W1RW1Q { r: f64, q: f64 },
}

impl Mode {
    /// Norm in which `u_1 - u_0` is measured.
    pub fn u_norm(&self) -> NormSpec {
        match *self {
            Mode::H1 => NormSpec::h1(),
            Mode::W1R { r } | Mode::W1RW1Q { r, .. } => NormSpec::w1p(r),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mode::H1 => "H1",
            Mode::W1R { .. } => "W1R",
            Mode::W1RW1Q { .. } => "W1R_W1Q",
        }
    }
}

/// Admissible exponent windows for `(d, p, mode)`.
pub fn validate_mode(d: usize, p: f64, mode: Mode) -> Result<()> {
    let df = d as f64;
    let fail = |msg: alloc::string::String| Err(Error::InvalidParameter(msg));
    let pp = p / (p - 1.0);
    match mode {
        Mode::H1 => {
            let top = 2.0 * (df - 1.0) / (df + 1.0);
            if d < 4 {
                return fail(alloc::format!("H1 mode needs d >= 4, got {d}"));
            }
            if !(p > 1.0 && p < top) {
                return fail(alloc::format!("H1 mode needs p in (1, {top}), got {p}"));
            }
        }
        Mode::W1R { r } | Mode::W1RW1Q { r, .. } => {
            if d < 3 {
                return fail(alloc::format!("W1R mode needs d >= 3, got {d}"));
            }
            if !(p > 1.0 && p < df - 1.0) {
                return fail(alloc::format!("W1R mode needs p in (1, {}), got {p}", df - 1.0));
            }
            let top = pp * (df - 1.0) / (df - 1.0 + pp);
            if !(r >= 1.0 && r < top) {
                return fail(alloc::format!("W1R mode needs r in [1, {top}), got {r}"));
            }
            if let Mode::W1RW1Q { q, .. } = mode {
                let low = (df - 1.0) / (df - 2.0);
                if !(p > low) {
                    return fail(alloc::format!("W1R_W1Q mode needs p > {low}, got {p}"));
                }
                let qtop = p * (df - 1.0) / (df - 1.0 + p);
                if !(q >= 1.0 && q < qtop) {
                    return fail(alloc::format!("W1R_W1Q mode needs q in [1, {qtop}), got {q}"));
                }
            }
        }
    }
    Ok(())
}

/// A triple `(b, u, f)` with `-div(grad u + b u) = div f` on the grid.
#[derive(Clone, Debug)]
pub struct IterateTriple {
    pub b: VectorField,
    pub u: ScalarField,
    pub f: VectorField,
}

/// Relative tolerance on `|div b|_2 / |b|_2`.
pub const DIV_B_TOL: f64 = 1e-9;
/// Tolerance on `|mean u|` relative to `max |u|`.
pub const MEAN_U_TOL: f64 = 1e-10;

/// Norms quoted in step and run reports.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleNorms {
    pub f_l1: f64,
    pub u_h1: f64,
    pub u_w1r: f64,
    pub b_lp: f64,
    pub div_b: f64,
    pub mean_u: f64,
}

impl IterateTriple {
    /// Checks the divergence and mean invariants.
    pub fn new(b: VectorField, u: ScalarField, f: VectorField) -> Result<Self> {
        if b.grid() != u.grid() || f.grid() != u.grid() {
            return Err(Error::GridMismatch);
        }
        let t = IterateTriple { b, u, f };
        let div = t.relative_div_b()?;
        if div > DIV_B_TOL {
            return Err(Error::InvalidParameter(alloc::format!(
                "drift is not divergence-free (relative divergence {div:e})"
            )));
        }
        let mean = t.u.mean();
        if mean.abs() > MEAN_U_TOL * t.u.max_abs().max(f64::MIN_POSITIVE) {
            return Err(Error::NonZeroMean {
                mean,
                norm: t.u.max_abs(),
            });
        }
        Ok(t)
    }

    /// Seed triple with `f = -grad u - b u`.
    pub fn seed(b: VectorField, u: ScalarField) -> Result<Self> {
        let mut f = u.gradient();
        for a in 0..u.grid().dim() {
            f.component_mut(a).axpy(1.0, &b.component(a).pointwise(&u));
        }
        let f = f.scale(-1.0);
        Self::new(b, u, f)
    }

    pub fn relative_div_b(&self) -> Result<f64> {
        let nb = lp_vec(&self.b, 2.0)?;
        if nb == 0.0 {
            return Ok(0.0);
        }
        Ok(lp(&self.b.divergence(), 2.0)? / nb)
    }

    pub fn norms(&self, p: f64, r: f64) -> Result<TripleNorms> {
        Ok(TripleNorms {
            f_l1: lp_vec(&self.f, 1.0)?,
            u_h1: self.u.norm(NormSpec::h1())?,
            u_w1r: self.u.norm(NormSpec::w1p(r))?,
            b_lp: lp_vec(&self.b, p)?,
            div_b: self.relative_div_b()?,
            mean_u: self.u.mean(),
        })
    }

    /// Residual of the equation in an `H^{-1}` surrogate norm, relative to `|f|_2`.
    ///
    /// The drift product is formed with 3/2-rule padding, so the value measures
    /// how far the grid-pointwise construction is from the resolved product.
    pub fn residual(&self) -> Result<f64> {
        let grid = self.u.grid();
        let mut res = self.u.laplacian();
        for a in 0..grid.dim() {
            let mut flux = dealiased_product(self.b.component(a), &self.u);
            flux.axpy(1.0, self.f.component(a));
            res.axpy(1.0, &flux.partial(a));
        }
        // |k|^{-1} weighting
        let weighted = real_multiplier(&res, |k| {
            let s: f64 = k
                .iter()
                .map(|&ka| {
                    let v = 2.0 * core::f64::consts::PI * ka as f64;
                    v * v
                })
                .sum();
            if s == 0.0 {
                0.0
            } else {
                1.0 / s.sqrt()
            }
        });
        let fnorm = lp_vec(&self.f, 2.0)?;
        let num = lp(&weighted, 2.0)?;
        Ok(if fnorm > 0.0 { num / fnorm } else { num })
    }
}
