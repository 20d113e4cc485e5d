use alloc::format;

#[allow(unused_imports)]
use num_traits::Float;

use serde::{Deserialize, Serialize};

use super::field::{ScalarField, VectorField};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormFlavor {
    Lp,
    W1p,
    H1,
    C0,
    C1,
}

/// Which norm to evaluate; `p` is ignored by the `H1`, `C0` and `C1` flavors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub p: f64,
    pub flavor: NormFlavor,
}

impl NormSpec {
    pub fn lp(p: f64) -> Self {
        NormSpec {
            p,
            flavor: NormFlavor::Lp,
        }
    }

    pub fn w1p(p: f64) -> Self {
        NormSpec {
            p,
            flavor: NormFlavor::W1p,
        }
    }

    pub fn h1() -> Self {
        NormSpec {
            p: 2.0,
            flavor: NormFlavor::H1,
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("norm exponent p = {p} is below 1")))
    }
}

/// `L^p` norm of nonnegative samples under the grid quadrature.
pub(crate) fn lp_of_magnitudes(mags: impl Iterator<Item = f64>, weight: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return mags.fold(0.0, f64::max);
    }
    if p == 1.0 {
        return mags.sum::<f64>() * weight;
    }
    if p == 2.0 {
        return (mags.map(|m| m * m).sum::<f64>() * weight).sqrt();
    }
    (mags.map(|m| m.powf(p)).sum::<f64>() * weight).powf(1.0 / p)
}

pub fn lp(f: &ScalarField, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(lp_of_magnitudes(
        f.values().iter().map(|v| v.abs()),
        f.grid().weight(),
        p,
    ))
}

pub fn lp_vec(b: &VectorField, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(lp_of_magnitudes(
        b.magnitude().values().iter().copied(),
        b.grid().weight(),
        p,
    ))
}

/// Pointwise Frobenius norm of the Jacobian of `b`.
fn jacobian_magnitude(b: &VectorField) -> ScalarField {
    let grid = b.grid();
    let mut sq = ScalarField::zeros(grid);
    for c in b.components() {
        let g = c.gradient();
        for comp in g.components() {
            sq.axpy(1.0, &comp.pointwise(comp));
        }
    }
    sq.map(f64::sqrt)
}

/// Fields whose norms can be evaluated with a `NormSpec`.
pub trait Normed {
    fn norm(&self, spec: NormSpec) -> Result<f64>;
}

impl Normed for ScalarField {
    fn norm(&self, spec: NormSpec) -> Result<f64> {
        check_p(spec.p)?;
        let grad = || self.gradient();
        Ok(match spec.flavor {
            NormFlavor::Lp => lp(self, spec.p)?,
            NormFlavor::W1p => lp(self, spec.p)? + lp_vec(&grad(), spec.p)?,
            NormFlavor::H1 => {
                let a = lp(self, 2.0)?;
                let b = lp_vec(&grad(), 2.0)?;
                (a * a + b * b).sqrt()
            }
            NormFlavor::C0 => self.max_abs(),
            NormFlavor::C1 => self.max_abs() + grad().max_abs(),
        })
    }
}

impl Normed for VectorField {
    fn norm(&self, spec: NormSpec) -> Result<f64> {
        check_p(spec.p)?;
        let w = self.grid().weight();
        let jac = || jacobian_magnitude(self);
        Ok(match spec.flavor {
            NormFlavor::Lp => lp_vec(self, spec.p)?,
            NormFlavor::W1p => {
                lp_vec(self, spec.p)? + lp_of_magnitudes(jac().values().iter().copied(), w, spec.p)
            }
            NormFlavor::H1 => {
                let a = lp_vec(self, 2.0)?;
                let b = lp_of_magnitudes(jac().values().iter().copied(), w, 2.0);
                (a * a + b * b).sqrt()
            }
            NormFlavor::C0 => self.max_abs(),
            NormFlavor::C1 => self.max_abs() + jac().max_abs(),
        })
    }
}
