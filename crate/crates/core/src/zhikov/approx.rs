use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::energy::{energy_check, EnergyReport};
use super::solver::{solve_with_stats, SolveConfig};
use crate::error::{Error, Result};
use crate::mikado::conjugate;
use crate::torus::norm::{lp, lp_vec};
use crate::torus::spectral::real_multiplier;
use crate::torus::{leray_project, NormSpec, Normed, ScalarField, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TruncationMode {
    /// `b min(1, L/|b|)` followed by the Leray projection.
    Clamp,
    /// Keep frequencies with `max_a |k_a| <= L`.
    Lowpass,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationSchedule {
    levels: Vec<f64>,
    mode: TruncationMode,
}

impl TruncationSchedule {
    pub fn new(levels: Vec<f64>, mode: TruncationMode) -> Result<Self> {
        if levels.len() < 3 {
            return Err(Error::InvalidParameter("a truncation schedule needs at least 3 levels".into()));
        }
        if levels.iter().any(|&l| !(l > 0.0)) || levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("truncation levels must be positive and increasing".into()));
        }
        Ok(TruncationSchedule { levels, mode })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn mode(&self) -> TruncationMode {
        self.mode
    }
}

/// The truncated drift `b_n` at one level; divergence-free whenever `b` is.
pub fn truncate(b: &VectorField, level: f64, mode: TruncationMode) -> VectorField {
    match mode {
        TruncationMode::Clamp => {
            let mag = b.magnitude();
            let factor = mag.map(|m| if m > level { level / m } else { 1.0 });
            leray_project(&b.times_scalar(&factor))
        }
        TruncationMode::Lowpass => b.map_components(|c| {
            real_multiplier(c, |k| {
                if k.iter().all(|&ka| (ka.abs() as f64) <= level) {
                    1.0
                } else {
                    0.0
                }
            })
        }),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelDiagnostics {
    pub level: f64,
    /// `|b_n - b|_p`.
    pub drift_distance: f64,
    pub iterations: usize,
    pub energy: EnergyReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproximationDiagnostics {
    pub p: f64,
    pub levels: Vec<LevelDiagnostics>,
    /// `|u_{n+1} - u_n|_{p'}` between consecutive levels.
    pub cauchy: Vec<f64>,
}

/// Solves with every truncated drift of the schedule and returns the finest solution.
pub fn approximation_solution(
    b: &VectorField,
    f: &ScalarField,
    sched: &TruncationSchedule,
    p: f64,
    cfg: &SolveConfig,
) -> Result<(ScalarField, ApproximationDiagnostics)> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter("drift exponent p must exceed 1".into()));
    }
    let pp = conjugate(p);
    let mut levels = Vec::new();
    let mut cauchy = Vec::new();
    let mut prev: Option<ScalarField> = None;
    for &level in sched.levels() {
        let bn = truncate(b, level, sched.mode());
        let (u, stats) = solve_with_stats(&bn, f, cfg)?;
        levels.push(LevelDiagnostics {
            level,
            drift_distance: lp_vec(&(&bn - b), p)?,
            iterations: stats.iterations,
            energy: energy_check(&u, &bn, f),
        });
        if let Some(prev) = &prev {
            cauchy.push(lp(&(&u - prev), pp)?);
        }
        prev = Some(u);
    }
    let u = prev.expect("schedule has levels");
    Ok((u, ApproximationDiagnostics { p, levels, cauchy }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    /// `|u^(1) - u^(2)|_{H^1}`.
    pub distance: f64,
    pub relative: f64,
    pub first: ApproximationDiagnostics,
    pub second: ApproximationDiagnostics,
}

/// Compares the approximation solutions produced by two truncation schedules.
pub fn uniqueness_probe(
    b: &VectorField,
    f: &ScalarField,
    first: &TruncationSchedule,
    second: &TruncationSchedule,
    p: f64,
    cfg: &SolveConfig,
) -> Result<UniquenessReport> {
    let (u1, d1) = approximation_solution(b, f, first, p, cfg)?;
    let (u2, d2) = approximation_solution(b, f, second, p, cfg)?;
    let distance = (&u1 - &u2).norm(NormSpec::h1())?;
    let scale = u1.norm(NormSpec::h1())?.max(u2.norm(NormSpec::h1())?);
    Ok(UniquenessReport {
        distance,
        relative: if scale > 0.0 { distance / scale } else { 0.0 },
        first: d1,
        second: d2,
    })
}

/// `|u - u_solver|_{H^1}` where `u_solver` solves with the same `(b, f)`:
/// positive when `u` is a weak solution the solver cannot produce.
pub fn nonuniqueness_gap(u: &ScalarField, b: &VectorField, f: &ScalarField, cfg: &SolveConfig) -> Result<f64> {
    let (v, _) = solve_with_stats(b, f, cfg)?;
    (u - &v).norm(NormSpec::h1())
}
