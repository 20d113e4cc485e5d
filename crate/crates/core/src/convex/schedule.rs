use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::cutoff::cutoff_value;
use super::step::{assemble_step, assemble_step_unchecked_residual, StepParams, StepReport};
use super::triple::{validate_mode, IterateTriple, Mode};
use crate::error::{Error, Result};
use crate::mikado::{conjugate, MikadoFamily, MIN_CELLS_PER_MU};
use crate::torus::norm::lp_vec;
use crate::torus::{Normed, ScalarField, VectorField};

/// Ladder lengths and the resolution rule used by the parameter search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// `delta` runs over `|f|_1 2^{-1}, ..., |f|_1 2^{-delta_steps}`.
    pub delta_steps: u32,
    /// Grid cells required per unit of `lambda * mu`.
    pub min_cells: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            delta_steps: 12,
            min_cells: MIN_CELLS_PER_MU,
        }
    }
}

fn resolvable(n: usize, lambda: usize, mu: f64, cfg: &SearchConfig) -> bool {
    cfg.min_cells * lambda as f64 * mu <= n as f64
}

/// `2d + 1`, then the powers of two above `2d`.
pub fn mu_ladder(d: usize, n: usize, cfg: &SearchConfig) -> Vec<f64> {
    let mut out = Vec::new();
    let first = (2 * d + 1) as f64;
    if resolvable(n, 1, first, cfg) {
        out.push(first);
    }
    let mut m = 1usize;
    while m <= 2 * d {
        m *= 2;
    }
    while resolvable(n, 1, m as f64, cfg) {
        if m as f64 != first {
            out.push(m as f64);
        }
        m *= 2;
    }
    out
}

/// `|g_chi|_1` for threshold `delta`, without building any perturbation.
pub fn g_chi_l1(f: &VectorField, delta: f64) -> f64 {
    let d = f.grid().dim();
    let w = f.grid().weight();
    let mut sq = ScalarField::zeros(f.grid());
    for c in f.components() {
        let g = c.map(|v| {
            let x = cutoff_value(v, delta, d);
            (1.0 - x * x) * v
        });
        sq.axpy(1.0, &g.pointwise(&g));
    }
    sq.values().iter().map(|v| v.sqrt()).sum::<f64>() * w
}

/// Outcome of the nested search: the accepted parameters and the report of
/// the step they produce.
#[derive(Clone, Debug)]
pub struct Selection {
    pub params: StepParams,
    pub report: StepReport,
}

/// Greedy nested search: `delta` first, then `lambda`, then `mu`.
///
/// Each ladder takes its first value meeting the budget: `|g_chi|_1 <= eps/4`,
/// then `|g_quad|_1 <= eps/4` at the smallest `mu`, then the full
/// `|u_1-u_0| + |f_1|_1 <= eps` (and `|theta|_{H^1} <= eps/2` in H1 mode).
pub fn select_parameters(
    t: &IterateTriple,
    p: f64,
    eps: f64,
    mode: Mode,
    cfg: &SearchConfig,
) -> Result<Selection> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let grid = t.u.grid();
    let d = grid.dim();
    let n = grid.n();
    validate_mode(d, p, mode)?;
    let f_l1 = lp_vec(&t.f, 1.0)?;
    if f_l1 == 0.0 {
        return Err(Error::InvalidParameter("f vanishes; there is nothing to cancel".into()));
    }
    let delta = (1..=cfg.delta_steps)
        .map(|k| f_l1 * 0.5f64.powi(k as i32))
        .find(|&delta| g_chi_l1(&t.f, delta) <= eps / 4.0)
        .ok_or(Error::BudgetExhausted { achieved: f_l1 })?;

    let mus = mu_ladder(d, n, cfg);
    let families: Vec<MikadoFamily> = mus
        .iter()
        .filter_map(|&mu| MikadoFamily::build_with_min_cells(grid, p, mu, cfg.min_cells).ok())
        .collect();
    let Some(first) = families.first() else {
        return Err(Error::BudgetExhausted { achieved: f_l1 });
    };

    let mut best = f_l1;
    let mut lambda = 2usize;
    let chosen = loop {
        if !resolvable(n, lambda, first.mu(), cfg) {
            return Err(Error::BudgetExhausted { achieved: best });
        }
        let params = StepParams {
            delta,
            lambda,
            mu: first.mu(),
            mode,
        };
        let (_, rep) = assemble_step_unchecked_residual(t.clone(), &params, first, eps)?;
        best = best.min(rep.lhs_dwa);
        if rep.part("g_quad") <= eps / 4.0 {
            break lambda;
        }
        lambda *= 2;
    };

    for fam in &families {
        if !resolvable(n, chosen, fam.mu(), cfg) {
            break;
        }
        let params = StepParams {
            delta,
            lambda: chosen,
            mu: fam.mu(),
            mode,
        };
        let (_, rep) = assemble_step_unchecked_residual(t.clone(), &params, fam, eps)?;
        best = best.min(rep.lhs_dwa);
        let h1_ok = !matches!(mode, Mode::H1) || rep.theta_h1 <= eps / 2.0;
        if rep.dwa_ok() && h1_ok {
            return Ok(Selection { params, report: rep });
        }
    }
    Err(Error::BudgetExhausted { achieved: best })
}

/// Largest measured `M` over the families the grid can resolve at `lambda = 2`.
pub fn reference_m(d: usize, n: usize, p: f64, cfg: &SearchConfig) -> Result<f64> {
    let grid = crate::torus::TorusGrid::with_budget(d, n, u128::MAX)?;
    let mut m = 0.0f64;
    for mu in mu_ladder(d, n, cfg) {
        if resolvable(n, 2, mu, cfg) {
            m = m.max(MikadoFamily::build_with_min_cells(grid, p, mu, cfg.min_cells)?.measured_m());
        }
    }
    if m == 0.0 {
        return Err(Error::BudgetExhausted { achieved: f64::INFINITY });
    }
    Ok(m)
}

/// `eps_k = 1/2 min{1, (eps / (M 2^{k+1}))^{p'}, 2^{-k} |u_0|}`.
pub fn eps_schedule(k: u32, eps: f64, m: f64, p: f64, u0_norm: f64) -> f64 {
    let pp = conjugate(p);
    let two_k = 2f64.powi(k as i32);
    0.5 * 1f64
        .min((eps / (m * 2.0 * two_k)).powf(pp))
        .min(u0_norm / two_k)
}

/// Factor in `(0, 1]` applied to `u_0` so that
/// `max{|f_0|_1^{1/p'}, |f_0|_1^{1/p}} <= eps / (2M)`.
pub fn seed_scale(f0_l1: f64, eps: f64, m: f64, p: f64) -> f64 {
    if f0_l1 == 0.0 {
        return 1.0;
    }
    let pp = conjugate(p);
    let target = eps / (2.0 * m);
    let cap = target.powf(pp).min(target.powf(p));
    (cap / f0_l1).min(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RunStatus {
    Completed,
    /// The search ran out of grid at step `step`.
    Exhausted { step: u32, achieved: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub mode: Mode,
    pub p: f64,
    pub eps: f64,
    pub measured_m: f64,
    pub seed_scale: f64,
    pub u0_norm: f64,
    pub b0_lp: f64,
    /// `|f_k|_1` for `k = 0, 1, ...`.
    pub f_l1: Vec<f64>,
    /// Mode norm of `u_k`.
    pub u_norm: Vec<f64>,
    /// `|b_k - b_0|_p`.
    pub b_dist: Vec<f64>,
    pub eps_k: Vec<f64>,
    pub steps: Vec<StepReport>,
    pub status: RunStatus,
}

impl ConvergenceReport {
    pub fn lower_bound_ok(&self) -> bool {
        self.u_norm.last().is_some_and(|&u| u >= 0.5 * self.u0_norm)
    }

    pub fn drift_close_ok(&self) -> bool {
        self.b_dist.last().is_some_and(|&b| b <= self.eps)
    }

    /// Smallest ratio `|f_{k-1}|_1 / |f_k|_1` over the accepted steps.
    pub fn min_decrease(&self) -> Option<f64> {
        self.f_l1
            .windows(2)
            .map(|w| w[0] / w[1])
            .fold(None, |m, r| Some(m.map_or(r, |m: f64| m.min(r))))
    }
}

/// `K` steps from the seed `(b_0, u_0)` with the `eps_k` schedule.
///
/// `on_step` sees every accepted triple; an exhausted search ends the run
/// early with the trajectory so far.
pub fn run_iteration(
    b0: VectorField,
    u0: ScalarField,
    p: f64,
    eps: f64,
    k_steps: u32,
    mode: Mode,
    cfg: &SearchConfig,
    mut on_step: impl FnMut(u32, &IterateTriple, Option<&StepReport>),
) -> Result<(IterateTriple, ConvergenceReport)> {
    let grid = u0.grid();
    let d = grid.dim();
    validate_mode(d, p, mode)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let m = reference_m(d, grid.n(), p, cfg)?;
    let unscaled = IterateTriple::seed(b0.clone(), u0.clone())?;
    let scale = seed_scale(lp_vec(&unscaled.f, 1.0)?, eps, m, p);
    drop(unscaled);
    let mut t = IterateTriple::seed(b0.clone(), u0.map(|v| v * scale))?;
    let u0_norm = t.u.norm(mode.u_norm())?;
    let mut report = ConvergenceReport {
        mode,
        p,
        eps,
        measured_m: m,
        seed_scale: scale,
        u0_norm,
        b0_lp: lp_vec(&b0, p)?,
        f_l1: alloc::vec![lp_vec(&t.f, 1.0)?],
        u_norm: alloc::vec![u0_norm],
        b_dist: alloc::vec![0.0],
        eps_k: Vec::new(),
        steps: Vec::new(),
        status: RunStatus::Completed,
    };
    on_step(0, &t, None);
    for k in 1..=k_steps {
        let eps_k = eps_schedule(k, eps, m, p, u0_norm);
        report.eps_k.push(eps_k);
        let sel = match select_parameters(&t, p, eps_k, mode, cfg) {
            Ok(sel) => sel,
            Err(Error::BudgetExhausted { achieved }) => {
                report.status = RunStatus::Exhausted { step: k, achieved };
                break;
            }
            Err(e) => return Err(e),
        };
        let fam = MikadoFamily::build_with_min_cells(grid, p, sel.params.mu, cfg.min_cells)?;
        let (next, rep) = assemble_step(t, &sel.params, &fam, eps_k)?;
        t = next;
        report.f_l1.push(rep.f1_l1);
        report.u_norm.push(t.u.norm(mode.u_norm())?);
        report.b_dist.push(lp_vec(&(&t.b - &b0), p)?);
        on_step(k, &t, Some(&rep));
        report.steps.push(rep);
    }
    Ok((t, report))
}
