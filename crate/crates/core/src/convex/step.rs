use alloc::collections::BTreeMap;
use alloc::string::String;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::cutoff::cutoff_value;
use super::triple::{IterateTriple, Mode};
use crate::error::{Error, Result};
use crate::mikado::{conjugate, MikadoFamily};
use crate::torus::norm::{lp, lp_vec};
use crate::torus::spectral::inv_laplacian_unchecked;
use crate::torus::{NormSpec, Normed, ScalarField, VectorField};

/// Parameters of one convex-integration step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    pub delta: f64,
    pub lambda: usize,
    pub mu: f64,
    pub mode: Mode,
}

/// Names of the five error parts, in report order.
pub const G_PARTS: [&str; 5] = ["g_quad", "g_chi", "g_lapl", "g_lin", "g_corr"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub params: StepParams,
    pub p: f64,
    /// `|b_1 - b_0|_p + |u_1 - u_0|_{p'}`.
    pub lhs_raz: f64,
    /// `M max{|f_0|_1^{1/p'}, |f_0|_1^{1/p}}` with the family's measured `M`.
    pub rhs_raz: f64,
    /// Mode norm of the increment plus `|f_1|_1`.
    pub lhs_dwa: f64,
    pub eps_target: f64,
    /// `L^1` norms of the error parts, keyed by `G_PARTS`.
    pub g_parts: BTreeMap<String, f64>,
    /// `H^{-1}`-surrogate residual of the new triple; `None` when skipped.
    pub residual: Option<f64>,
    pub measured_m: f64,
    pub f0_l1: f64,
    pub f1_l1: f64,
    pub u_increment: f64,
    /// `|b_1 - b_0|_{W^{1,q}}`, only in the two-sided Sobolev mode.
    pub b_increment_w1q: Option<f64>,
    pub theta_c: f64,
    pub theta_h1: f64,
    pub div_b1: f64,
    pub mean_u1: f64,
}

impl StepReport {
    pub fn raz_ok(&self) -> bool {
        self.lhs_raz <= self.rhs_raz
    }

    pub fn dwa_ok(&self) -> bool {
        self.lhs_dwa <= self.eps_target
    }

    pub fn g_chi_ok(&self) -> bool {
        self.part("g_chi") <= self.params.delta / 2.0 * (1.0 + 1e-12)
    }

    pub fn part(&self, name: &str) -> f64 {
        self.g_parts.get(name).copied().unwrap_or(f64::NAN)
    }
}

/// The four perturbations of a step.
#[derive(Clone, Debug)]
pub struct Perturbations {
    pub theta: ScalarField,
    pub theta_c: f64,
    pub w: VectorField,
    pub w_c: VectorField,
}

/// `grad Delta^{-1} h`, the antidivergence of a mean-free scalar.
fn antidiv(h: &ScalarField) -> VectorField {
    inv_laplacian_unchecked(h).gradient()
}

fn check_inputs(t: &IterateTriple, params: &StepParams, fam: &MikadoFamily) -> Result<()> {
    let grid = t.u.grid();
    if fam.grid() != grid {
        return Err(Error::GridMismatch);
    }
    if !(params.delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive".into()));
    }
    if params.lambda < 1 {
        return Err(Error::InvalidParameter("lambda must be at least 1".into()));
    }
    if params.mu != fam.mu() {
        return Err(Error::InvalidParameter(alloc::format!(
            "step mu = {} does not match the family's mu = {}",
            params.mu,
            fam.mu()
        )));
    }
    let concentration = params.lambda as f64 * params.mu;
    let required = fam.min_cells() * concentration;
    if (grid.n() as f64) < required {
        return Err(Error::Unresolved {
            n: grid.n(),
            concentration,
            required,
        });
    }
    Ok(())
}

/// `theta`, `w` and the divergence of the quadratic flux, built one
/// direction at a time so only a few full fields are alive at once.
struct Pieces {
    theta: ScalarField,
    w: VectorField,
    quad_source: ScalarField,
}

fn pieces(f: &VectorField, params: &StepParams, fam: &MikadoFamily) -> Pieces {
    let grid = f.grid();
    let d = grid.dim();
    let p = fam.p();
    let pp = conjugate(p);
    let lambda = params.lambda;
    let mut theta = ScalarField::zeros(grid);
    let mut w = VectorField::zeros(grid);
    let mut quad_source = ScalarField::zeros(grid);
    for j in 0..d {
        let fj = f.component(j);
        let chi = fj.map(|v| cutoff_value(v, params.delta, d));
        if chi.max_abs() == 0.0 {
            continue;
        }
        let a = chi.zip_map(fj, |c, v| if c == 0.0 { 0.0 } else { c * v.signum() * v.abs().powf(1.0 / pp) });
        theta.axpy(1.0, &a.pointwise(&fam.density(j, lambda)));
        drop(a);
        let c = chi.zip_map(fj, |c, v| if c == 0.0 { 0.0 } else { c * v.abs().powf(1.0 / p) });
        *w.component_mut(j) = c.pointwise(&fam.field_component(j, lambda));
        drop(c);
        // chi^2 f_j ((Theta^j W^j_j)_lambda - 1), differentiated along the pipe axis
        let s = chi.zip_map(fj, |c, v| c * c * v);
        let g = s.zip_map(&fam.product(j, lambda), |s, q| s * (q - 1.0));
        quad_source.axpy(1.0, &g.partial(j));
    }
    Pieces { theta, w, quad_source }
}

pub fn build_perturbations(t: &IterateTriple, params: &StepParams, fam: &MikadoFamily) -> Result<Perturbations> {
    check_inputs(t, params, fam)?;
    let Pieces { theta, w, .. } = pieces(&t.f, params, fam);
    let theta_c = -theta.mean();
    let w_c = antidiv(&w.divergence()).scale(-1.0);
    Ok(Perturbations { theta, theta_c, w, w_c })
}

fn lp_norm_or_nan(f: &ScalarField, p: f64) -> f64 {
    lp(f, p).unwrap_or(f64::NAN)
}

/// One step: returns `(b_1, u_1, f_1)` and its report.
///
/// `f_1 = g_chi - g_quad - g_lapl - g_lin - g_corr`, which keeps
/// `-div(grad u + b u) = div f` exact in grid arithmetic (pointwise products,
/// spectral derivatives). The triple is consumed so its storage can be reused.
pub fn assemble_step(
    t: IterateTriple,
    params: &StepParams,
    fam: &MikadoFamily,
    eps_target: f64,
) -> Result<(IterateTriple, StepReport)> {
    let mut out = assemble_step_inner(t, params, fam, eps_target)?;
    out.1.residual = Some(out.0.residual()?);
    Ok(out)
}

/// As `assemble_step` without the (comparatively costly) residual surrogate.
pub fn assemble_step_unchecked_residual(
    t: IterateTriple,
    params: &StepParams,
    fam: &MikadoFamily,
    eps_target: f64,
) -> Result<(IterateTriple, StepReport)> {
    assemble_step_inner(t, params, fam, eps_target)
}

fn assemble_step_inner(
    t: IterateTriple,
    params: &StepParams,
    fam: &MikadoFamily,
    eps_target: f64,
) -> Result<(IterateTriple, StepReport)> {
    check_inputs(&t, params, fam)?;
    let grid = t.u.grid();
    let d = grid.dim();
    let p = fam.p();
    let pp = conjugate(p);
    let IterateTriple { b: b0, u: u0, mut f } = t;
    let f0_l1 = lp_vec(&f, 1.0)?;

    let Pieces {
        theta,
        w,
        quad_source,
    } = pieces(&f, params, fam);
    let theta_c = -theta.mean();
    let mut parts = BTreeMap::new();

    // f becomes g_chi = sum (1 - chi_j^2) f_j e_j
    for j in 0..d {
        let c = f.component_mut(j);
        *c = c.map(|v| {
            let x = cutoff_value(v, params.delta, d);
            (1.0 - x * x) * v
        });
    }
    parts.insert("g_chi".into(), lp_vec(&f, 1.0)?);

    let g_quad = antidiv(&quad_source);
    drop(quad_source);
    parts.insert("g_quad".into(), lp_vec(&g_quad, 1.0)?);
    f.axpy(-1.0, &g_quad);
    drop(g_quad);

    let g_lapl = theta.gradient();
    parts.insert("g_lapl".into(), lp_vec(&g_lapl, 1.0)?);
    f.axpy(-1.0, &g_lapl);
    drop(g_lapl);

    let w_c = antidiv(&w.divergence()).scale(-1.0);

    // g_lin = w u_0 + b_0 theta
    let mut g = w.times_scalar(&u0);
    g.axpy(1.0, &b0.times_scalar(&theta));
    parts.insert("g_lin".into(), lp_vec(&g, 1.0)?);
    f.axpy(-1.0, &g);

    // g_corr = w_c u_0 + b_0 theta_c + theta_c w + theta w_c + theta_c w_c
    g = w_c.times_scalar(&u0);
    g.axpy(theta_c, &b0);
    g.axpy(theta_c, &w);
    g.axpy(1.0, &w_c.times_scalar(&theta));
    g.axpy(theta_c, &w_c);
    parts.insert("g_corr".into(), lp_vec(&g, 1.0)?);
    f.axpy(-1.0, &g);
    drop(g);

    let du = theta.add_scalar(theta_c);
    drop(theta);
    let mut db = w;
    db.axpy(1.0, &w_c);
    drop(w_c);

    let lhs_raz = lp_vec(&db, p)? + lp_norm_or_nan(&du, pp);
    let m = fam.measured_m();
    let rhs_raz = m * f0_l1.powf(1.0 / pp).max(f0_l1.powf(1.0 / p));
    let u_increment = du.norm(params.mode.u_norm())?;
    let b_increment_w1q = match params.mode {
        Mode::W1RW1Q { q, .. } => Some(db.norm(NormSpec::w1p(q))?),
        _ => None,
    };
    let theta_h1 = du.norm(NormSpec::h1())?;
    let f1_l1 = lp_vec(&f, 1.0)?;
    let lhs_dwa = u_increment + b_increment_w1q.unwrap_or(0.0) + f1_l1;

    let mut u1 = u0;
    u1.axpy(1.0, &du);
    drop(du);
    let mut b1 = b0;
    b1.axpy(1.0, &db);
    drop(db);
    let next = IterateTriple::new(b1, u1, f)?;
    let report = StepReport {
        params: *params,
        p,
        lhs_raz,
        rhs_raz,
        lhs_dwa,
        eps_target,
        g_parts: parts,
        residual: None,
        measured_m: m,
        f0_l1,
        f1_l1,
        u_increment,
        b_increment_w1q,
        theta_c,
        theta_h1,
        div_b1: next.relative_div_b()?,
        mean_u1: next.u.mean(),
    };
    Ok((next, report))
}
