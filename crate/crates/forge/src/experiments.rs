//! The experiments: each reads its config, runs the core operations, records
//! named checks and writes artifacts through a sink.

use mikado_core::convex::{
    assemble_step, g_chi_l1, mu_ladder, run_iteration, select_parameters, IterateTriple, Mode, RunStatus,
    SearchConfig, StepParams, StepReport, DIV_B_TOL, MEAN_U_TOL,
};
use mikado_core::counterexample as ce;
use mikado_core::mikado::{self, MikadoFamily, MIN_CELLS_PER_MU};
use mikado_core::oscillation::{
    antidivergence_rate, holder_constant, improved_holder_check, riemann_lebesgue_check, OscillationReport,
};
use mikado_core::random::{bandlimited, divergence_free};
use mikado_core::torus::norm::{lp, lp_vec};
use mikado_core::torus::{resample, resample_vector, ScalarField, TorusGrid, VectorField};
use mikado_core::zhikov::{self, BallQuadrature, SolveConfig, TruncationMode, TruncationSchedule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{ConfigError, Experiment, ExperimentConfig};
use crate::report::{value_of, Check, CsvTable, Report, Sink};
use crate::tfld::FieldData;

#[derive(Debug, thiserror::Error)]
pub enum ForgeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] mikado_core::Error),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

impl ForgeError {
    /// 2 for bad input, 3 when a resource ran out, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use mikado_core::Error as E;
        match self {
            ForgeError::Config(_) => 2,
            ForgeError::Core(
                E::InvalidParameter(_)
                | E::OddResolution(_)
                | E::ResolutionTooSmall(_)
                | E::DimensionTooSmall(_)
                | E::ConcentrationTooSmall { .. }
                | E::NonZeroMean { .. }
                | E::GridMismatch,
            ) => 2,
            ForgeError::Core(
                E::BudgetExhausted { .. } | E::Unresolved { .. } | E::NonConvergence { .. } | E::MemoryBudget { .. },
            ) => 3,
            ForgeError::Core(E::Aliasing { .. }) => 3,
            ForgeError::Io(_) => 3,
        }
    }
}

type Out = Result<(), ForgeError>;

/// Main report file name of each experiment.
pub fn report_name(e: Experiment) -> &'static str {
    match e {
        Experiment::CiRun => "run.json",
        _ => "report.json",
    }
}

/// Runs the experiment, writes every artifact and the report, and returns the report.
pub fn run(cfg: &ExperimentConfig, sink: &mut dyn Sink) -> Result<Report, ForgeError> {
    let mut params = cfg.params.clone();
    params.remove("out_dir");
    let mut report = Report::new(cfg.experiment.name(), params);
    match cfg.experiment {
        Experiment::MikadoVerify => mikado_verify(cfg, &mut report, sink)?,
        Experiment::OscVerify => osc_verify(cfg, &mut report, sink)?,
        Experiment::CiStep => ci_step(cfg, &mut report, sink)?,
        Experiment::CiRun => ci_run(cfg, &mut report, sink)?,
        Experiment::Solve => solve(cfg, &mut report, sink)?,
        Experiment::MaxPrinc => maxprinc(cfg, &mut report, sink)?,
        Experiment::Moser => moser(cfg, &mut report, sink)?,
        Experiment::Commutator => commutator(cfg, &mut report, sink)?,
        Experiment::Counterexample => counterexample(cfg, &mut report, sink)?,
        Experiment::Uniqueness => uniqueness(cfg, &mut report, sink)?,
    }
    sink.put_json(report_name(cfg.experiment), &report.to_value())?;
    Ok(report)
}

fn grid(cfg: &ExperimentConfig, d: usize, n: usize) -> Result<TorusGrid, ForgeError> {
    let d = cfg.get("d", d)?;
    let n = cfg.get("N", n)?;
    TorusGrid::new(d, n).map_err(|e| cfg.invalid("N", e.to_string()).into())
}

fn rng(cfg: &ExperimentConfig, seed: u64) -> Result<ChaCha8Rng, ForgeError> {
    Ok(ChaCha8Rng::seed_from_u64(cfg.get("seed", seed)?))
}

fn mode(cfg: &ExperimentConfig) -> Result<Mode, ForgeError> {
    let r = cfg.get("r", 1.1)?;
    Ok(match cfg.raw("mode").unwrap_or("W1R") {
        "H1" => Mode::H1,
        "W1R" => Mode::W1R { r },
        "W1R_W1Q" => Mode::W1RW1Q {
            r,
            q: cfg
                .get_opt("q")?
                .ok_or_else(|| ConfigError::Missing("q".into()))?,
        },
        _ => return Err(cfg.invalid("mode", "expected H1, W1R or W1R_W1Q").into()),
    })
}

fn search_config(cfg: &ExperimentConfig) -> Result<SearchConfig, ForgeError> {
    let min_cells: f64 = cfg.get("min_cells", MIN_CELLS_PER_MU)?;
    if !(min_cells > 0.0) {
        return Err(cfg.invalid("min_cells", "must be positive").into());
    }
    Ok(SearchConfig {
        min_cells,
        ..SearchConfig::default()
    })
}

/// Random drift normalized to `|b|_2 = amp`.
fn drift(grid: TorusGrid, amp: f64, rng: &mut ChaCha8Rng) -> Result<VectorField, ForgeError> {
    let b = divergence_free(grid, 3, rng);
    let n = lp_vec(&b, 2.0)?;
    Ok(b.scale(amp / n))
}

/// The seed pair of the convex-integration experiments: a bandwidth-2
/// divergence-free drift and a bandwidth-2 mean-zero `u`.
pub fn toy_fields(grid: TorusGrid, seed: u64) -> (VectorField, ScalarField) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = divergence_free(grid, 2, &mut rng);
    let u = bandlimited(grid, 2, true, &mut rng);
    (b, u)
}

fn put_triple(sink: &mut dyn Sink, report: &mut Report, dir: &str, t: &IterateTriple) -> Out {
    sink.put_field(report, &format!("{dir}/b.bin"), &FieldData::Vector(t.b.clone()))?;
    sink.put_field(report, &format!("{dir}/u.bin"), &FieldData::Scalar(t.u.clone()))?;
    sink.put_field(report, &format!("{dir}/f.bin"), &FieldData::Vector(t.f.clone()))?;
    Ok(())
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, |m, x| if x.is_nan() { f64::NAN } else { m.max(x) })
}

fn osc_table(rep: &OscillationReport) -> CsvTable {
    let lambda: Vec<f64> = rep.lambda.iter().map(|&l| l as f64).collect();
    CsvTable::rate_fit(&lambda, &rep.measured, &rep.bound, rep.fitted_rate)
}

// ---------------------------------------------------------------- mikado

fn mikado_verify(cfg: &ExperimentConfig, report: &mut Report, sink: &mut dyn Sink) -> Out {
    let grid = grid(cfg, 3, 64)?;
    let p: f64 = cfg.get("p", 1.5)?;
    let mu: f64 = cfg.get("mu", 8.0)?;
    let min_cells = search_config(cfg)?.min_cells;
    let fam = MikadoFamily::build_with_min_cells(grid, p, mu, min_cells)?;
    let check = mikado::verify_family(&fam)?;
    report.check(Check::at_most("div_w", max_of(check.div_w.iter().copied()), mikado::DIV_TOL));
    report.check(Check::at_most(
        "div_theta_w",
        max_of(check.div_theta_w.iter().copied()),
        mikado::DIV_TOL,
    ));
    report.check(Check::at_most(
        "mean_theta",
        max_of(check.mean_theta.iter().copied()),
        mikado::MEAN_TOL,
    ));
    report.check(Check::at_most("mean_w", max_of(check.mean_w.iter().copied()), mikado::MEAN_TOL));
    let cancel = max_of(check.cancellation.iter().enumerate().flat_map(|(j, c)| {
        c.iter()
            .enumerate()
            .map(move |(a, v)| (v - if a == j { 1.0 } else { 0.0 }).abs())
    }));
    report.check(Check::at_most("cancellation", cancel, mikado::CANCELLATION_TOL));
    report.check(Check::new("disjoint", check.overlaps == 0, check.overlaps, 0));
    report.check(Check::at_most(
        "product_l1_le_m",
        check.product_l1_sum,
        check.measured_m * (1.0 + 1e-12),
    ));
    sink.put_json("family.json", &value_of(&fam.manifest()))?;
    if cfg.get("fields", false)? {
        for j in 0..grid.dim() {
            sink.put_field(report, &format!("theta_{j}.bin"), &FieldData::Scalar(fam.density(j, 1)))?;
            sink.put_field(report, &format!("w_{j}.bin"), &FieldData::Vector(fam.field(j, 1)))?;
        }
    }
    let mut results = json!({"family": value_of(&check)});
    if let Some(mus) = cfg.get_list::<f64>("mus")? {
        let r: f64 = cfg.get("r", 2.0)?;
        let k: usize = cfg.get("k", 0)?;
        let sn: usize = cfg.get("scaling_N", 512)?;
        // norms come from transverse slices, so the full grid is never allocated
        let sgrid = TorusGrid::with_budget(grid.dim(), sn, u128::MAX).map_err(|e| cfg.invalid("scaling_N", e.to_string()))?;
        let rep = mikado::scaling_report(sgrid, p, r, k, &mus)?;
        let tol = if k == 0 { 0.1 } else { 0.15 };
        report.check(Check::at_most(
            "theta_slope_error",
            (rep.theta_fitted - rep.theta_predicted).abs(),
            tol,
        ));
        report.check(Check::at_most("w_slope_error", (rep.w_fitted - rep.w_predicted).abs(), tol));
        report.check(Check::at_most("h1_slope_error", (rep.h1_fitted - rep.h1_predicted).abs(), 0.1));
        let anchored = |norms: &[f64], slope: f64| -> Vec<f64> {
            mus.iter().map(|m| norms[0] * (m / mus[0]).powf(slope)).collect()
        };
        sink.put_csv(
            "scaling_theta.csv",
            &CsvTable::rate_fit(&mus, &rep.theta_norms, &anchored(&rep.theta_norms, rep.theta_predicted), Some(rep.theta_fitted)),
        )?;
        sink.put_csv(
            "scaling_w.csv",
            &CsvTable::rate_fit(&mus, &rep.w_norms, &anchored(&rep.w_norms, rep.w_predicted), Some(rep.w_fitted)),
        )?;
        sink.put_csv(
            "scaling_h1.csv",
            &CsvTable::rate_fit(&mus, &rep.h1_norms, &anchored(&rep.h1_norms, rep.h1_predicted), Some(rep.h1_fitted)),
        )?;
        results["scaling"] = value_of(&rep);
    }
    report.results = results;
    Ok(())
}

// ----------------------------------------------------------- oscillation

/// Lambdas of the oscillation sweeps.
pub const OSC_LAMBDAS: [usize; 4] = [4, 8, 16, 32];
const RL_LAMBDAS: [usize; 4] = [1, 2, 4, 8];

fn osc_verify(cfg: &ExperimentConfig, report: &mut Report, sink: &mut dyn Sink) -> Out {
    let grid = grid(cfg, 2, 256)?;
    let p: f64 = cfg.get("p", 1.5)?;
    let cases: usize = cfg.get("cases", 50)?;
    let mut rng = rng(cfg, 0)?;
    let c_p = holder_constant(grid.dim(), p)
        .ok_or_else(|| cfg.invalid("p", "no calibrated improved-Hoelder constant for this (d, p)"))?;

    let pairs: Vec<(ScalarField, ScalarField)> = (0..cases)
        .map(|_| (bandlimited(grid, 3, false, &mut rng), bandlimited(grid, 3, true, &mut rng)))
        .collect();
    let rl: Vec<OscillationReport> = pairs
        .par_iter()
        .map(|(f, g)| riemann_lebesgue_check(f, g, &RL_LAMBDAS))
        .collect::<Result<_, _>>()?;
    let worst = max_of(
        rl.iter()
            .flat_map(|r| r.measured.iter().zip(&r.bound).map(|(m, b)| m / b)),
    );
    report.check(Check::new(
        "riemann_lebesgue",
        rl.iter().all(|r| r.pass),
        worst,
        1.0,
    ));

    let two_pi = 2.0 * std::f64::consts::PI;
    let f = ScalarField::from_fn(grid, |x| (two_pi * x[0]).sin());
    let g = ScalarField::from_fn(grid, |x| 1.0 + 0.5 * (two_pi * x[0]).cos());
    let holder = improved_holder_check(&f, &g, &OSC_LAMBDAS, p, c_p)?;
    report.check(Check::new("holder_bound", holder.pass, value_of(&holder.measured), value_of(&holder.bound)));
    let rate = holder.fitted_rate.unwrap_or(f64::NAN);
    report.check(Check::at_most("holder_rate", rate, -1.0 / p + 0.15));

    let f = ScalarField::from_fn(grid, |x| 1.0 + 0.5 * (two_pi * (x[0] + 2.0 * x[1])).cos());
    let g = bandlimited(grid, 3, true, &mut rng);
    let anti = antidivergence_rate(&f, &g, &OSC_LAMBDAS, 1.0, 0.15)?;
    let anti_rate = anti.fitted_rate.unwrap_or(f64::NAN);
    report.check(Check::new(
        "antidivergence_rate",
        (anti_rate + 1.0).abs() <= 0.15,
        anti_rate,
        [-1.15, -0.85],
    ));
    report.check(Check::new("antidivergence_bound", anti.pass, value_of(&anti.measured), value_of(&anti.bound)));

    sink.put_csv("holder.csv", &osc_table(&holder))?;
    sink.put_csv("antidivergence.csv", &osc_table(&anti))?;
    sink.put_csv("riemann_lebesgue.csv", &osc_table(&rl[0]))?;
    report.results = json!({
        "riemann_lebesgue_cases": rl.len(),
        "riemann_lebesgue_worst_ratio": worst,
        "holder": value_of(&holder),
        "antidivergence": value_of(&anti),
    });
    Ok(())
}

// ------------------------------------------------------------ convex step

fn step_checks(report: &mut Report, prefix: &str, rep: &StepReport) {
    report.check(Check::new(format!("{prefix}raz"), rep.raz_ok(), rep.lhs_raz, rep.rhs_raz));
    report.check(Check::new(format!("{prefix}dwa"), rep.dwa_ok(), rep.lhs_dwa, rep.eps_target));
    report.check(Check::new(
        format!("{prefix}g_chi"),
        rep.g_chi_ok(),
        rep.part("g_chi"),
        rep.params.delta / 2.0,
    ));
    report.check(Check::at_most(format!("{prefix}div_b"), rep.div_b1, DIV_B_TOL));
    report.check(Check::at_most(format!("{prefix}mean_u"), rep.mean_u1.abs(), MEAN_U_TOL));
}

/// Parameters used when the search cannot meet the budget: the `delta` the
/// search would pick, the smallest `mu`, and the largest resolvable dyadic `lambda`.
pub fn fallback_params(t: &IterateTriple, eps: f64, mode: Mode, cfg: &SearchConfig) -> Option<StepParams> {
    let grid = t.u.grid();
    let f_l1 = lp_vec(&t.f, 1.0).ok()?;
    let deltas: Vec<f64> = (1..=cfg.delta_steps).map(|k| f_l1 * 0.5f64.powi(k as i32)).collect();
    let delta = deltas
        .iter()
        .copied()
        .find(|&d| g_chi_l1(&t.f, d) <= eps / 4.0)
        .unwrap_or(*deltas.last()?);
    let mu = *mu_ladder(grid.dim(), grid.n(), cfg).first()?;
    let mut lambda = 0;
    let mut l = 2;
    while cfg.min_cells * (l as f64) * mu <= grid.n() as f64 {
        lambda = l;
        l *= 2;
    }
    (lambda > 0).then_some(StepParams { delta, lambda, mu, mode })
}

fn ci_step(cfg: &ExperimentConfig, report: &mut Report, sink: &mut dyn Sink) -> Out {
    let grid = grid(cfg, 3, 128)?;
    let p: f64 = cfg.get("p", 1.5)?;
    let mode = mode(cfg)?;
    let seed: u64 = cfg.get("seed", 7)?;
    let scfg = search_config(cfg)?;
    let (b, u) = toy_fields(grid, seed);
    let t = IterateTriple::seed(b.clone(), u.clone())?;
    let f0 = lp_vec(&t.f, 1.0)?;
    let eps = cfg.get("eps", 0.25)? * f0;
    put_triple(sink, report, "step_0", &t)?;

    let given = (
        cfg.get_opt::<f64>("delta")?,
        cfg.get_opt::<usize>("lambda")?,
        cfg.get_opt::<f64>("mu")?,
    );
    let mut search = json!({"eps": eps, "f0_l1": f0});
    let params = match given {
        (Some(delta), Some(lambda), Some(mu)) => StepParams { delta, lambda, mu, mode },
        (None, None, None) => match select_parameters(&t, p, eps, mode, &scfg) {
            Ok(sel) => sel.params,
            Err(mikado_core::Error::BudgetExhausted { achieved }) => {
                report.exhausted = true;
                search["exhausted"] = json!(true);
                search["achieved"] = json!(achieved);
                match fallback_params(&t, eps, mode, &scfg) {
                    Some(p) => p,
                    None => {
                        report.results = json!({"search": search});
                        return Ok(());
                    }
                }
            }
            Err(e) => return Err(e.into()),
        },
        _ => return Err(cfg.invalid("delta", "give all of delta, lambda, mu or none").into()),
    };
    search["params"] = value_of(&params);

    let fam = MikadoFamily::build_with_min_cells(grid, p, params.mu, scfg.min_cells)?;
    let (t1, rep) = assemble_step(t, &params, &fam, eps)?;
    drop(fam);
    step_checks(report, "", &rep);
    put_triple(sink, report, "step_1", &t1)?;
    sink.put_json("step_1/report.json", &value_of(&rep))?;
    drop(t1);
    let mut results = json!({"search": search, "step": value_of(&rep)});

    if let Some(fine_n) = cfg.get_opt::<usize>("refine_N")? {
        let fine = TorusGrid::new(grid.dim(), fine_n).map_err(|e| cfg.invalid("refine_N", e.to_string()))?;
        let tf = IterateTriple::seed(resample_vector(&b, fine)?, resample(&u, fine)?)?;
        drop((b, u));
        let fam = MikadoFamily::build_with_min_cells(fine, p, params.mu, scfg.min_cells)?;
        let (_, fine_rep) = assemble_step(tf, &params, &fam, eps)?;
        let coarse = rep.residual.unwrap_or(f64::NAN);
        let refined = fine_rep.residual.unwrap_or(f64::NAN);
        report.check(Check::at_least("residual_refinement", coarse / refined, 4.0));
        results["refinement"] = json!({
            "N": fine_n,
            "residual_coarse": coarse,
            "residual_fine": refined,
            "ratio": coarse / refined,
        });
    }
    report.results = results;
    Ok(())
}

fn ci_run(cfg: &ExperimentConfig, report: &mut Report, sink: &mut dyn Sink) -> Out {
    let grid = grid(cfg, 3, 128)?;
    let p: f64 = cfg.get("p", 1.5)?;
    let mode = mode(cfg)?;
    let seed: u64 = cfg.get("seed", 7)?;
    let k_steps: u32 = cfg.get("K", 3)?;
    let scfg = search_config(cfg)?;
    let (b0, u0) = toy_fields(grid, seed);
    // eps is relative to |b_0|_p
    let eps = cfg.get("eps", 0.1)? * lp_vec(&b0, p)?;
    let mut io_err = None;
    let outcome = run_iteration(b0, u0, p, eps, k_steps, mode, &scfg, |k, t, rep| {
        if io_err.is_some() {
            return;
        }
        let dir = format!("step_{k}");
        let mut write = || -> Out {
            put_triple(sink, report, &dir, t)?;
            let v = rep.map_or(json!({"seed": true}), value_of);
            sink.put_json(&format!("{dir}/report.json"), &v)?;
            Ok(())
        };
        if let Err(e) = write() {
            io_err = Some(e);
        }
    });
    if let Some(e) = io_err {
        return Err(e);
    }
    let conv = match outcome {
        Ok((_, conv)) => conv,
        Err(e @ (mikado_core::Error::BudgetExhausted { .. } | mikado_core::Error::Unresolved { .. })) => {
            // nothing fits on this grid, not even the first step
            report.exhausted = true;
            report.check(Check::new("completed", false, e.to_string(), "Completed"));
            report.results = json!({"error": e.to_string(), "eps": eps});
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };
    report.exhausted = matches!(conv.status, RunStatus::Exhausted { .. });
    report.check(Check::new(
        "completed",
        conv.status == RunStatus::Completed,
        value_of(&conv.status),
        "Completed",
    ));
    report.check(Check::at_least("decrease_4x", conv.min_decrease().unwrap_or(f64::NAN), 4.0));
    report.check(Check::at_least(
        "lower_bound",
        *conv.u_norm.last().unwrap_or(&f64::NAN),
        0.5 * conv.u0_norm,
    ));
    report.check(Check::at_most("drift_close", *conv.b_dist.last().unwrap_or(&f64::NAN), conv.eps));
    for (i, s) in conv.steps.iter().enumerate() {
        step_checks(report, &format!("step_{}_", i + 1), s);
    }
    let ledger: Vec<Value> = conv
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            json!({"step": i + 1, "lhs_raz": s.lhs_raz, "rhs_raz": s.rhs_raz,
                   "lhs_dwa": s.lhs_dwa, "eps_k": s.eps_target, "f1_l1": s.f1_l1})
        })
        .collect();
    report.results = json!({"convergence": value_of(&conv), "ledger": ledger});
    Ok(())
}

// ---------------------------------------------------------------- solver

fn solve(cfg: &ExperimentConfig, report: &mut Report, sink: &mut dyn Sink) -> Out {
    let grid = grid(cfg, 2, 32)?;
    let cases: usize = cfg.get("cases", 20)?;
    let amp_max: f64 = cfg.get("amplitude", 20.0)?;
    let mut rng = rng(cfg, 11)?;
    let scfg = SolveConfig::default();
    let inputs: Vec<(VectorField, ScalarField)> = (0..cases)
        .map(|_| {
            let amp = rng.gen_range(0.05 * amp_max..amp_max);
            let b = drift(grid, amp, &mut rng)?;
            let u_star = bandlimited(grid, 4, true, &mut rng);
            Ok((b, u_star))
        })
        .collect::<Result<_, ForgeError>>()?;
    let rows: Vec<(f64, f64, f64, bool, usize)> = inputs
        .par_iter()
        .map(|(b, u_star)| {
            let f = zhikov::drift_operator(b, u_star);
            let (u, stats) = zhikov::solve_with_stats(b, &f, &scfg)?;
            let err = lp(&(&u - u_star), 2.0)? / lp(u_star, 2.0)?;
            let e = zhikov::energy_check(&u, b, &f);
            Ok((lp_vec(b, 2.0)?, err, e.relative_defect, e.inequality_ok, stats.iterations))
        })
        .collect::<Result<_, ForgeError>>()?;
    report.check(Check::at_most("manufactured", max_of(rows.iter().map(|r| r.1)), 1e-8));
    report.check(Check::at_most("energy_identity", max_of(rows.iter().map(|r| r.2)), 1e-8));
    report.check(Check::new("energy_inequality", rows.iter().all(|r| r.3), rows.iter().filter(|r| !r.3).count(), 0));
    let mut table = CsvTable::new(&["case", "drift_l2", "relative_error", "energy_defect", "iterations"]);
    for (i, r) in rows.iter().enumerate() {
        table.rows.push(vec![i as f64, r.0, r.1, r.2, r.4 as f64]);
    }
    sink.put_csv("solve.csv", &table)?;
    if let Some((b, u_star)) = inputs.first() {
        sink.put_field(report, "b.bin", &FieldData::Vector(b.clone()))?;
        sink.put_field(report, "u.bin", &FieldData::Scalar(u_star.clone()))?;
    }
    report.results = json!({"cases": cases, "rows": value_of(&rows)});
    Ok(())
}

fn maxprinc(cfg: &ExperimentConfig, report: &mut Report, sink: &mut dyn Sink) -> Out {
    let grid = grid(cfg, 2, 32)?;
    let count: usize = cfg.get("count", 30)?;
    let mut rng = rng(cfg, zhikov::MAXPRINC_SEED)?;
    let c = zhikov::maxprinc_constant(grid.dim())
        .ok_or_else(|| cfg.invalid("d", "no frozen maximum-principle constant for this dimension"))?;
    let drifts = zhikov::drift_family(grid, count, &mut rng);
    let f = bandlimited(grid, 4, true, &mut rng);
    let table = zhikov::max_principle_sweep(&f, &drifts, c, &SolveConfig::default())?;
    let failures = table.rows.iter().filter(|r| r.ratio.is_none()).count();
    report.check(Check::new("all_solved", failures == 0, failures, 0));
    report.check(Check::at_most("bounded", table.max_ratio, c));
    report.check(Check::new(
        "no_upward_trend",
        table.trend_ok,
        table.t_statistic,
        zhikov::t_quantile_95(count.saturating_sub(2) as f64),
    ));
    let mut csv = CsvTable::new(&["drift_l2", "ratio", "constant"]);
    for r in &table.rows {
        csv.rows.push(vec![r.drift_l2, r.ratio.unwrap_or(f64::NAN), c]);
    }
    sink.put_csv("maxprinc.csv", &csv)?;
    report.results = value_of(&table);
    Ok(())
}

fn moser(cfg: &ExperimentConfig, report: &mut Report, sink: &mut dyn Sink) -> Out {
    let grid = grid(cfg, 2, 64)?;
    let amp: f64 = cfg.get("amplitude", 5.0)?;
    let k_max: u32 = cfg.get("k_max", 3)?;
    if k_max == 0 {
        return Err(cfg.invalid("k_max", "must be at least 1").into());
    }
    let mut rng = rng(cfg, 13)?;
    let b = drift(grid, amp, &mut rng)?;
    let f = bandlimited(grid, 3, true, &mut rng);
    let u = zhikov::solve(&b, &f, &SolveConfig::default())?;
    let rows = zhikov::moser_gns_check(&u, &b, &f, k_max)?;
    report.check(Check::at_most("moser_k1", rows[0].relative_defect, 1e-6));
    let live: Vec<_> = rows.iter().filter(|r| !r.skipped).collect();
    report.check(Check::at_most("drift_terms", max_of(live.iter().map(|r| r.drift_term)), 1e-8));
    let gns_fail = live.iter().filter(|r| r.gns.is_some_and(|g| !g.ok)).count();
    report.check(Check::new("gns", gns_fail == 0, gns_fail, 0));
    let mut csv = CsvTable::new(&["k", "lhs", "rhs", "relative_defect", "drift_term"]);
    for r in &rows {
        csv.rows.push(vec![r.k as f64, r.lhs, r.rhs, r.relative_defect, r.drift_term]);
    }
    sink.put_csv("moser.csv", &csv)?;
    sink.put_field(report, "u.bin", &FieldData::Scalar(u))?;
    report.results = json!({"rows": value_of(&rows), "gns_constant": zhikov::gns_constant(grid.dim())});
    Ok(())
}

/// Mollification scales of the commutator experiment.
pub const COMMUTATOR_EPS: [f64; 4] = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];

fn commutator(cfg: &ExperimentConfig, report: &mut Report, sink: &mut dyn Sink) -> Out {
    let grid = grid(cfg, 2, 32)?;
    let d = grid.dim();
    let mut rng = rng(cfg, 8)?;
    let moments = BallQuadrature::new(d, 48, 16)?.moment_matrix();
    let dev = max_of(moments.iter().enumerate().flat_map(|(i, row)| {
        row.iter()
            .enumerate()
            .map(move |(j, v)| (v + if i == j { 1.0 } else { 0.0 }).abs())
    }));
    report.check(Check::at_most("moment_matrix_minus_identity", dev, 1e-6));

    let quad = if d == 2 {
        BallQuadrature::new(2, 48, 16)?
    } else {
        BallQuadrature::new(d, 8, 6)?
    };
    let u = bandlimited(grid, 3, false, &mut rng);
    let v = bandlimited(grid, 3, false, &mut rng);
    let constant = VectorField::from_fn(grid, |_, a| 1.0 + a as f64);
    let flat = zhikov::commutator_check(&constant, &u, &v, &quad, &COMMUTATOR_EPS)?;
    report.check(Check::at_most(
        "constant_drift",
        max_of(flat.values.iter().map(|x| x.abs())),
        1e-12,
    ));
    let b = drift(grid, 1.0, &mut rng)?;
    let smooth = zhikov::commutator_check(&b, &u, &v, &quad, &COMMUTATOR_EPS)?;
    report.check(Check::at_least("smooth_slope", smooth.slope.unwrap_or(f64::NAN), 0.8));
    report.check(Check::new("smooth_decays", smooth.decays, value_of(&smooth.values), Value::Null));
    let mags: Vec<f64> = smooth.values.iter().map(|x| x.abs()).collect();
    let predicted: Vec<f64> = COMMUTATOR_EPS.iter().map(|e| mags[0] * e / COMMUTATOR_EPS[0]).collect();
    sink.put_csv(
        "commutator.csv",
        &CsvTable::rate_fit(&COMMUTATOR_EPS, &mags, &predicted, smooth.slope),
    )?;
    let singular = if d == 2 {
        let s = zhikov::singular_drift(grid, 2.0, 2.0 / grid.n() as f64)?;
        value_of(&zhikov::commutator_check(&s, &u, &v, &quad, &COMMUTATOR_EPS)?)
    } else {
        Value::Null
    };
    report.results = json!({
        "moment_matrix": moments,
        "moment_sign": -1,
        "constant": value_of(&flat),
        "smooth": value_of(&smooth),
        "singular": singular,
    });
    Ok(())
}

// ------------------------------------------------------- counterexample

fn counterexample(cfg: &ExperimentConfig, report: &mut Report, sink: &mut dyn Sink) -> Out {
    let n_r: usize = cfg.get("n_r", 32)?;
    let n_sph: usize = cfg.get("n_sph", 16)?;
    let rep = ce::run(n_r, n_sph)?;
    let fine = ce::run(2 * n_r, 2 * n_sph)?;
    let [c0, c1, c2] = rep.constraints;
    report.check(Check::new(
        "constraints",
        c0.abs() <= 1e-8 && c1.abs() <= 1e-8 && c2.abs() <= 1e-8,
        rep.constraints,
        1e-8,
    ));
    let target = 64.0 * std::f64::consts::PI / 15.0;
    report.check(Check::at_most("grad_energy", (rep.grad_energy - target).abs() / target, 1e-5));
    report.check(Check::at_most("defect_magnitude", (rep.defect.abs() - 1.0).abs(), 1e-3));
    report.check(Check::at_most("quadrature_convergence", (fine.defect - rep.defect).abs(), 1e-5));
    report.check(Check::at_most("flux", max_of(rep.flux.iter().map(|f| f.1.abs())), 1e-9));
    let partial_growth = rep
        .lp_norms
        .iter()
        .all(|row| row.partial.windows(2).all(|w| w[1].1 > w[0].1));
    let totals: Vec<f64> = rep.lp_norms.iter().map(|r| r.total.unwrap_or(f64::INFINITY)).collect();
    let total_growth = totals.windows(2).all(|w| w[1] > w[0]);
    report.check(Check::new(
        "lp_divergence",
        partial_growth && total_growth,
        value_of(&totals),
        "increasing",
    ));
    let lp_map: serde_json::Map<String, Value> = rep
        .lp_norms
        .iter()
        .map(|r| (format!("{}", r.p), value_of(&r.total)))
        .collect();
    let out = json!({
        "alpha_spec": rep.alpha_spec,
        "beta_spec": rep.beta_spec,
        "constraints": {
            "int_beta": c0,
            "int_alpha_beta": c1,
            "int_alpha2_beta_plus_2": c2,
        },
        "grad_energy": rep.grad_energy,
        "drift_term": rep.drift_term,
        "defect": rep.defect,
        "lp_norms": lp_map,
        "lp_partials": value_of(&rep.lp_norms),
        "flux": value_of(&rep.flux),
        "pass": report.pass(),
    });
    sink.put_json("counterexample.json", &out)?;
    report.results = out;
    Ok(())
}

// ------------------------------------------------------------ uniqueness

fn uniqueness(cfg: &ExperimentConfig, report: &mut Report, sink: &mut dyn Sink) -> Out {
    let grid = grid(cfg, 2, 64)?;
    let amp: f64 = cfg.get("amplitude", 2.0)?;
    let mut rng = rng(cfg, 6)?;
    let scfg = SolveConfig::default();
    let b = drift(grid, amp, &mut rng)?;
    let f = bandlimited(grid, 3, true, &mut rng);
    let top = b.max_abs();
    let s1 = TruncationSchedule::new(vec![2.0 * top, 3.0 * top, 4.0 * top], TruncationMode::Clamp)?;
    let s2 = TruncationSchedule::new(vec![5.0 * top, 6.0 * top, 7.0 * top], TruncationMode::Clamp)?;
    let bounded = zhikov::uniqueness_probe(&b, &f, &s1, &s2, 2.0, &scfg)?;
    report.check(Check::at_most("bounded_drift", bounded.distance, 1e-10));
    let energy_ok = |d: &zhikov::ApproximationDiagnostics| d.levels.last().is_some_and(|l| l.energy.inequality_ok);
    report.check(Check::new(
        "energy_inequality",
        energy_ok(&bounded.first) && energy_ok(&bounded.second),
        Value::Null,
        Value::Null,
    ));
    let mut results = json!({"bounded": value_of(&bounded)});
    if grid.dim() == 2 {
        let n = grid.n() as f64;
        let sin1 = ScalarField::from_fn(grid, |x| (2.0 * std::f64::consts::PI * x[0]).sin());
        let rough = zhikov::singular_drift(grid, 0.5, 0.01)?;
        let top = rough.max_abs();
        let clamp = TruncationSchedule::new(vec![0.25 * top, 0.5 * top, 2.0 * top], TruncationMode::Clamp)?;
        let low = TruncationSchedule::new(vec![n / 8.0, n / 4.0, n / 2.0], TruncationMode::Lowpass)?;
        let rough_rep = zhikov::uniqueness_probe(&rough, &sin1, &clamp, &low, 2.0, &scfg)?;
        report.check(Check::at_most("rough_drift", rough_rep.relative, 1e-6));
        let singular = zhikov::singular_drift(grid, 2.0, 0.03)?;
        let levels = TruncationSchedule::new(vec![n / 16.0, n / 8.0, n / 4.0, n / 2.0 - 1.0], TruncationMode::Lowpass)?;
        let (_, diag) = zhikov::approximation_solution(&singular, &sin1, &levels, 1.5, &scfg)?;
        let gap = zhikov::nonuniqueness_gap(&ScalarField::zeros(grid), &b, &f, &scfg)?;
        let mut csv = CsvTable::new(&["level", "cauchy"]);
        for (l, c) in diag.levels.iter().skip(1).zip(&diag.cauchy) {
            csv.rows.push(vec![l.level, *c]);
        }
        sink.put_csv("cauchy.csv", &csv)?;
        results["rough"] = value_of(&rough_rep);
        results["singular"] = value_of(&diag);
        results["zero_candidate_gap"] = json!(gap);
    }
    report.results = results;
    Ok(())
}
