pub mod cutoff;
pub mod schedule;
pub mod step;
pub mod triple;

pub use cutoff::{build_cutoffs, cutoff_value, ramp};
pub use schedule::{
    eps_schedule, g_chi_l1, mu_ladder, reference_m, run_iteration, seed_scale, select_parameters,
    ConvergenceReport, RunStatus, SearchConfig, Selection,
};
pub use step::{
    assemble_step, assemble_step_unchecked_residual, build_perturbations, Perturbations, StepParams,
    StepReport, G_PARTS,
};
pub use triple::{validate_mode, IterateTriple, Mode, TripleNorms, DIV_B_TOL, MEAN_U_TOL};
