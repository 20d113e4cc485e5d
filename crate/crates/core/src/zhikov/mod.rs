pub mod approx;
pub mod commutator;
pub mod energy;
pub mod maxprinc;
pub mod solver;

pub use approx::{
    approximation_solution, nonuniqueness_gap, truncate, uniqueness_probe, ApproximationDiagnostics,
    LevelDiagnostics, TruncationMode, TruncationSchedule, UniquenessReport,
};
pub use commutator::{commutator_check, commutator_value, singular_drift, BallQuadrature, CommutatorReport};
pub use energy::{
    calibrate_gns, energy_check, gns_constant, gns_required, moser_gns_check, EnergyReport, GnsRow, MoserRow,
    ENERGY_TOL, GNS_CONSTANTS,
};
pub use maxprinc::{
    calibrate_max_principle, drift_family, max_principle_sweep, maxprinc_constant, t_quantile_95, MaxPrincipleRow,
    MaxPrincipleTable, MAXPRINC_CONSTANTS, MAXPRINC_SEED,
};
pub use solver::{check_drift, drift_operator, solve, solve_with_stats, SolveConfig, SolveStats, DRIFT_DIV_TOL};
