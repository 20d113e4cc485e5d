use alloc::string::String;

/// Errors raised by the numerical operations of this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("grid resolution must be even, got {0}")]
    OddResolution(usize),
    #[error("grid resolution must be at least 8, got {0}")]
    ResolutionTooSmall(usize),
    #[error("torus dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("grid of {points} points exceeds the budget of {budget} points")]
    MemoryBudget { points: u128, budget: u128 },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("field has non-negligible mean {mean:e} (norm {norm:e})")]
    NonZeroMean { mean: f64, norm: f64 },
    #[error("dilation by {lambda} aliases a field of bandwidth {bandwidth} on N = {n}")]
    Aliasing {
        lambda: usize,
        bandwidth: usize,
        n: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("Mikado concentration mu = {mu} must exceed 2d = {two_d}")]
    ConcentrationTooSmall { mu: f64, two_d: usize },
    #[error("grid N = {n} cannot resolve pipes at concentration {concentration} (needs N >= {required})")]
    Unresolved {
        n: usize,
        concentration: f64,
        required: f64,
    },
    #[error("parameter search exhausted the grid; achieved {achieved:e}")]
    BudgetExhausted { achieved: f64 },
    #[error("linear solver did not converge; relative residual {achieved:e}")]
    NonConvergence { achieved: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
