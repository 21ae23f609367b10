use thiserror::Error;

/// Construction-time failures for the domain types.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("{name} = {value} is outside the open interval ({lo}, {hi})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("PSSD has {got} entries but the grid has {expected} cells")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("PSSD entry {index} is negative: {value}")]
    NegativeDensity { index: usize, value: f64 },
    #[error("polynomial growth law needs at least one coefficient")]
    EmptyPolynomial,
    #[error("output_sampling must request at least 2 times, got {0}")]
    TooFewSamples(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KineticsError {
    #[error("unknown growth dimension {0}; expected 1 or 2")]
    UnknownDimension(usize),
}

/// Failures raised while advancing the finite-volume solution.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("Courant number {courant} is outside [0, 1]; the explicit step is unstable")]
    StabilityViolation { courant: f64 },
    #[error("growth rate {0} is negative; only positive-upwind sweeps are supported")]
    NegativeGrowthRate(f64),
    #[error(
        "density {value} at cell {index} is negative beyond round-off (tolerance {tolerance})"
    )]
    NegativeDensity {
        index: usize,
        value: f64,
        tolerance: f64,
    },
    #[error("concentration would become negative: {value} g/kg")]
    InfeasibleConcentration { value: f64 },
    #[error("grid truncates the seed distribution: recovered {recovered:.6} of the analytic mass")]
    SeedTruncated { recovered: f64 },
    #[error("grid does not cover the seed mean +/- 5 sigma along {axis}")]
    SeedOutsideGrid { axis: &'static str },
    #[error(transparent)]
    Kinetics(#[from] KineticsError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("traces are not sampled at comparable times: gap {gap} at index {index} exceeds the local step {local_step}")]
    IncomparableSampling {
        index: usize,
        gap: f64,
        local_step: f64,
    },
    #[error("PSSD grids differ; comparison is undefined")]
    GridMismatch,
    #[error("trace is empty")]
    EmptyTrace,
}

#[derive(Debug, Error)]
pub enum EstimateError {
    #[error("theta has {got} entries, expected {expected}")]
    ThetaLength { expected: usize, got: usize },
    #[error("theta[{index}] = {value} violates the non-negativity constraint")]
    NegativeTheta { index: usize, value: f64 },
    #[error("gradient component {index} is not finite: {value}")]
    NonFiniteGradient { index: usize, value: f64 },
    #[error("per-dimension polynomial coefficients need an even parameter count, got {0}")]
    OddSplit(usize),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
