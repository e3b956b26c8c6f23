use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {detail}")]
    Parse {
        line: usize,
        column: usize,
        detail: String,
    },
    #[error("schema violation in `{field}`: {detail}")]
    Schema { field: String, detail: String },
    #[error("event index {index} out of range (timeline has {intervals} intervals, valid 1..={intervals})")]
    EventIndex { index: usize, intervals: usize },
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("solver backend `{0}` is not available: {1}")]
    BackendUnavailable(String, String),
    #[error("solver process failed: {detail}\n--- captured stderr ---\n{stderr}")]
    SolverCrash { detail: String, stderr: String },
    #[error("cannot parse solution near line {line}: {detail}")]
    SolutionFormat { line: usize, detail: String },
    #[error("io error during solve: {0}")]
    Io(#[from] std::io::Error),
    #[error("model is empty")]
    EmptyModel,
}

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("solution status {0:?} carries no usable plan")]
    NoPlan(crate::solver::SolveStatus),
    #[error("solution violates integrality: variable {name} = {value}")]
    FractionalBinary { name: String, value: f64 },
    #[error("schedule is empty")]
    Empty,
    #[error("time {t} outside [0, {max}]")]
    TimeOutOfRange { t: f64, max: f64 },
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("model reported {status:?}; diagnostics:\n{diagnostics}")]
    NotSolved {
        status: crate::solver::SolveStatus,
        diagnostics: String,
    },
    #[error("extracted schedule failed verification:\n{0}")]
    VerificationFailed(String),
    #[error("residual plan infeasible after freeze at t={at}: {detail}")]
    ResidualInfeasible { at: f64, detail: String },
}
