use thiserror::Error;

/// Errors raised by chain construction, analysis and certification.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: row {row} has {len} entries, expected {n}")]
    NonSquare { row: usize, len: usize, n: usize },
    #[error("matrix is empty")]
    Empty,
    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("negative entry at ({0}, {1})")]
    NegativeEntry(usize, usize),
    #[error("column {0} sums to {1}, not 1")]
    ColumnSumOff(usize, f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("chain is not ergodic (irreducible: {irreducible}, period: {period:?})")]
    NotErgodic { irreducible: bool, period: Option<usize> },
    #[error("linear system for the stationary distribution is singular")]
    SingularSystem,
    #[error("stationary distribution failed validation: {0}")]
    BadStationary(String),
    #[error("detailed balance violated by {violation:e} at pair ({i}, {j})")]
    NotReversible { violation: f64, i: usize, j: usize },
    #[error("Jacobi iteration did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("chain has {n} states, exact conductance is capped at {max_n}")]
    TooLarge { n: usize, max_n: usize },
    #[error("conductance is undefined for a single-state chain")]
    TooSmall,
    #[error("invalid state subset: {0}")]
    InvalidSubset(String),
    #[error("no sweep prefix has stationary mass at most 1/2")]
    NoValidPrefix,
    #[error("thresholded eigenvector has no positive entry")]
    ZeroProperVector,
    #[error("positive support of the thresholded vector has mass {0} > 1/2")]
    MassExceedsHalf(f64),
    #[error("vector is not proper: {0}")]
    NotProper(String),
    #[error("not an eigenvector: residual {residual:e} exceeds {bound:e}")]
    NotAnEigenvector { residual: f64, bound: f64 },
    #[error("{side} inequality violated by {magnitude:e}")]
    SandwichViolation { side: SandwichSide, magnitude: f64 },
    #[error("value {value} out of range for {what}")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("graph is not connected")]
    Disconnected,
    #[error("chain is periodic with period {0}; add laziness")]
    Periodic(usize),
    #[error("invalid generator parameters: {0}")]
    InvalidSpec(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Which half of the conductance sandwich failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SandwichSide {
    /// `phi * |f|^2 <= telescoping sum`
    Lower,
    /// `(telescoping sum)^2 <= |f|^4 - <f, P^T f>^2`
    Upper,
}

impl std::fmt::Display for SandwichSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SandwichSide::Lower => f.write_str("lower (conductance)"),
            SandwichSide::Upper => f.write_str("upper (Cauchy-Schwarz)"),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
