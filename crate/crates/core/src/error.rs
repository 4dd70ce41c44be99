use thiserror::Error;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Numerical,
    Hypothesis,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate family: b = 0 reduces the map to z^2 + c (use the explicit quadratic mode)")]
    DegenerateFamily,

    #[error("derivative requested at a pole or at infinity")]
    PoleDerivative,

    #[error("parameters are not on the (k, w) slice: best b-residual {residual:.3e}")]
    NotInFamilySlice { residual: f64 },

    #[error("polynomial solver failed for {what}: residual {residual:.3e}")]
    SolverFailure { what: &'static str, residual: f64 },

    #[error("Newton refinement did not converge (period {period}, residual {residual:.3e})")]
    NoConvergence { period: usize, residual: f64 },

    #[error("point is not in the basin (no convergence after {iterations} iterations)")]
    NotInBasin { iterations: usize },

    #[error("fixed point is superattracting; use the Boettcher potential instead")]
    SuperattractingFixedPoint,

    #[error("fixed point is not attracting (|multiplier| = {modulus:.6})")]
    NotAttracting { modulus: f64 },

    #[error("no grid cell straddles the level {level}")]
    LevelOutsideWindow { level: f64 },

    #[error("no free critical point escapes to infinity")]
    NoEscapingCritical,

    #[error("{count} free critical points escape; the figure-eight level is ambiguous")]
    MultipleEscaping { count: usize },

    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),

    #[error(
        "level interval is empty: (max G(v)/2, min G(v)) = ({lower:.6}, {upper:.6}); \
         coding through an iterate f^N would be required"
    )]
    LevelIntervalEmpty { lower: f64, upper: f64 },

    #[error("expected {expected} trap components, found {found}")]
    ComponentCountMismatch { expected: usize, found: usize },

    #[error("preimage for word {word} left the trap region")]
    EscapeFromTrap { word: String },

    #[error("orbit left the trap region at step {0}")]
    LeftTrap(usize),

    #[error("connectivity differs between resolutions: {0}")]
    UnstableAtResolution(String),

    #[error("residual does not change sign on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("predicate has the same value at both ends of [{lo}, {hi}]")]
    SamePredicateValue { lo: f64, hi: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            DegenerateFamily | NotInFamilySlice { .. } | LevelOutsideWindow { .. } | Invalid(_) => {
                ErrorClass::Validation
            }
            PoleDerivative
            | SolverFailure { .. }
            | NoConvergence { .. }
            | NotInBasin { .. }
            | NoSignChange { .. }
            | SamePredicateValue { .. }
            | UnstableAtResolution(_) => ErrorClass::Numerical,
            SuperattractingFixedPoint
            | NotAttracting { .. }
            | NoEscapingCritical
            | MultipleEscaping { .. }
            | HypothesisFailed(_)
            | LevelIntervalEmpty { .. }
            | ComponentCountMismatch { .. }
            | EscapeFromTrap { .. }
            | LeftTrap(_) => ErrorClass::Hypothesis,
            Io(_) => ErrorClass::Io,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
