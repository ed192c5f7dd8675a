use thiserror::Error;

/// Errors produced by the quadratic-free set machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NonSymmetric { asymmetry: f64 },

    #[error("Jacobi iteration did not converge (off-diagonal norm {off_norm:e} after {sweeps} sweeps)")]
    NoConvergence { off_norm: f64, sweeps: usize },

    #[error("point is not separable: q(point) = {value:e}")]
    NotSeparable { value: f64 },

    #[error("quadratic is degenerate: {0}")]
    DegenerateQuadratic(String),

    #[error("the quadratic set intersected with the homogenizing hyperplane is empty")]
    EmptyS,

    #[error("vector is not unit length (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("gradient undefined at this point")]
    UndefinedGradient,

    #[error("denominator vanished (lambda parallel to a)")]
    DegenerateDenominator,

    #[error("apex is not strictly interior to the free set (margin {margin:e})")]
    ApexNotInterior { margin: f64 },

    #[error("every cone ray is a recession direction of the free set")]
    AllRaysRecession,

    #[error("cone is degenerate (condition estimate {condition:e})")]
    DegenerateCone { condition: f64 },

    #[error("beta is not in the strict region of G(lambda) (a'lambda + d'beta = {value:e})")]
    NotInStrictRegion { value: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("sampling exhausted after {attempts} attempts ({accepted} accepted)")]
    SamplingExhausted { attempts: usize, accepted: usize },

    #[error("linear program is unbounded")]
    UnboundedLp,

    #[error("linear program is infeasible")]
    InfeasibleLp,

    #[error("LP vertex is degenerate: {0}")]
    DegenerateVertex(String),
}

pub type Result<T> = std::result::Result<T, Error>;
