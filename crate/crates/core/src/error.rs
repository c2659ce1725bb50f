use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value for `{0}`")]
    NonFinite(&'static str),

    #[error("finite-difference step {0} outside (0, 1e-3]")]
    InvalidStep(f64),

    #[error("state is not normalized (|<psi|psi> - 1| = {0:e})")]
    NotNormalized(f64),

    #[error("matrix is not unitary (max |U^dag U - I| = {0:e})")]
    NotUnitary(f64),

    #[error("matrix is not Hermitian (max |A - A^dag| = {0:e})")]
    NotHermitian(f64),

    #[error("singular model: det Q = {det_q:e} (sloppy, bound undefined)")]
    SingularModel { det_q: f64 },

    #[error("weight matrix is not positive definite (w11 = {w11}, det = {det})")]
    InvalidWeight { w11: f64, det: f64 },

    #[error("allocation fraction {0} outside (0, 1)")]
    InvalidAllocation(f64),

    #[error("POVM must have between 2 and 8 elements, got {0}")]
    PovmSize(usize),

    #[error("POVM element {0} is not positive semidefinite")]
    NotPositive(usize),

    #[error("POVM elements do not sum to identity (residual {0:e})")]
    NotComplete(f64),

    #[error("invalid POVM element {index}: {reason}")]
    InvalidPovmElement { index: usize, reason: String },

    #[error("outcome {outcome} has vanishing probability but non-vanishing derivative")]
    IllConditioned { outcome: usize },

    #[error(
        "degenerate likelihood: curvature {min_curvature:e} along the flattest direction \
         (steepest {max_curvature:e})"
    )]
    DegenerateLikelihood {
        min_curvature: f64,
        max_curvature: f64,
    },

    #[error("POVM search failed: every start produced a singular Fisher matrix")]
    SearchFailed,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
