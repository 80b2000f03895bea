use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An iterative solver hit its iteration limit; `best` is the last iterate.
    #[error("solver failed to converge after {iterations} iterations")]
    SolverFailure { iterations: usize, best: Vec<f64> },

    #[error("polyhedron is unbounded")]
    UnboundedPolyhedron,

    #[error("dimension {dim} is not supported (at most {max})")]
    UnsupportedDimension { dim: usize, max: usize },

    #[error("problem size {size} is not supported (at most {max})")]
    UnsupportedSize { size: usize, max: usize },

    /// `f - alpha` touches zero without changing sign.
    #[error("degenerate level set: tangential root near {at}")]
    DegenerateLevelSet { at: f64 },

    #[error("parameter is outside the domain: nominal image is empty")]
    EmptyNominal,

    #[error("point is not in the nominal image (distance {distance})")]
    NotInNominal { distance: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no admissible active subset (every candidate failed rank, cone or invertibility)")]
    NoAdmissibleActiveSet,

    #[error("active set has {size} indices; enumeration budget is {max}")]
    EnumerationBudget { size: usize, max: usize },

    #[error("matrix is numerically singular (condition estimate {condition:e})")]
    SingularMatrix { condition: f64 },

    #[error("evaluation failed: {0}")]
    Evaluation(String),
}

impl Error {
    pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }
}
