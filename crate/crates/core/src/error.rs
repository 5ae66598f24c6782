use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("forms live on different grids")]
    GridMismatch,
    #[error("exterior derivative of a top-degree form")]
    TopDegree,
    #[error("wedge degree {0} exceeds ambient dimension {1}")]
    DegreeOverflow(usize, usize),
    #[error("form of degree {got} where degree {expected} is required")]
    WrongDegree { expected: usize, got: usize },
    #[error("analytic derivative requested for a form without a closed-form source")]
    NoSource,
    #[error("gauge field is not unit-valued (max deviation {0:e})")]
    NonUnitGauge(f64),
    #[error("Higgs field modulus below {threshold:e} at {count} nodes")]
    SmallHiggs { count: usize, threshold: f64 },
    #[error("|Phi| < 3/4 on the surface (min {0:.4}); degree undefined")]
    LowModulus(f64),
    #[error("|Phi| < 3/4 on the boundary of cells {0:?}")]
    LowModulusCells(Vec<usize>),
    #[error("degree ill-defined: round-off residual {0:.3}")]
    DegreeIllDefined(f64),
    #[error("singular set S intersects domain near {0:?}")]
    SingularSetInDomain(Vec<f64>),
    #[error("eps too large relative to tube radius (eps={eps}, tube={tube})")]
    EpsilonTooLarge { eps: f64, tube: f64 },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("slice hyperplane is not transverse to the current")]
    NonTransverse,
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("energy increased after maximal backtracking at iteration {iteration}")]
    Diverged { iteration: usize, trace: Vec<f64> },
    #[error("solver did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Validation failures (bad input) versus numerical failures.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Numerical(_)
                | Error::Diverged { .. }
                | Error::NoConvergence { .. }
                | Error::DegreeIllDefined(_)
                | Error::SmallHiggs { .. }
                | Error::LowModulus(_)
                | Error::LowModulusCells(_)
                | Error::SingularSetInDomain(_)
        )
    }
}
