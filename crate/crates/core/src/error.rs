use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operands live on different bases")]
    BasisMismatch,
    #[error("grade {grade} exceeds the dimension {dim}")]
    GradeOverflow { grade: usize, dim: usize },
    #[error("cannot contract a {vector_grade}-vector into a {form_grade}-form")]
    ContractionDegree {
        vector_grade: usize,
        form_grade: usize,
    },
    #[error("grade mismatch: expected {expected}, got {found}")]
    GradeMismatch { expected: usize, found: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("operation requires a nonzero multivector")]
    ZeroMultivector,
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("invalid phase space shape: {0}")]
    InvalidShape(String),
    #[error("operation requires the {required} phase space")]
    WrongPhaseSpace { required: &'static str },
    #[error("evaluation failed: {0}")]
    Evaluation(String),
    #[error("empty factor list")]
    EmptyFactors,
    #[error("factors are linearly dependent at the point")]
    DependentFactors,
    #[error("hypothesis violated: dH/dp = {found}, expected -1")]
    Hypothesis { found: f64 },
    #[error("gauge tensor violates the diagonal constraint at mu={mu}, A={field}: {value}")]
    GaugeTrace { mu: usize, field: usize, value: f64 },
    #[error("time step {dt} violates the stability bound {bound}")]
    Cfl { dt: f64, bound: f64 },
    #[error("node ({time}, {space}) has no full central-difference stencil")]
    BoundaryNode { time: usize, space: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
