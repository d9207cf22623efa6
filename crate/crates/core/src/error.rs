use thiserror::Error;

/// Failures of field and dense-matrix arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("field characteristic {0} is not prime")]
    NonPrimeModulus(u64),
    #[error("modulus polynomial is reducible over the prime field")]
    ReducibleModulusPolynomial,
    #[error("invalid modulus: {0}")]
    BadModulus(String),
    #[error("field GF({p}^{k}) exceeds the supported order")]
    FieldTooLarge { p: u64, k: u32 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("invalid scalar: {0}")]
    InvalidScalar(String),
}

/// Where an enumeration gave up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitReport {
    pub what: &'static str,
    pub elements: usize,
    pub steps: u64,
    pub frontier: usize,
}

impl std::fmt::Display for LimitReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} stopped after {} elements and {} steps with {} pending",
            self.what, self.elements, self.steps, self.frontier
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("limit exceeded: {0}")]
    LimitExceeded(LimitReport),
    #[error("power sequence did not repeat within {0} steps")]
    ExceededCap(u64),
    #[error("not a homomorphism: images of {x} and {y} violate multiplicativity")]
    NotAHomomorphism { x: usize, y: usize },
    #[error("codomain element {0} has an empty preimage")]
    EmptyPreimage(usize),
    #[error("invalid monoid: {0}")]
    InvalidMonoid(String),
    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("arrow keys unavailable: {0}")]
    ModeUnavailable(String),
    #[error("arrows are not composable: target {target:?} differs from source {source_obj:?}")]
    NonComposable {
        target: (usize, usize),
        source_obj: (usize, usize),
    },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("elements never span the full matrix algebra (dimension {dim} of {full})")]
    DoesNotSpan { dim: usize, full: usize },
    #[error("trace-form Gram matrix is singular; kernel vector {kernel:?}")]
    DegenerateGram { kernel: Vec<String> },
    #[error("matrix is not in the span of the basis")]
    NotInSpan,
    #[error("matrix is not in the stabilizer: {0} fails")]
    NotInStabilizer(&'static str),
    #[error("internal consistency check failed: {0}")]
    Soundness(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
