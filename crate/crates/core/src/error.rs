use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    // linear algebra
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(String, String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("value {0} is not representable in {1}")]
    NotRepresentable(String, String),

    // posets
    #[error("duplicate element id {0:?}")]
    DuplicateElement(String),
    #[error("unknown element id {0:?}")]
    UnknownElement(String),
    #[error("cover relation contains a cycle through {0:?}")]
    Cycle(String),
    #[error("poset has {0} elements, cap is {1}")]
    TooLarge(usize, usize),
    #[error("poset is not a grid")]
    NotGrid,
    #[error("map is not order-preserving: {0} <= {1} but images are incomparable")]
    NotOrderPreserving(String, String),
    #[error("not a Galois insertion: {0}")]
    NotGaloisInsertion(String),
    #[error("subset is not {0}")]
    BadSubset(String),

    // heights
    #[error("missing height value for comparable pair ({0}, {1})")]
    MissingPair(String, String),
    #[error("height value given for incomparable pair ({0}, {1})")]
    IncomparablePair(String, String),
    #[error("height of ({0}, {0}) must be 0")]
    NonZeroDiagonal(String),
    #[error("superadditivity fails at {0} <= {1} <= {2}")]
    Superadditivity(String, String, String),
    #[error("height value must be nonnegative, got {0}")]
    Negative(String),
    #[error("height function decreases along {0} <= {1}")]
    NotMonotone(String, String),
    #[error("parse error: {0}")]
    Parse(String),

    // modules
    #[error("structure maps do not commute between {0} and {1}")]
    NotCommutative(String, String),
    #[error("map given for non-cover pair ({0}, {1})")]
    NotACover(String, String),
    #[error("subset is not convex: {0}")]
    NotConvex(String),
    #[error("morphism is not natural at cover ({0}, {1})")]
    NotNatural(String, String),
    #[error("modules live over different posets")]
    PosetMismatch,
    #[error("morphism endpoints do not match: {0}")]
    EndpointMismatch(String),

    // functors
    #[error("neighborhood inclusion fails at {element}: {detail}")]
    InclusionFailure { element: String, detail: String },
    #[error("comparison map is not invertible at {0}")]
    NotInvertible(String),
    #[error("parameter order violated: {0}")]
    ParameterOrder(String),

    // erosion
    #[error("subspace family is not a submodule at ({0}, {1})")]
    NotSubmodule(String, String),
    #[error("containment fails at {element}: {detail}")]
    Containment { element: String, detail: String },

    // search
    #[error("not an interleaving certificate: {0}")]
    InvalidCertificate(String),
    #[error("search budget of {0} exceeded")]
    BudgetExceeded(u64),
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
