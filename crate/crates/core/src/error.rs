use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("group enumeration exceeded cap of {cap} elements")]
    EnumerationOverflow { cap: usize },

    #[error("expected {expected} generator images, got {got}")]
    ImageCountMismatch { expected: usize, got: usize },

    #[error("generator image {index} is not invertible")]
    NonInvertibleImage { index: usize },

    #[error("representation '{label}' is not a homomorphism: element {element} times generator {generator} off by {residual:.3e}")]
    NotHomomorphism {
        label: String,
        element: String,
        generator: usize,
        residual: f64,
    },

    #[error("{family} irreps are only available for {range}, got {got}")]
    OutOfRange {
        family: &'static str,
        range: &'static str,
        got: usize,
    },

    #[error("Frobenius-Schur indicator {value:.6} is not close to an integer type (representation likely reducible)")]
    Classification { value: f64 },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("matrix is not equivariant: generator {generator} violates by {residual:.3e} at entry ({row}, {col})")]
    NotEquivariant {
        generator: usize,
        residual: f64,
        row: usize,
        col: usize,
    },

    #[error("matrix is not idempotent (residual {residual:.3e})")]
    NotIdempotent { residual: f64 },

    #[error("irrep list is incomplete: isotypic dimensions sum to {covered}, missing {residual} of {dim}")]
    IncompleteIrreps {
        covered: usize,
        residual: usize,
        dim: usize,
    },

    #[error("isotypic dimension {isotypic_dim} of '{label}' is not a multiple of {rep_dim}")]
    InconsistentMultiplicity {
        label: String,
        isotypic_dim: usize,
        rep_dim: usize,
    },

    #[error("decomposition inconsistent: {0}")]
    Decomposition(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("enumeration of {count} subsets exceeds cap {cap}")]
    CapExceeded { count: u128, cap: u128 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
