use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least {min}, got {found}")]
    DimensionTooSmall { min: usize, found: usize },

    #[error("dimension {found} exceeds the enumeration cap {cap} (raise it explicitly to proceed)")]
    DimensionCap { found: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("root matrix is rank deficient (rank {rank} < {columns} columns)")]
    RankDeficient { rank: usize, columns: usize },

    #[error("spectral vector has a zero entry at position {index}")]
    ZeroEntry { index: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("Jacobi identity violated: residual {residual:e} exceeds {tolerance:e}")]
    Jacobi { residual: f64, tolerance: f64 },

    #[error("invalid decomposition: {0}")]
    Decomposition(String),

    #[error("ad-action does not split into skew and shifting parts: {count} pattern violation(s), first at generator {generator} entry ({row}, {col}) = {value:e}")]
    PatternViolation { count: usize, generator: usize, row: usize, col: usize, value: f64 },

    #[error("{left} and {right} do not commute (commutator norm {norm:e})")]
    Commutation { left: String, right: String, norm: f64 },

    #[error("structure data flagged non-constant; only homogeneous frame data is supported")]
    NonConstant,

    #[error("spectral vector depends on the parameter t but no parameter value was given")]
    MissingParam,

    #[error("conflicting parameter values {0} and {1}")]
    ParamConflict(f64, f64),

    #[error("wrong eigenvalue type: expected {expected}, found {found}")]
    WrongType { expected: String, found: String },

    #[error("extension is not Einstein: {0}")]
    NotEinstein(String),

    #[error("input is not Ricci flat (max |Ric| = {0:e}); a scalar D requires a Ricci-flat base")]
    NotRicciFlat(f64),

    #[error("catalog: {0}")]
    Catalog(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json { line: e.line(), column: e.column(), message: e.to_string() }
    }
}
