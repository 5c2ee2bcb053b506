use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("pole at the evaluation point")]
    PoleAtPoint,
    #[error("value is irrational at the requested point; use numeric evaluation")]
    IrrationalValue,
    #[error("zero polynomial has no weighted degree")]
    ZeroPolynomial,
    #[error("divisor is not a positive diagonal quadratic form: {0}")]
    BadDivisor(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("fields are not bracket generating: dimension {reached} of {n} after step {step}")]
    NotBracketGenerating { reached: usize, n: usize, step: usize },
    #[error("frame is singular")]
    SingularFrame,
    #[error("rescaling factor {0} vanishes")]
    ZeroFactor(usize),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("characteristic polynomial does not split over the rationals")]
    IrrationalSpectrum,
    #[error("first divisibility condition does not hold")]
    DivisibilityRequired,
    #[error("layer {requested} out of range (stored {stored})")]
    LayerOutOfRange { requested: usize, stored: usize },
    #[error("undetermined within {0} layers")]
    Undetermined(usize),
    #[error("rank deficient system")]
    RankDeficient,
    #[error("graded algebra is not fundamental: {0}")]
    NotFundamental(String),
    #[error("Jacobi identity fails for indices ({0}, {1}, {2})")]
    JacobiViolation(usize, usize, usize),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("odd dimension {0}")]
    OddDimension(usize),
    #[error("bad basis: {0}")]
    BadBasis(String),
    #[error("unsupported factor frame: {0}")]
    UnsupportedFactorFrame(String),
    #[error("sign of the product terms is not fixed: {0}")]
    SignAmbiguity(String),
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown symbol '{name}' at {line}:{col}")]
    UnknownSymbol { name: String, line: usize, col: usize },
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("json: {0}")]
    Json(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake-case tag used in report documents.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DivisionByZero => "division_by_zero",
            Error::PoleAtPoint => "pole_at_point",
            Error::IrrationalValue => "irrational_value",
            Error::ZeroPolynomial => "zero_polynomial",
            Error::BadDivisor(_) => "bad_divisor",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::NotBracketGenerating { .. } => "not_bracket_generating",
            Error::SingularFrame => "singular_frame",
            Error::ZeroFactor(_) => "zero_factor",
            Error::NotPositiveDefinite => "not_positive_definite",
            Error::IrrationalSpectrum => "irrational_spectrum",
            Error::DivisibilityRequired => "divisibility_required",
            Error::LayerOutOfRange { .. } => "layer_out_of_range",
            Error::Undetermined(_) => "undetermined",
            Error::RankDeficient => "rank_deficient",
            Error::NotFundamental(_) => "not_fundamental",
            Error::JacobiViolation(..) => "jacobi_violation",
            Error::BadInput(_) => "bad_input",
            Error::OddDimension(_) => "odd_dimension",
            Error::BadBasis(_) => "bad_basis",
            Error::UnsupportedFactorFrame(_) => "unsupported_factor_frame",
            Error::SignAmbiguity(_) => "sign_ambiguity",
            Error::Syntax { .. } => "syntax_error",
            Error::UnknownSymbol { .. } => "unknown_symbol",
            Error::InvalidFrame(_) => "invalid_frame",
            Error::Json(_) => "json",
            Error::Io(_) => "io",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
