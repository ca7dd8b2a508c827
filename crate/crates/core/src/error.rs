use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown symbol family `{0}`")]
    UnknownFamily(String),
    #[error("index {index} out of range for cycle family `{family}` of length {length}")]
    CycleIndexOutOfRange { family: String, index: i64, length: u32 },
    #[error("malformed token `{0}`")]
    MalformedToken(String),
    #[error("zero exponent in token `{0}`")]
    ZeroExponent(String),
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid weight scheme: {0}")]
    InvalidScheme(String),
    #[error("weight normalizer is not strictly positive and finite")]
    ZeroNormalizer,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("flow is not a contraction (operator norm {0})")]
    NotContraction(f64),
    #[error("generator is not Hermitian (residual {0:e})")]
    NotHermitian(f64),
    #[error("ill-conditioned eigenproblem: eigenvalue {value:e} lies between thresholds {lower:e} and {upper:e}")]
    IllConditioned { value: f64, lower: f64, upper: f64 },
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("weighted means did not converge: Cauchy residual {0:e}")]
    NonConvergence(f64),
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("tensor product dimension {0} exceeds the limit of 4096")]
    DimensionOverflow(usize),
    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),
    #[error("invalid factor: {0}")]
    InvalidFactor(String),
    #[error("joining polytope is empty: {0}")]
    Infeasible(String),
    #[error("linear program is unbounded")]
    Unbounded,
}

pub type Result<T> = std::result::Result<T, Error>;
