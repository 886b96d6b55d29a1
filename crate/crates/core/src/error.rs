use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus must be at least 2, got {0}")]
    InvalidModulus(u32),

    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u32, right: u32 },

    #[error("matrix is not invertible mod {modulus} (determinant {det})")]
    NotInvertible { det: u32, modulus: u32 },

    #[error("modulus {0} is not prime")]
    NonPrimeModulus(u32),

    /// The determinant constraint fails at `column`: the partial determinant
    /// sum equals 1, which would force a singular diagonal block.
    #[error("determinant constraint violated at column {column}: sum of det(A_l,{column}) for l < {column} is 1 mod {modulus}")]
    ConditionViolated { column: usize, modulus: u32 },

    #[error("dense dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("site {site} out of range 0..={max}")]
    SiteOutOfRange { site: i64, max: i64 },

    #[error("operator dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("vector is not normalized (norm {0})")]
    NonUnitVector(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid sequence spec `{spec}`: {reason}")]
    InvalidSpec { spec: String, reason: String },

    #[error("sequence has no matrix for index {0}")]
    SequenceOutOfRange(i64),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn check_modulus(left: u32, right: u32) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::ModulusMismatch { left, right })
    }
}
