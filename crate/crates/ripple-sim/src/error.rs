use thiserror::Error;

/// Errors shared across the simulation layers.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The 2x2 operator is degenerate; eigenvectors are ill-defined.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// The gap is too small for a spectral formula that divides by it.
    #[error("near degeneracy: {0}")]
    NearDegeneracy(String),

    /// A ramp cannot start from an ill-defined ground state.
    #[error("degenerate ramp start: {0}")]
    DegenerateStart(String),

    #[error("zero quench velocity: {0}")]
    ZeroVelocity(String),

    /// The adiabatic expansion is invalid because the gap closes along the ramp.
    #[error("gap closure: {0}")]
    GapClosure(String),

    #[error("insufficient points: {0}")]
    InsufficientPoints(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;
