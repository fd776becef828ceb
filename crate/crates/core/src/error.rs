use thiserror::Error;

/// Errors raised by code construction, configuration checks and I/O helpers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid base matrix: {0}")]
    InvalidBaseMatrix(String),

    #[error("inconsistent regular degrees: dv={dv}, dc={dc}, cols={cols}")]
    InconsistentRegular { dv: usize, dc: usize, cols: usize },

    #[error("lift factor {z} cannot separate parallel edges of multiplicity {multiplicity}")]
    LiftTooSmall { z: usize, multiplicity: u8 },

    #[error("no 4-cycle-free lift found for Z={z} after {attempts} attempts")]
    ShortCycles { z: usize, attempts: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    Length { expected: usize, actual: usize },

    #[error("invalid GSM configuration: {0}")]
    InvalidGsm(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("candidate table too large for enumeration: rho={0} > 12")]
    OracleTooLarge(usize),

    #[error("threshold bracket invalid: converges({lo:.3} dB)={lo_ok}, converges({hi:.3} dB)={hi_ok}")]
    InvalidBracket { lo: f64, hi: f64, lo_ok: bool, hi_ok: bool },

    #[error("invalid link configuration: {0}")]
    InvalidLink(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
