//! Error type shared across the engine, protocols and programs.

use thiserror::Error;

/// Errors surfaced by the sharing layer, the engine and the statistical
/// programs.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters: bad modulus, party/threshold mismatch, empty
    /// batch input, mismatched fields, and similar setup problems.
    #[error("configuration error: {0}")]
    Config(String),

    /// Arithmetic on elements of two different prime fields.
    #[error("mismatched field moduli: {0} vs {1}")]
    FieldMismatch(String, String),

    /// Inversion of zero, or an ideal division gate whose divisor opened
    /// to zero.
    #[error("division by zero{}", match .0 { Some(c) => format!(" ({c})"), None => String::new() })]
    DivisionByZero(Option<String>),

    /// A value does not fit its declared bitlength or the field capacity.
    #[error("overflow: {0}")]
    Overflow(String),

    /// Reconstruction attempted with fewer shares than the polynomial
    /// degree allows.
    #[error("insufficient shares: degree {degree} needs {} shares, got {got}", degree + 1)]
    InsufficientShares { degree: usize, got: usize },

    /// Shares presented for reconstruction do not lie on a single
    /// degree-t polynomial (corrupted simulation state).
    #[error("share integrity violation: {0}")]
    Integrity(String),

    /// A batch contains gates that depend on each other's outputs.
    #[error("scheduling error: {0}")]
    Scheduling(String),

    /// Input rejected by a program's domain rules (zero marginal,
    /// negative sqrt input, empty data set).
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
