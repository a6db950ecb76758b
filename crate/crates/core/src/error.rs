//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid solver configuration: {0}")]
    ConfigInvalid(String),

    #[error("right-hand side evaluated at r <= 0; use the series start below the start radius")]
    SingularOrigin,

    #[error("rescaling requires a strictly positive shooting parameter")]
    ZeroShootParam,

    #[error("no sign change of {quantity} on [{lo}, {hi}]")]
    NoSignChange {
        quantity: &'static str,
        lo: f64,
        hi: f64,
    },

    #[error("bracket not found: {0}")]
    BracketNotFound(String),

    #[error("bracket tolerance not reached after {0} bisection iterations")]
    ToleranceNotReached(usize),

    #[error(
        "d = {d} is subcritical for the {family} family (zero-parameter shot is only certified \
         outside the ground set for d >= {min_d}); supply a manual bracket"
    )]
    SubcriticalDimension {
        family: &'static str,
        d: u32,
        min_d: u32,
    },

    #[error("profile has not decayed at its truncation radius (|u| = {u_end:.3e})")]
    NotDecayed { u_end: f64 },

    #[error("operation requires the {expected} family")]
    WrongFamily { expected: &'static str },

    #[error("operation requires shooting parameter c = 0 (got c = {0})")]
    WrongParam(f64),

    #[error("invalid excited index n = {0}; n >= 1 required")]
    InvalidN(usize),

    #[error("trajectory covers [0, {have:.4}] but [0, {need:.4}] is required")]
    DomainTooShort { have: f64, need: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
