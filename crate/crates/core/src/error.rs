use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("ground set size {0} exceeds the supported maximum of {max}", max = crate::combinatorics::MAX_GROUND_SET)]
    GroundSetTooLarge(usize),

    #[error("item index {index} is outside the ground set of size {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("subsets live over different ground sets ({left} vs {right})")]
    GroundSetMismatch { left: usize, right: usize },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("cannot sample from an empty sphere (n={n}, d={d}, alpha={alpha})")]
    EmptySphere { n: usize, d: usize, alpha: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("enumeration cap exceeded: {what} needs {needed} but the cap is {cap}")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        cap: u128,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
