use alloc::string::String;
use core::fmt;

/// Errors raised by the algorithmic core.
///
/// Measured failures of a constructive step (a density increment that did not
/// materialise, a Katz–Koester loop that ran out of budget) are reported as
/// [`Error::Diagnostic`] so callers can fall back instead of aborting.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    ModulusMismatch { left: usize, right: usize },
    InvalidModulus(usize),
    InvalidParameter(String),
    NotSubset(&'static str),
    EmptySet(&'static str),
    ResidueOutOfRange { residue: u64, modulus: usize },
    /// An exact integer result could not be recovered from floating output.
    InexactRecovery { index: usize, value: f64 },
    /// Integer transform would exceed the representable range of the prime field.
    ExactOverflow { bound: u128 },
    NoRegularDilate { tried: usize },
    SupportViolation { index: usize },
    HypothesisNotMet { value: f64, required: f64 },
    VerificationFailed { witness: u64, detail: String },
    IterationCap { cap: usize },
    Diagnostic(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ModulusMismatch { left, right } => {
                write!(f, "modulus mismatch: {left} vs {right}")
            }
            Error::InvalidModulus(n) => write!(f, "invalid modulus {n} (need N >= 2)"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::NotSubset(what) => write!(f, "subset precondition violated: {what}"),
            Error::EmptySet(what) => write!(f, "empty set: {what}"),
            Error::ResidueOutOfRange { residue, modulus } => {
                write!(f, "residue {residue} out of range for modulus {modulus}")
            }
            Error::InexactRecovery { index, value } => {
                write!(f, "value {value} at index {index} is not within 0.25 of an integer")
            }
            Error::ExactOverflow { bound } => {
                write!(f, "exact transform bound {bound} exceeds the prime field")
            }
            Error::NoRegularDilate { tried } => {
                write!(f, "no regular dilate found among {tried} candidates")
            }
            Error::SupportViolation { index } => {
                write!(f, "function is supported outside the allowed set at {index}")
            }
            Error::HypothesisNotMet { value, required } => {
                write!(f, "hypothesis not met: {value} < {required}")
            }
            Error::VerificationFailed { witness, detail } => {
                write!(f, "verification failed at {witness}: {detail}")
            }
            Error::IterationCap { cap } => write!(f, "iteration cap {cap} exceeded"),
            Error::Diagnostic(msg) => write!(f, "{msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_same_modulus(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::ModulusMismatch { left, right })
    }
}
