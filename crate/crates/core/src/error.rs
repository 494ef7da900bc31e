use thiserror::Error;

/// Crate-wide error type.
///
/// Every fallible operation in the library reports through this enum so that
/// callers (and the verification CLI) can match on the failure mode instead
/// of parsing strings.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("precision exponent must satisfy 1 <= N and p^N must fit in u64 (got p={p}, N={n})")]
    BadPrecision { p: u64, n: u32 },
    #[error("value {value} is not divisible by {p}^{power} at precision {prec}")]
    NotDivisible { value: u64, p: u64, power: u32, prec: u32 },
    #[error("precision exhausted: needed {needed} digits, only {available} available")]
    PrecisionExhausted { needed: u32, available: u32 },
    #[error("operands live over different rings: {0}")]
    VariableMismatch(String),
    #[error("substitution image for `{var}` is not a unit: {reason}")]
    NonUnitSubstitution { var: String, reason: String },
    #[error("maps disagree modulo p on generator `{0}`")]
    NotCongruentModP(String),
    #[error("identity violated: {context}: {detail}")]
    IdentityViolation { context: String, detail: String },
    #[error("Witt vector of length {0} is too short for this operator")]
    LengthUnderflow(usize),
    #[error("`{0}` is not a Frobenius lift: image of `{1}` is not congruent to its p-th power mod p")]
    NotFrobeniusLift(String, String),
    #[error("Frobenius lifts are incompatible with the connecting map on generator `{0}`")]
    IncompatibleLifts(String),
    #[error("functoriality square does not commute on input `{0}`")]
    FunctorialityViolation(String),
    #[error("overconvergence bound violated: slot {slot} has degree {degree}, bound {bound}")]
    BoundViolation { slot: usize, degree: i64, bound: i64 },
    #[error("multidegree {0:?} falls outside the configured window")]
    WindowOverflow(Vec<i64>),
    #[error("configured T-degree window {given} is below the safe bound {needed} for this precision")]
    TWindowTooSmall { given: usize, needed: usize },
    #[error("form is not closed: d(omega) != 0")]
    NotClosed,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
