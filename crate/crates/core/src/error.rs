use std::fmt;

use thiserror::Error;

/// Named input guards. Every guard rejects the job rather than adjusting it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Guard {
    /// A sawtooth argument at `a` or `b` lands on (or within 1e-12 of) an integer.
    IntegerPsiArgument,
    /// An interval end point `a/m` or `b/m` ties with an integer.
    IntervalBoundaryTie,
    /// An Abel node sits on an interval end point.
    NodeAtEndpoint,
    /// The two-variable formula needs integer corners.
    NonIntegerCorner,
    /// `f` failed the sufficient condition for being good on `[a, b]`.
    NotGood,
    /// Divisor weights need a positive lower end point.
    NonPositiveStart,
}

impl Guard {
    pub fn name(self) -> &'static str {
        match self {
            Guard::IntegerPsiArgument => "integer psi-argument at endpoint",
            Guard::IntervalBoundaryTie => "interval-boundary tie",
            Guard::NodeAtEndpoint => "node at interval endpoint",
            Guard::NonIntegerCorner => "non-integer corner",
            Guard::NotGood => "function not good on interval",
            Guard::NonPositiveStart => "non-positive lower endpoint",
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("capacity exceeded for {what}: requested {requested}, limit {limit}")]
    Capacity {
        what: &'static str,
        requested: u64,
        limit: u64,
    },

    #[error("syntax error at byte {offset}: expected one of {expected:?}, found {found}")]
    Syntax {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("domain error at x = {x}: {reason}")]
    Domain { x: f64, reason: String },

    #[error("x = {x} lies outside the domain [{lo}, {hi}]")]
    OutsideDomain { x: f64, lo: f64, hi: f64 },

    #[error("derivative order {requested} exceeds declared maximum {max}")]
    OrderExceeded { requested: usize, max: usize },

    #[error("guard `{guard}` rejected the job: {detail}")]
    Guard { guard: Guard, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn guard(guard: Guard, detail: impl Into<String>) -> Self {
        Error::Guard {
            guard,
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
