use alloc::string::String;
use core::fmt;

use crate::spin::VertexId;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Parameters outside the regime an operation supports.
    ParametersOutOfRange(String),
    /// Malformed instance: duplicate ids, dangling edges, self-loops.
    InvalidInstance(String),
    UnknownVertex(VertexId),
    VertexPinned(VertexId),
    EdgeNotFound(usize),
    GammaEqualsOne,
    InstanceTooLarge { free: usize, limit: usize },
    BudgetExceeded { budget: u64 },
    DegreeTooLarge { max_degree: usize, delta_c: f64 },
    LambdaNotSubcritical { lambda: f64, lambda_c: f64 },
    DegreeBelowCritical { d: f64, delta_c: f64 },
    DomainViolation { x: f64, lo: f64, hi: f64 },
    ConcavityFailed { margin: f64 },
    /// No algorithmic regime covers the request.
    RegimeViolation(String),
    /// A tree contains truncated stubs where an exact value was requested.
    Truncated,
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ParametersOutOfRange(m) => write!(f, "parameters out of range: {m}"),
            Error::InvalidInstance(m) => write!(f, "invalid instance: {m}"),
            Error::UnknownVertex(v) => write!(f, "unknown vertex {v}"),
            Error::VertexPinned(v) => write!(f, "vertex {v} is pinned"),
            Error::EdgeNotFound(e) => write!(f, "edge index {e} not present"),
            Error::GammaEqualsOne => write!(f, "gamma equals one: random-cluster split undefined"),
            Error::InstanceTooLarge { free, limit } => {
                write!(f, "{free} free vertices exceed the exact-enumeration limit {limit}")
            }
            Error::BudgetExceeded { budget } => write!(f, "tree expansion exceeded budget of {budget} nodes"),
            Error::DegreeTooLarge { max_degree, delta_c } => write!(
                f,
                "max degree {max_degree} >= delta_c + 1 = {}: bounded mode unavailable",
                delta_c + 1.0
            ),
            Error::LambdaNotSubcritical { lambda, lambda_c } => {
                write!(f, "lambda {lambda} >= lambda_c {lambda_c}")
            }
            Error::DegreeBelowCritical { d, delta_c } => {
                write!(f, "degree {d} below delta_c {delta_c}")
            }
            Error::DomainViolation { x, lo, hi } => {
                write!(f, "argument {x} outside potential domain [{lo}, {hi}]")
            }
            Error::ConcavityFailed { margin } => {
                write!(f, "concavity check failed: max second derivative {margin} >= 0")
            }
            Error::RegimeViolation(m) => write!(f, "{m}"),
            Error::Truncated => write!(f, "tree contains truncated nodes"),
            Error::Parse(m) => write!(f, "parse error: {m}"),
        }
    }
}

impl core::error::Error for Error {}
