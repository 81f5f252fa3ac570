use alloc::string::String;
use core::fmt;

/// Errors surfaced by the simulation core.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// A precondition on the arguments was violated.
    InvalidArgument(String),
    /// Identity registration attempted for an id that already exists.
    AlreadyRegistered(String),
    /// An operation referenced an identity that was never registered.
    UnknownUser(String),
    /// An internal consistency check failed; indicates a bug, not bad input.
    Internal(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::AlreadyRegistered(id) => write!(f, "user already registered: {id}"),
            Error::UnknownUser(id) => write!(f, "unknown user: {id}"),
            Error::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! invalid_arg {
    ($($arg:tt)*) => {
        $crate::Error::InvalidArgument(alloc::format!($($arg)*))
    };
}

pub(crate) use invalid_arg;
