//! Exit-code table.

use std::fmt;
use std::io;

use steercert::Error;

pub const CERTIFIED: u8 = 0;
pub const NOT_CERTIFIED: u8 = 1;
pub const NOT_APPLICABLE: u8 = 2;
pub const USAGE: u8 = 64;
pub const DATA: u8 = 65;

#[derive(Debug)]
pub enum Failure {
    Core(Error),
    Io(io::Error),
    Usage(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => USAGE,
            Failure::Io(_) => DATA,
            Failure::Core(e) => match e {
                Error::InvalidParameter(_) => USAGE,
                Error::NotApplicable(_) | Error::PureMarginal(_) => NOT_APPLICABLE,
                Error::DominationFailure(_) | Error::FlipPrecondition(_) => NOT_CERTIFIED,
                _ => DATA,
            },
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
            Failure::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}
