use alloc::boxed::Box;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("`{name}` = {value} is outside the domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("numerical failure: {0}")]
    NumericalFailure(&'static str),

    #[error("bid schedule was solved for a different {0}")]
    Mismatch(&'static str),

    #[error("at payline {payline}: {source}")]
    AtPayline {
        payline: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures of the numerics themselves, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NumericalFailure(_) => true,
            Error::AtPayline { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }

    pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            domain,
        }
    }
}
