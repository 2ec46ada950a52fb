use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Model(#[from] cwf_core::Error),
}

impl CliError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    /// Process exit status: 2 for bad input or I/O, 3 for numeric failures.
    /// Validation failures (1) are not errors and are decided by the caller.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Model(cwf_core::Error::Numeric { .. }) => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::config("x").exit_code(), 2);
        let io = std::io::Error::new(std::io::ErrorKind::NotFound, "gone");
        assert_eq!(CliError::from(io).exit_code(), 2);
        let numeric = cwf_core::Error::Numeric {
            what: "quadrature".into(),
            residual: 1.0,
        };
        assert_eq!(CliError::from(numeric).exit_code(), 3);
        let domain = cwf_core::Error::Domain("bad".into());
        assert_eq!(CliError::from(domain).exit_code(), 2);
    }
}
