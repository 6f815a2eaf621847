use std::fmt;

/// Failures mapped onto the process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Exit 1: a verification step found a wrong result.
    Verification(String),
    /// Exit 2: unreadable or invalid configuration or output location.
    Config(String),
    /// Exit 3: quadrature, oscillation budget or extrapolation failure.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<renorm_core::Error> for CliError {
    fn from(e: renorm_core::Error) -> Self {
        use renorm_core::Error as E;
        match e {
            E::InvalidArgument(_)
            | E::NotInClass { .. }
            | E::DivergentSum { .. }
            | E::UnsupportedRegulatorTail { .. } => CliError::Config(e.to_string()),
            E::NoConvergence { .. }
            | E::QuadratureFailure { .. }
            | E::OscillationBudgetExceeded { .. }
            | E::NotReal { .. }
            | E::InfiniteCoefficient { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}
