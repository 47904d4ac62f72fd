use thiserror::Error;

/// Failure of a subcommand, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("configuration error: {0}")]
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Config(_) => 4,
        }
    }
}

impl From<bayonet::Error> for CliError {
    fn from(e: bayonet::Error) -> Self {
        use bayonet::Error as E;
        let msg = e.to_string();
        match e {
            E::ZeroVarianceColumn(_) | E::InvalidData(_) | E::DimensionMismatch { .. } | E::AllZeroW => {
                CliError::Input(msg)
            }
            E::InvalidParameter(_) | E::GridTooSmall => CliError::Config(msg),
            E::SingularC
            | E::SingularMatrix
            | E::NotConverged { .. }
            | E::NoAdmissibleRoot { .. }
            | E::NumericalOverflow(_)
            | E::NonPositiveQ(_)
            | E::TransitionValue(_)
            | E::DegenerateDenominator
            | E::MarginalPoint { .. } => CliError::Numerical(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
