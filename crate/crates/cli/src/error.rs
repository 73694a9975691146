use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("estimation error: {0}")]
    Estimation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Estimation(_) => 3,
        }
    }
}

impl From<rhem::Error> for CliError {
    fn from(e: rhem::Error) -> Self {
        use rhem::sampling::SamplingError;
        use rhem::simulate::SimError;
        match &e {
            rhem::Error::Store(_) | rhem::Error::Statistic(_) => CliError::Config(e.to_string()),
            rhem::Error::Sampling(SamplingError::InvalidPolicy(_) | SamplingError::TooLarge { .. }) => {
                CliError::Config(e.to_string())
            }
            rhem::Error::Simulation(SimError::InvalidConfig(_)) => CliError::Config(e.to_string()),
            _ => CliError::Estimation(e.to_string()),
        }
    }
}
