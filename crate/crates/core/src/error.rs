use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("spectral parameter {0} is outside the domain of the map")]
    Domain(String),
    #[error("spectral parameter too close to a singular point: {0}")]
    SingularParameter(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("norming constant routes disagree (relative gap {gap:.3e})")]
    Inconsistent { gap: f64 },
    #[error("invalid soliton data: {0}")]
    InvalidSpec(String),
    #[error("evaluation point within {distance:.3e} of a pole")]
    Pole { distance: f64 },
    #[error("configuration: {0}")]
    Config(String),
    #[error("solution blew up at t = {t}")]
    BlowUp { t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
