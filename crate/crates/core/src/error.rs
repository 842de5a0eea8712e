use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the interval on which the function is defined.
    #[error("{name} = {value} is outside the valid interval [{lo}, {hi}]")]
    Domain {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The adaptive quadrature hit its subdivision limit before meeting tolerance.
    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    /// The caller asked an evaluator for something outside its contract.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("constellation mixes altitudes; analytic evaluators need a single orbit radius")]
    MixedAltitude,

    #[error("moment target unreachable: {0}")]
    Unreachable(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
