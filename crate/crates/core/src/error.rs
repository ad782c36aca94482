use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Error, Debug)]
pub enum Error {
    /// A numeric argument is outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// The scheme configuration is internally inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// Input data does not have the expected shape or contents.
    #[error("input error: {0}")]
    Input(String),

    /// The channel estimate for a user is identically zero.
    #[error("degenerate channel estimate")]
    DegenerateEstimate,

    /// No positive group-power allocation satisfies the constraints.
    #[error("infeasible power allocation: {0}")]
    Infeasible(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
