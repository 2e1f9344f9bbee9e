use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pose: {0}")]
    InvalidPose(String),
    #[error("degenerate motion: consecutive samples coincide")]
    DegenerateMotion,
    #[error("controller normal is parallel to the motion direction")]
    ZeroCrossProduct,
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("parameter ({u}, {v}) outside the surface domain")]
    Domain { u: f64, v: f64 },
    #[error("singular surface point at ({u}, {v})")]
    Singularity { u: f64, v: f64 },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("stroke {0} not found")]
    NotFound(u64),
    #[error("{source_name}:{line}: {message}")]
    Parse { source_name: String, line: usize, message: String },
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn parse(source_name: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse { source_name: source_name.into(), line, message: message.into() }
    }
}
