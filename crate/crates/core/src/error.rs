use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("group enumeration exceeded cap of {cap} elements")]
    CapExceeded { cap: usize },
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("product subgroup is not subdirect (projection onto factor {0} is not surjective)")]
    NotSubdirect(usize),
    #[error("inconsistent relations: {0}")]
    Inconsistent(String),
    #[error("non-abelian entanglement: {0}")]
    NonAbelian(String),
    #[error("level mismatch: expected {expected}, found {found}")]
    LevelMismatch { expected: u64, found: u64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Resource-type failures (caps, i/o) as opposed to bad input.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::CapExceeded { .. } | Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
