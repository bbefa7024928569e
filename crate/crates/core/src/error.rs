use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("element id {element} out of range for ground set of size {n}")]
    ElementOutOfRange { element: usize, n: usize },

    #[error("element {element} is already a member of the base set")]
    ElementInSet { element: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("schema error in field `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("unsupported instance family `{0}`")]
    UnsupportedFamily(String),

    #[error("objective returned a non-finite value on subset {subset:?}")]
    ObjectiveFault { subset: Vec<usize> },

    #[error("the (k+1)-uniform supermatroid is undefined when k = n")]
    SupermatroidUndefined,

    #[error("enumeration requires {required} terms, exceeding the cap of {cap}")]
    EnumerationInfeasible { required: u128, cap: u64 },

    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
