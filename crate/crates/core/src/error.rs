use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("ground set size {0} outside 1..=64")]
    GroundSetSize(u32),
    #[error("vertex {vertex} outside [1, {n}]")]
    VertexOutOfRange { vertex: u32, n: u32 },
    #[error("edge {edge} has {actual} vertices, family is {expected}-uniform")]
    EdgeSize {
        edge: String,
        expected: u32,
        actual: u32,
    },
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("value {value} exceeds the representable range {limit}")]
    TooLarge { value: String, limit: String },
    #[error("cannot parse {what}: {reason}")]
    Parse { what: &'static str, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn params(msg: impl Into<String>) -> Error {
    Error::Params(msg.into())
}
