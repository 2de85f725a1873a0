use thiserror::Error;

/// Configurable limits on exhaustive searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBounds {
    /// Largest finite group whose elements or automorphisms we enumerate.
    pub max_group_order: u64,
    /// Largest number of candidate tuples examined by one search.
    pub max_candidates: u64,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            max_group_order: 100_000,
            max_candidates: 10_000_000,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{what} is {value}, exceeding the configured bound {bound}")]
pub struct BoundExceeded {
    pub what: String,
    pub value: String,
    pub bound: u64,
}

impl BoundExceeded {
    pub(crate) fn new(what: impl Into<String>, value: impl ToString, bound: u64) -> Self {
        BoundExceeded {
            what: what.into(),
            value: value.to_string(),
            bound,
        }
    }
}
