use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("instance has no outcome vector; an outcome ordering is required")]
    NoOutcomes,
    #[error("instance is not in non-increasing outcome order")]
    NotCanonical,
    #[error("policy has {got} entries, instance has {expected} feature values")]
    PolicyLength { expected: usize, got: usize },
    #[error("policy entry {index} is {value}, outside [0, 1]")]
    PolicyRange { index: usize, value: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
}
