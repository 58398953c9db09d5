use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InputError {
    #[error("{name} must be finite and non-negative, got {value}")]
    Gain { name: &'static str, value: f64 },
    #[error("{name} must be finite and non-negative, got {value}")]
    Power { name: &'static str, value: f64 },
    #[error("BS power budget must be finite and positive, got {0}")]
    BsPower(f64),
    #[error("power allocation factor must lie in [0, 1], got {0}")]
    Alpha(f64),
    #[error("rate threshold must be finite and non-negative, got {0}")]
    RateThreshold(f64),
    #[error("{0}")]
    Shape(String),
}
