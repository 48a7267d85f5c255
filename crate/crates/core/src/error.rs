use thiserror::Error;

use crate::model::Gate;

#[derive(Debug, Error)]
pub enum Error {
    #[error("time {t} fs is outside the schedule range [0, {t_ad}] fs")]
    TimeOutOfRange { t: f64, t_ad: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("step too coarse: omega*h = {omega_h:.4} exceeds the limit {limit} (raise steps per interval)")]
    StepSize { omega_h: f64, limit: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("gate {0:?} is not holonomic and has no geometric ideal")]
    UnsupportedGate(Gate),

    #[error("loop is not closed: endpoints differ by {gap:.3e}")]
    OpenLoop { gap: f64 },

    #[error("dark-space tracking failed at path point {index}: smallest overlap singular value {singular_value:.3e}")]
    GaugeTracking { index: usize, singular_value: f64 },

    #[error("dark space at t = {t} fs has dimension {dimension}, expected 2")]
    DarkSpace { t: f64, dimension: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("cannot parse config: {0}")]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
