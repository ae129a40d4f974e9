use eph_core::collision::CollisionError;
use eph_core::ensemble::EnsembleError;
use eph_core::fit::FitError;
use eph_core::lattice::LatticeError;
use eph_core::qwave::QwaveError;
use eph_core::transport::TransportError;
use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("acceptance bounds violated: {}", .0.join(", "))]
    Acceptance(Vec<String>),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("writing {path}: {message}")]
    Format { path: String, message: String },
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) | AppError::Input(_) => 2,
            AppError::Acceptance(_) => 3,
            AppError::Numeric(_) => 4,
            AppError::Io { .. } | AppError::Format { .. } => 1,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        AppError::Io {
            context: context.into(),
            source,
        }
    }
}

impl From<LatticeError> for AppError {
    fn from(e: LatticeError) -> Self {
        AppError::Input(e.to_string())
    }
}

impl From<FitError> for AppError {
    fn from(e: FitError) -> Self {
        AppError::Numeric(e.to_string())
    }
}

impl From<CollisionError> for AppError {
    fn from(e: CollisionError) -> Self {
        match e {
            CollisionError::Trapped { .. } => AppError::Numeric(e.to_string()),
            _ => AppError::Input(e.to_string()),
        }
    }
}

impl From<TransportError> for AppError {
    fn from(e: TransportError) -> Self {
        match e {
            TransportError::Saturated(_) | TransportError::LargeAngle { .. } | TransportError::Fit(_) => {
                AppError::Numeric(e.to_string())
            }
            _ => AppError::Input(e.to_string()),
        }
    }
}

impl From<EnsembleError> for AppError {
    fn from(e: EnsembleError) -> Self {
        match e {
            EnsembleError::Fit(_) | EnsembleError::Collision(_) => AppError::Numeric(e.to_string()),
            _ => AppError::Input(e.to_string()),
        }
    }
}

impl From<QwaveError> for AppError {
    fn from(e: QwaveError) -> Self {
        match e {
            QwaveError::BoundaryContact { .. } | QwaveError::Confinement { .. } => AppError::Numeric(e.to_string()),
            _ => AppError::Input(e.to_string()),
        }
    }
}
