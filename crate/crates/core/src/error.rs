use crate::config::ConfigError;
use crate::dataset::DatasetError;
use crate::eval::EvalError;
use crate::mesh::MeshError;
use crate::render::DimensionMismatch;
use crate::rng::RngError;
use crate::stats::StatsError;
use crate::texture::TextureError;

/// Crate-level error, one variant per subsystem.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Rng(#[from] RngError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Texture(#[from] TextureError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Composite(#[from] DimensionMismatch),
    #[error("image {index}: {source}")]
    Image { index: u64, source: Box<Error> },
    #[error("{0}")]
    Internal(String),
}

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Validation = 1,
    Io = 2,
    Internal = 3,
}

impl Error {
    pub fn exit_kind(&self) -> ExitKind {
        match self {
            Error::Config(ConfigError::Io { .. }) => ExitKind::Io,
            Error::Config(_) | Error::Rng(_) | Error::Composite(_) => ExitKind::Validation,
            Error::Mesh(MeshError::Io { .. }) => ExitKind::Io,
            Error::Mesh(_) => ExitKind::Validation,
            Error::Texture(TextureError::Io { .. }) => ExitKind::Io,
            Error::Texture(_) => ExitKind::Validation,
            Error::Dataset(e) if e.is_io() => ExitKind::Io,
            Error::Dataset(_) => ExitKind::Validation,
            Error::Eval(e) if e.is_io() => ExitKind::Io,
            Error::Eval(_) => ExitKind::Validation,
            Error::Stats(e) if e.is_io() => ExitKind::Io,
            Error::Stats(_) => ExitKind::Validation,
            Error::Image { source, .. } => source.exit_kind(),
            Error::Internal(_) => ExitKind::Internal,
        }
    }

    pub(crate) fn at_image(self, index: u64) -> Error {
        Error::Image { index, source: Box::new(self) }
    }
}
