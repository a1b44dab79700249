use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while building meshes, assembling the scheme or running studies.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("invalid stabilization for cell {cell}: {reason}")]
    InvalidStabilization { cell: usize, reason: String },

    #[error("face {face} carries no |β·n| flux, its β-weighted mean is undefined")]
    ZeroFluxFace { face: usize },

    #[error("β·n changes sign along face {face} (min {min:e}, max {max:e})")]
    FluxSignChange { face: usize, min: f64, max: f64 },

    #[error("velocity field is not tangent to ramp face {face}: ∫|β·n| = {flux:e}")]
    NotTangent { face: usize, flux: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
