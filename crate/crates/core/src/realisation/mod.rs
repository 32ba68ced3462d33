//! Discrete state-space realisation of sampled transfer functions.

pub mod config;
pub mod grid;
pub mod hankel;
pub mod ho_kalman;
pub mod impulse;
pub mod model;
pub mod pipeline;
pub mod stabilise;
pub mod svd;

pub use config::{RealisationConfig, SvdStrategy};
pub use grid::bilinear_grid;
pub use hankel::{build_hankel, HankelOperator};
pub use impulse::{impulse_from_spectrum, impulse_response, MarkovSequence};
pub use svd::{dense_svd, truncated_svd, LinearOperator, TruncatedSvd};
pub use ho_kalman::{ho_kalman, Realisation};
pub use stabilise::{spectral_radius, stabilise};
pub use model::{StateSpaceModel, LABELS_EXTENSION, MODEL_EXTENSION};
pub use pipeline::{realise_grid, realise_setpoint, ModelGrid, RealisationReport};
