//! Euclidean coherent states, their free evolution, smooth time windows and the time-averaged quasimode.

mod coherent;
mod params;
mod quasimode;
mod window;

pub use coherent::{gamma, gamma_hat, CoherentState};
pub use params::SemiclassicalParams;
pub use quasimode::{EuclideanQuasimode, FieldValue, ThetaRule};
pub use window::{bump, bump_derivative, BumpDerivatives, TimeWindow, WindowKind, BUMP_INTEGRAL};

use thiserror::Error;

use crate::quadrature::QuadratureError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WavepacketError {
    #[error("invalid semiclassical parameters: {0}")]
    InvalidParams(String),
    #[error("invalid time window: {0}")]
    InvalidWindow(String),
    #[error("time quadrature did not converge: {0}")]
    QuadratureNotConverged(#[from] QuadratureError),
}
