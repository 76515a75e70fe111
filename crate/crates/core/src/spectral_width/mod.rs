//! Norm, defect and spectral width of the Euclidean quasimode through the window autocorrelation,
//! with the angular integrals and Bessel-integral expansion behind them.

mod angular;
mod autocorrelation;
mod norms;
mod overlap;

pub use angular::{
    angular_f, angular_f_bessel, j_integral, q_polynomial, AngularIntegralFamily, QPolynomial, DEFAULT_MAX_ORDER,
    HARD_MAX_ORDER,
};
pub use autocorrelation::{autocorrelation, AutocorrelationSource, WindowAutocorrelation};
pub use norms::{
    defect_norm_squared, lemma_expansion_check, norm_squared, spectral_width_report, weighted_overlap_integral,
    ExpansionReport, NormEstimate, SpectralWidthReport, WidthMethod,
};
pub use overlap::{overlap_closed_form, overlap_polar, overlap_polar_with_tol, overlap_value, OVERLAP_CROSS_CHECK_TOL};

pub use crate::special::{bessel_i as modified_bessel_i, bessel_i_scaled as modified_bessel_i_scaled};

use thiserror::Error;

use crate::gaussian_wavepacket::WavepacketError;
use crate::quadrature::QuadratureError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("overlap routes disagree at v = {v}: closed form {closed}, polar {polar}")]
    CrossCheckFailed { v: f64, closed: String, polar: String },
    #[error("norm integral is not real: re = {re}, im = {im}")]
    NonRealNorm { re: f64, im: f64 },
    #[error("polynomial order {0} exceeds the supported maximum")]
    OrderTooLarge(usize),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Wavepacket(#[from] WavepacketError),
}
