use serde::{Deserialize, Serialize};

use super::WavepacketError;
use crate::linear_flow::UnitDirection;
use crate::surface_geometry::Vec2;

/// `(ℏ, ε, x₀, ξ₀)`; the eigenvalue parameter is always `λ = ℏ⁻²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalParams {
    hbar: f64,
    eps: f64,
    x0: Vec2,
    xi0: UnitDirection,
}

impl SemiclassicalParams {
    pub fn new(hbar: f64, eps: f64, x0: Vec2, xi0: UnitDirection) -> Result<Self, WavepacketError> {
        if !(hbar > 0.0 && hbar < 1.0) {
            return Err(WavepacketError::InvalidParams(format!("hbar must lie in (0, 1), got {hbar}")));
        }
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(WavepacketError::InvalidParams(format!("eps must be nonnegative, got {eps}")));
        }
        if !(x0.x.is_finite() && x0.y.is_finite()) {
            return Err(WavepacketError::InvalidParams("x0 must be finite".into()));
        }
        Ok(Self { hbar, eps, x0, xi0 })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn x0(&self) -> Vec2 {
        self.x0
    }

    pub fn xi0(&self) -> UnitDirection {
        self.xi0
    }

    pub fn lambda(&self) -> f64 {
        1.0 / (self.hbar * self.hbar)
    }

    /// `ℏ^{1/2−ε}`, the radius of the phase-space box.
    pub fn localization_radius(&self) -> f64 {
        self.hbar.powf(0.5 - self.eps)
    }

    pub fn with_x0(self, x0: Vec2) -> Self {
        Self { x0, ..self }
    }

    pub fn with_xi0(self, xi0: UnitDirection) -> Self {
        Self { xi0, ..self }
    }
}
