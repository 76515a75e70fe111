use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SemiclassicalParams;
use crate::surface_geometry::Vec2;

use std::f64::consts::PI;

/// `γ(x) = (1/2π)e^{−|x|²/2}`.
pub fn gamma(x: Vec2) -> f64 {
    (-0.5 * x.norm_squared()).exp() / (2.0 * PI)
}

/// Fourier transform of `γ` under `f̂(k) = (1/2π)∫f(x)e^{−ik·x}dx`; equal to `γ`.
pub fn gamma_hat(k: Vec2) -> f64 {
    gamma(k)
}

/// `φ₀(x) = √(π/ℏ)·γ((x−x₀)/√ℏ)·e^{iξ₀·x/ℏ}`, of squared norm 1/4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentState {
    pub params: SemiclassicalParams,
}

impl CoherentState {
    pub fn new(params: SemiclassicalParams) -> Self {
        Self { params }
    }

    /// `√(π/ℏ)/(2π)`, the value of `|φ₀|` at `x₀`.
    pub fn peak(&self) -> f64 {
        (PI / self.params.hbar()).sqrt() / (2.0 * PI)
    }

    pub fn value(&self, x: Vec2) -> Complex64 {
        let h = self.params.hbar();
        let y = x - self.params.x0();
        let phase = self.params.xi0().vector().dot(&x) / h;
        Complex64::from_polar(self.peak() * (-0.5 * y.norm_squared() / h).exp(), phase)
    }

    /// `U_tφ₀(x)` for `U_t = e^{itΔ}`.
    ///
    /// With `σ = ℏ + 2it`:
    /// `U_tφ₀(x) = √(π/ℏ)(1/2π)(ℏ/σ)·exp(−|x − x₀ − 2tξ₀/ℏ|²/(2σ))·e^{iξ₀·x/ℏ}·e^{−it/ℏ²}`.
    pub fn evolved(&self, t: f64, x: Vec2) -> Complex64 {
        let h = self.params.hbar();
        let xi = self.params.xi0().vector();
        let sigma = Complex64::new(h, 2.0 * t);
        let y = x - self.params.x0() - xi * (2.0 * t / h);
        let env = (-y.norm_squared() / (2.0 * sigma)).exp() * (h / sigma);
        let phase = xi.dot(&x) / h - t / (h * h);
        env * Complex64::from_polar(self.peak(), phase)
    }

    /// `φ̂₀(k)` under the `(1/2π)` convention.
    pub fn momentum_value(&self, k: Vec2) -> Complex64 {
        let h = self.params.hbar();
        let shift = k - self.params.xi0().vector() / h;
        let amp = (PI * h).sqrt() * gamma_hat(shift * h.sqrt());
        Complex64::from_polar(amp, -shift.dot(&self.params.x0()))
    }

    /// `‖φ₀‖² = 1/4`.
    pub fn norm_squared(&self) -> f64 {
        0.25
    }

    /// Fraction of `|φ₀|²` inside `B(x₀, r)`, `1 − e^{−r²/ℏ}`; the momentum density of
    /// `ξ = ℏk` has the same fraction inside `B(ξ₀, r)`.
    pub fn mass_fraction_within(&self, r: f64) -> f64 {
        -(-r * r / self.params.hbar()).exp_m1()
    }
}
