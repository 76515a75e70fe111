use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::gaussian_wavepacket::{CoherentState, SemiclassicalParams};
use crate::quadrature::{integrate_adaptive, AdaptiveSpec};
use crate::surface_geometry::Vec2;

fn smooth_step_part(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// `χ(r)`: smooth, `1` on `[0, 1/2]`, `0` on `[1, ∞)`.
pub fn cutoff_profile(r: f64) -> f64 {
    let a = smooth_step_part(1.0 - r);
    let b = smooth_step_part(r - 0.5);
    if a == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// `ψ₀ = χ(|x − x₀|/ℏ^{1/2−ε})φ₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffState {
    pub params: SemiclassicalParams,
    pub radius: f64,
}

impl CutoffState {
    pub fn new(params: SemiclassicalParams) -> Self {
        Self { params, radius: params.localization_radius() }
    }

    /// `ψ₀(x)` for a point in the plane chart of `x₀`.
    pub fn value(&self, x: Vec2) -> Complex64 {
        let r = (x - self.params.x0()).norm() / self.radius;
        let chi = cutoff_profile(r);
        if chi == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        CoherentState::new(self.params).value(x) * chi
    }

    /// `‖φ₀ − ψ₀‖² = 2π∫(1 − χ(r/R))²|φ₀|²r dr` with `|φ₀|² = e^{−r²/ℏ}/(4πℏ)`.
    pub fn remainder_norm_squared(&self) -> f64 {
        let h = self.params.hbar();
        let r0 = self.radius;
        let spec = AdaptiveSpec::default().with_rel_tol(1e-10).with_abs_tol(1e-300);
        let breaks: Vec<f64> = (0..=8).map(|k| r0 * (0.5 + k as f64 / 16.0)).collect();
        let transition = integrate_adaptive(
            |r: f64| (1.0 - cutoff_profile(r / r0)).powi(2) * (-r * r / h).exp() * r,
            &breaks,
            &spec,
        )
        .map(|q| q.value)
        .unwrap_or(f64::NAN);
        // Beyond R the integrand is the whole Gaussian tail, e^{−R²/ℏ}/4.
        transition / (2.0 * h) + 0.25 * (-r0 * r0 / h).exp()
    }
}
