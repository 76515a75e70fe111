use serde::{Deserialize, Serialize};

use super::SpectralError;
use crate::gaussian_wavepacket::TimeWindow;
use crate::quadrature::{integrate_adaptive, AdaptiveSpec};

/// Which profile enters the autocorrelation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutocorrelationSource {
    /// `H̃`, with `g(v) = T·g̃(v/T)`.
    Profile,
    /// `H̃′`, with `g(v) = g̃(v/T)/T`.
    Derivative,
}

/// `g̃(v) = ∫P((u−v)/2)P((u+v)/2)du = 2∫P(w)P(w+v)dw` for `P = H̃` or `H̃′`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowAutocorrelation {
    pub window: TimeWindow,
    pub source: AutocorrelationSource,
}

pub fn autocorrelation(window: TimeWindow, source: AutocorrelationSource) -> WindowAutocorrelation {
    WindowAutocorrelation { window, source }
}

impl WindowAutocorrelation {
    fn order(&self) -> usize {
        match self.source {
            AutocorrelationSource::Profile => 0,
            AutocorrelationSource::Derivative => 1,
        }
    }

    fn profile(&self, s: f64) -> f64 {
        self.window.profile_derivative(self.order(), s)
    }

    /// `g̃(v)`, even by construction (evaluated at `|v|`), zero for `|v| ≥ 2`.
    pub fn g_tilde(&self, v: f64) -> Result<f64, SpectralError> {
        let v = v.abs();
        if v >= 2.0 {
            return Ok(0.0);
        }
        let (a, b) = (-1.0, 1.0 - v);
        let mid = 0.5 * (a + b);
        let spec = AdaptiveSpec::default()
            .with_rel_tol(1e-12)
            .with_abs_tol(1e-17 * self.window.amplitude * self.window.amplitude);
        let r = integrate_adaptive(
            |w: f64| self.profile(w) * self.profile(w + v),
            &[a, 0.5 * (a + mid), mid, 0.5 * (mid + b), b],
            &spec,
        )?;
        Ok(2.0 * r.value)
    }

    /// `g(v)` with the scale rule of the source.
    pub fn g(&self, v: f64) -> Result<f64, SpectralError> {
        let t = self.window.t_scale;
        let gt = self.g_tilde(v / t)?;
        Ok(match self.source {
            AutocorrelationSource::Profile => t * gt,
            AutocorrelationSource::Derivative => gt / t,
        })
    }

    /// `‖P^{(k)}‖²` over `[−1, 1]`.
    fn derivative_norm_squared(&self, k: usize) -> Result<f64, SpectralError> {
        let order = self.order() + k;
        let spec = AdaptiveSpec::default().with_rel_tol(1e-13);
        let breaks: Vec<f64> = (0..=16).map(|i| -1.0 + i as f64 / 8.0).collect();
        let r = integrate_adaptive(
            |s: f64| {
                let d = self.window.profile_derivative(order, s);
                d * d
            },
            &breaks,
            &spec,
        )?;
        Ok(r.value)
    }

    /// Even Taylor coefficients `a_ℓ = g̃^{(2ℓ)}(0)/(2ℓ)! = 2(−1)^ℓ‖P^{(ℓ)}‖²/(2ℓ)!` for `ℓ = 0..=n`.
    pub fn taylor_coefficients(&self, n: usize) -> Result<Vec<f64>, SpectralError> {
        if self.order() + n > 12 {
            return Err(SpectralError::OrderTooLarge(n));
        }
        let mut out = Vec::with_capacity(n + 1);
        let mut fact = 1.0;
        for l in 0..=n {
            if l > 0 {
                fact *= (2 * l - 1) as f64 * (2 * l) as f64;
            }
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            out.push(2.0 * sign * self.derivative_norm_squared(l)? / fact);
        }
        Ok(out)
    }
}
