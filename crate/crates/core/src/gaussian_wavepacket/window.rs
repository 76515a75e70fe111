use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::WavepacketError;
use crate::quadrature::{integrate_adaptive, AdaptiveSpec};

/// `∫_{−1}^{1} e^{−1/(1−s²)} ds`.
pub const BUMP_INTEGRAL: f64 = 0.443_993_816_168_079_4;

/// `H̃(s) = e^{−1/(1−s²)}` for `|s| < 1`, zero otherwise.
pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// `H̃^{(k)} = p_k(s)/(1−s²)^{2k} · H̃`, with `p_{k+1} = p_k′(1−s²)² + 4k·s·p_k(1−s²) − 2s·p_k`.
#[derive(Debug, Clone)]
pub struct BumpDerivatives {
    /// Monomial coefficients of `p_k`, lowest degree first.
    polys: Vec<Vec<f64>>,
}

impl BumpDerivatives {
    pub fn new(max_order: usize) -> Self {
        let mut polys = vec![vec![1.0]];
        for k in 0..max_order {
            let p = &polys[k];
            let m = (2 * k) as f64;
            let mut next = vec![0.0; p.len() + 4];
            // p′·(1 − 2s² + s⁴)
            for (i, &c) in p.iter().enumerate().skip(1) {
                let d = c * i as f64;
                next[i - 1] += d;
                next[i + 1] -= 2.0 * d;
                next[i + 3] += d;
            }
            // 2m·s·p·(1 − s²) − 2s·p
            for (i, &c) in p.iter().enumerate() {
                next[i + 1] += (2.0 * m - 2.0) * c;
                next[i + 3] -= 2.0 * m * c;
            }
            while next.len() > 1 && next.last() == Some(&0.0) {
                next.pop();
            }
            polys.push(next);
        }
        Self { polys }
    }

    pub fn max_order(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn coefficients(&self, k: usize) -> &[f64] {
        &self.polys[k]
    }

    /// `H̃^{(k)}(s)`.
    pub fn eval(&self, k: usize, s: f64) -> f64 {
        if s.abs() >= 1.0 {
            return 0.0;
        }
        let q = 1.0 - s * s;
        let p = self.polys[k].iter().rev().fold(0.0, |acc, c| acc * s + c);
        if p == 0.0 {
            return 0.0;
        }
        p.signum() * (p.abs().ln() - 1.0 / q - (2 * k) as f64 * q.ln()).exp()
    }
}

fn shared_derivatives() -> &'static BumpDerivatives {
    static TABLE: OnceLock<BumpDerivatives> = OnceLock::new();
    TABLE.get_or_init(|| BumpDerivatives::new(12))
}

/// `H̃^{(k)}(s)` for `k ≤ 12`.
pub fn bump_derivative(k: usize, s: f64) -> f64 {
    shared_derivatives().eval(k, s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Bump,
}

/// `H(t) = A·H̃(t/T)` with `supp H̃ ⊂ [−1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub t_scale: f64,
    pub amplitude: f64,
    pub kind: WindowKind,
}

impl TimeWindow {
    pub fn bump(t_scale: f64) -> Result<Self, WavepacketError> {
        Self::new(t_scale, 1.0, WindowKind::Bump)
    }

    pub fn new(t_scale: f64, amplitude: f64, kind: WindowKind) -> Result<Self, WavepacketError> {
        if !(t_scale > 0.0 && t_scale.is_finite()) {
            return Err(WavepacketError::InvalidWindow(format!("T must be positive, got {t_scale}")));
        }
        if !amplitude.is_finite() {
            return Err(WavepacketError::InvalidWindow("amplitude must be finite".into()));
        }
        Ok(Self { t_scale, amplitude, kind })
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self { amplitude: self.amplitude * factor, ..self }
    }

    /// `H̃^{(k)}(s)` including the amplitude.
    pub fn profile_derivative(&self, k: usize, s: f64) -> f64 {
        match self.kind {
            WindowKind::Bump => self.amplitude * bump_derivative(k, s),
        }
    }

    pub fn profile(&self, s: f64) -> f64 {
        self.profile_derivative(0, s)
    }

    /// `H(t)`.
    pub fn value(&self, t: f64) -> f64 {
        self.profile(t / self.t_scale)
    }

    /// `H′(t) = H̃′(t/T)/T`.
    pub fn derivative(&self, t: f64) -> f64 {
        self.profile_derivative(1, t / self.t_scale) / self.t_scale
    }

    /// `∫H̃`.
    pub fn profile_integral(&self) -> f64 {
        match self.kind {
            WindowKind::Bump => self.amplitude * BUMP_INTEGRAL,
        }
    }

    /// `W(μ) = T∫H̃(s)e^{−isμ}ds`, real because `H̃` is even.
    pub fn transform(&self, mu: f64) -> Result<f64, WavepacketError> {
        let t = self.t_scale;
        if mu == 0.0 {
            return Ok(t * self.profile_integral());
        }
        let panels = ((mu.abs() / std::f64::consts::PI).ceil() as usize).clamp(2, 1 << 14);
        let breaks: Vec<f64> = (0..=panels).map(|i| -1.0 + 2.0 * i as f64 / panels as f64).collect();
        let floor = 1e-14 * self.profile_integral().abs();
        let spec = AdaptiveSpec::default().with_rel_tol(1e-11).with_abs_tol(floor);
        let r = integrate_adaptive(|s: f64| self.profile(s) * (s * mu).cos(), &breaks, &spec)?;
        Ok(t * r.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn documented_values() {
        let w = TimeWindow::bump(0.3).unwrap();
        assert_relative_eq!(w.value(0.0), (-1f64).exp(), max_relative = 1e-15);
        assert_eq!(w.value(0.3), 0.0);
        assert_eq!(w.value(-0.3), 0.0);
        assert_eq!(w.derivative(0.3), 0.0);
        assert_eq!(w.derivative(0.0), 0.0);
    }

    #[test]
    fn first_polynomials() {
        let d = BumpDerivatives::new(3);
        assert_eq!(d.coefficients(1), &[0.0, -2.0]);
        // p₂ = 6s⁴ − 2
        assert_eq!(d.coefficients(2), &[-2.0, 0.0, 0.0, 0.0, 6.0]);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-3;
        for &s in &[-0.7, -0.2, 0.0, 0.35, 0.8] {
            for k in 0..5 {
                let f = |d: f64| bump_derivative(k, s + d * h);
                let fd = (f(-2.0) - 8.0 * f(-1.0) + 8.0 * f(1.0) - f(2.0)) / (12.0 * h);
                let exact = bump_derivative(k + 1, s);
                assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1.0), "k={k} s={s}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn integral_constant() {
        let spec = AdaptiveSpec::default().with_rel_tol(1e-14);
        let r = integrate_adaptive(bump, &[-1.0, 0.0, 1.0], &spec).unwrap();
        assert_relative_eq!(r.value, BUMP_INTEGRAL, max_relative = 1e-13);
    }

    #[test]
    fn transform_even_and_decaying() {
        let w = TimeWindow::bump(0.1).unwrap();
        assert_relative_eq!(w.transform(0.0).unwrap(), 0.1 * BUMP_INTEGRAL);
        assert_relative_eq!(w.transform(3.0).unwrap(), w.transform(-3.0).unwrap());
        assert_relative_eq!(w.transform(1e-9).unwrap(), 0.1 * BUMP_INTEGRAL, max_relative = 1e-12);
        assert!(w.transform(200.0).unwrap().abs() < 1e-6 * w.transform(0.0).unwrap());
    }
}
