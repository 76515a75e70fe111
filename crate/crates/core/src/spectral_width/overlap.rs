use num_complex::Complex64;

use super::angular::angular_f;
use super::SpectralError;
use crate::gaussian_wavepacket::SemiclassicalParams;
use crate::quadrature::{integrate_adaptive, AdaptiveSpec};

/// Relative tolerance between the closed-form and polar overlap routes.
pub const OVERLAP_CROSS_CHECK_TOL: f64 = 1e-6;

/// `⟨φ₀, e^{iv(Δ+λ)}φ₀⟩ = ℏ/(4(ℏ + iv))·exp(−v²/(ℏ²(ℏ + iv)))`.
pub fn overlap_closed_form(hbar: f64, v: f64) -> Complex64 {
    let z = Complex64::new(hbar, v);
    let e = -(v * v) / (hbar * hbar) / z;
    Complex64::new(hbar / 4.0, 0.0) / z * e.exp()
}

/// Floor of the cross-check scale, relative to `⟨φ₀, φ₀⟩`; the polar route cannot resolve values far below it.
const CROSS_CHECK_FLOOR: f64 = 1e-8;

/// `(ℏ/8π)∫F(ρ)e^{iv(λ−ρ)}dρ` with `ρ = r²`, by adaptive quadrature in `r`.
pub fn overlap_polar(hbar: f64, v: f64) -> Result<Complex64, SpectralError> {
    overlap_polar_with_tol(hbar, v, 1e-16)
}

/// As [`overlap_polar`] with an absolute tolerance (not below `1e-16`).
pub fn overlap_polar_with_tol(hbar: f64, v: f64, abs_tol: f64) -> Result<Complex64, SpectralError> {
    if !(hbar > 0.0) {
        return Err(SpectralError::Invalid(format!("hbar must be positive, got {hbar}")));
    }
    let centre = 1.0 / hbar;
    let half = 12.0 / hbar.sqrt();
    let (lo, hi) = ((centre - half).max(0.0), centre + half);
    let n_panels = 48;
    let breaks: Vec<f64> = (0..=n_panels).map(|i| lo + (hi - lo) * i as f64 / n_panels as f64).collect();
    let spec = AdaptiveSpec { max_nodes: 1 << 20, ..AdaptiveSpec::default() }
        .with_rel_tol(1e-11)
        .with_abs_tol(abs_tol.max(1e-16));
    let pref = hbar / (8.0 * std::f64::consts::PI);
    let r = integrate_adaptive(
        |r: f64| {
            let phase = v * (centre - r) * (centre + r);
            Complex64::from_polar(pref * angular_f(hbar, r * r) * 2.0 * r, phase)
        },
        &breaks,
        &spec,
    )?;
    Ok(r.value)
}

/// Closed-form overlap, cross-checked against the polar route.
pub fn overlap_value(params: &SemiclassicalParams, v: f64) -> Result<Complex64, SpectralError> {
    let hbar = params.hbar();
    let a = overlap_closed_form(hbar, v);
    let scale = a.norm().max(CROSS_CHECK_FLOOR * overlap_closed_form(hbar, 0.0).norm());
    let b = overlap_polar_with_tol(hbar, v, 0.1 * OVERLAP_CROSS_CHECK_TOL * scale)?;
    if (a - b).norm() > OVERLAP_CROSS_CHECK_TOL * scale {
        return Err(SpectralError::CrossCheckFailed { v, closed: format!("{a}"), polar: format!("{b}") });
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn value_at_zero() {
        assert_relative_eq!(overlap_closed_form(0.1, 0.0).re, 0.25, max_relative = 1e-15);
        assert_relative_eq!(overlap_polar(0.1, 0.0).unwrap().re, 0.25, max_relative = 1e-9);
    }

    #[test]
    fn bounded_and_conjugate_symmetric() {
        for v in [-0.3, -0.01, 0.002, 0.07] {
            let a = overlap_closed_form(0.05, v);
            assert!(a.norm() <= 0.25);
            let b = overlap_closed_form(0.05, -v);
            assert_relative_eq!(a.re, b.re, max_relative = 1e-14);
            assert_relative_eq!(a.im, -b.im, max_relative = 1e-14);
        }
    }
}
