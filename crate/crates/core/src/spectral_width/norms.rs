use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::angular::AngularIntegralFamily;
use super::autocorrelation::{autocorrelation, AutocorrelationSource, WindowAutocorrelation};
use super::overlap::{overlap_closed_form, overlap_polar, OVERLAP_CROSS_CHECK_TOL};
use super::SpectralError;
use crate::gaussian_wavepacket::{SemiclassicalParams, TimeWindow};
use crate::quadrature::{integrate_adaptive, AdaptiveSpec};

const REALNESS_TOL: f64 = 1e-9;

/// A real quadratic quantity and its quadrature diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub imag: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthMethod {
    /// Closed-form overlap integrated against the window autocorrelation.
    ClosedFormQuadrature,
    /// Sampled surface field on a grid.
    SurfaceGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralWidthReport {
    pub hbar: f64,
    pub t: f64,
    pub lambda: f64,
    pub norm_sq: f64,
    pub defect_sq: f64,
    pub width: f64,
    pub width_times_t: f64,
    pub method: WidthMethod,
    pub norm_error: Option<f64>,
    pub defect_error: Option<f64>,
    /// Largest relative disagreement between the overlap routes at the sampled `v`.
    pub overlap_cross_check: Option<f64>,
}

/// Breakpoints on `[−2T, 2T]` resolving both the overlap scale `ℏ^{3/2}` and the window scale `T`.
fn v_breaks(hbar: f64, t: f64) -> Vec<f64> {
    let mut pos = Vec::new();
    let mut s = hbar.powf(1.5) / 4.0;
    while s < 2.0 * t {
        pos.push(s);
        s *= 2.0;
    }
    for k in 1..8 {
        pos.push(t * k as f64 / 4.0);
    }
    pos.push(2.0 * t);
    pos.sort_by(f64::total_cmp);
    pos.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * t);
    let mut out: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
    out.push(0.0);
    out.extend(pos);
    out
}

/// `∫_{−2T}^{2T} g(v)⟨φ₀, e^{iv(Δ+λ)}φ₀⟩dv`.
pub fn weighted_overlap_integral(hbar: f64, auto: &WindowAutocorrelation) -> Result<(Complex64, f64), SpectralError> {
    let t = auto.window.t_scale;
    let spec = AdaptiveSpec { max_nodes: 1 << 18, ..AdaptiveSpec::default() }.with_rel_tol(1e-11);
    let mut failure = None;
    let r = integrate_adaptive(
        |v: f64| match auto.g(v) {
            Ok(g) => overlap_closed_form(hbar, v) * g,
            Err(e) => {
                failure.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        },
        &v_breaks(hbar, t),
        &spec,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((r.value, r.error))
}

fn half_real(hbar: f64, auto: &WindowAutocorrelation) -> Result<NormEstimate, SpectralError> {
    let (z, err) = weighted_overlap_integral(hbar, auto)?;
    if z.im.abs() > REALNESS_TOL * z.re.abs() {
        return Err(SpectralError::NonRealNorm { re: z.re, im: z.im });
    }
    Ok(NormEstimate { value: 0.5 * z.re, imag: 0.5 * z.im, error: 0.5 * err })
}

/// `‖Φ_λ‖² = (1/2)∫g(v)⟨φ₀, e^{iv(Δ+λ)}φ₀⟩dv`.
pub fn norm_squared(params: &SemiclassicalParams, window: &TimeWindow) -> Result<NormEstimate, SpectralError> {
    half_real(params.hbar(), &autocorrelation(*window, AutocorrelationSource::Profile))
}

/// `‖(Δ+λ)Φ_λ‖²` through the `H′` autocorrelation.
pub fn defect_norm_squared(params: &SemiclassicalParams, window: &TimeWindow) -> Result<NormEstimate, SpectralError> {
    half_real(params.hbar(), &autocorrelation(*window, AutocorrelationSource::Derivative))
}

/// Relative disagreement of the two overlap routes at a few `v` where the overlap is not negligible.
fn overlap_cross_check(hbar: f64, t: f64) -> Result<f64, SpectralError> {
    let s = hbar.powf(1.5);
    let mut worst: f64 = 0.0;
    for v in [0.0, 0.5 * s, s, -s, 2.0 * t] {
        let v = v.clamp(-2.0 * t, 2.0 * t);
        let a = overlap_closed_form(hbar, v);
        if a.norm() < 1e-3 * overlap_closed_form(hbar, 0.0).norm() {
            continue;
        }
        let b = overlap_polar(hbar, v)?;
        let rel = (a - b).norm() / a.norm();
        if rel > OVERLAP_CROSS_CHECK_TOL {
            return Err(SpectralError::CrossCheckFailed { v, closed: format!("{a}"), polar: format!("{b}") });
        }
        worst = worst.max(rel);
    }
    Ok(worst)
}

pub fn spectral_width_report(
    params: &SemiclassicalParams,
    window: &TimeWindow,
) -> Result<SpectralWidthReport, SpectralError> {
    let n = norm_squared(params, window)?;
    let d = defect_norm_squared(params, window)?;
    let width = (d.value / n.value).sqrt();
    Ok(SpectralWidthReport {
        hbar: params.hbar(),
        t: window.t_scale,
        lambda: params.lambda(),
        norm_sq: n.value,
        defect_sq: d.value,
        width,
        width_times_t: width * window.t_scale,
        method: WidthMethod::ClosedFormQuadrature,
        norm_error: Some(n.error),
        defect_error: Some(d.error),
        overlap_cross_check: Some(overlap_cross_check(params.hbar(), window.t_scale)?),
    })
}

/// Truncations of `(ℏT/4)Σ_{ℓ≤N} a_ℓ(−1)^ℓ(ℏ/T)^{2ℓ}J_{2ℓ}(2/ℏ)` against `∫g(v)⟨φ₀, e^{iv(Δ+λ)}φ₀⟩dv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub order: usize,
    pub hbar: f64,
    pub t: f64,
    /// `T < ℏ`, the regime in which the expansion is asserted.
    pub regime_ok: bool,
    pub direct: f64,
    pub taylor_coefficients: Vec<f64>,
    pub j_values: Vec<f64>,
    /// Individual terms `(ℏT/4)a_ℓ(−1)^ℓ(ℏ/T)^{2ℓ}J_{2ℓ}` for `ℓ = 0..=N`.
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// `|partial_sum − direct|/|direct|` per order.
    pub residuals: Vec<f64>,
    /// Magnitude of the first omitted term.
    pub remainder_term: f64,
    /// Corrections shrink in magnitude with the order.
    pub corrections_decrease: bool,
}

pub fn lemma_expansion_check(
    params: &SemiclassicalParams,
    window: &TimeWindow,
    order: usize,
) -> Result<ExpansionReport, SpectralError> {
    let hbar = params.hbar();
    let t = window.t_scale;
    let auto = autocorrelation(*window, AutocorrelationSource::Profile);
    let a = auto.taylor_coefficients(order + 1)?;
    let fam = AngularIntegralFamily::new(hbar, 2 * order + 2)?;
    let (direct, _) = weighted_overlap_integral(hbar, &auto)?;
    let direct = direct.re;
    let term = |l: usize| -> Result<f64, SpectralError> {
        let sign = if l.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(0.25 * hbar * t * a[l] * sign * (hbar / t).powi(2 * l as i32) * fam.j(2 * l)?)
    };
    let terms = (0..=order).map(term).collect::<Result<Vec<_>, _>>()?;
    let mut partial_sums = Vec::with_capacity(order + 1);
    let mut acc = 0.0;
    for x in &terms {
        acc += x;
        partial_sums.push(acc);
    }
    let residuals = partial_sums.iter().map(|s| (s - direct).abs() / direct.abs()).collect();
    let corrections_decrease = terms.windows(2).skip(1).all(|w| w[1].abs() <= w[0].abs());
    if t >= hbar {
        log::warn!("expansion check outside the T < ℏ regime (T = {t}, ℏ = {hbar})");
    }
    Ok(ExpansionReport {
        order,
        hbar,
        t,
        regime_ok: t < hbar,
        direct,
        taylor_coefficients: a[..=order].to_vec(),
        j_values: fam.j_values.iter().step_by(2).take(order + 1).copied().collect(),
        terms,
        partial_sums,
        residuals,
        remainder_term: term(order + 1)?.abs(),
        corrections_decrease,
    })
}
