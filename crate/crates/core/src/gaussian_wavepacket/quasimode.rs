use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CoherentState, SemiclassicalParams, TimeWindow, WavepacketError};
use crate::quadrature::{integrate_adaptive, AdaptiveSpec, Pair, QuadValue, QuadratureError};
use crate::surface_geometry::Vec2;

/// Exponent below which integrand contributions are dropped (`e^{−45} ≈ 3e−20`).
const PRUNE_EXPONENT: f64 = 45.0;

/// `Φ_λ(x)` together with `(Δ+λ)Φ_λ(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldValue {
    pub value: Complex64,
    pub defect: Complex64,
}

impl std::ops::Add for FieldValue {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { value: self.value + o.value, defect: self.defect + o.defect }
    }
}

impl std::ops::AddAssign for FieldValue {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

/// `Φ_λ = ∫H(t)e^{itλ}U_tφ₀dt`, evaluated pointwise by time quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EuclideanQuasimode {
    pub params: SemiclassicalParams,
    pub window: TimeWindow,
    #[serde(skip, default = "default_spec")]
    pub spec: AdaptiveSpec,
}

fn default_spec() -> AdaptiveSpec {
    AdaptiveSpec::default()
}

impl EuclideanQuasimode {
    pub fn new(params: SemiclassicalParams, window: TimeWindow) -> Self {
        Self { params, window, spec: AdaptiveSpec::default() }
    }

    pub fn with_spec(self, spec: AdaptiveSpec) -> Self {
        Self { spec, ..self }
    }

    pub fn state(&self) -> CoherentState {
        CoherentState::new(self.params)
    }

    /// Subintervals of `[−T, T]` where the integrand magnitude exceeds `e^{−45}` of its peak scale.
    ///
    /// The magnitude is `exp(−ℏ(|y − 2tξ₀/ℏ|²)/(2(ℏ²+4t²)))`; the cut is the quadratic inequality
    /// `(4/ℏ − 8K)t² − 4ut + ℏ|y|² − 2Kℏ² ≤ 0` with `u = y·ξ₀`.
    fn relevant_intervals(&self, y: Vec2) -> Vec<(f64, f64)> {
        let h = self.params.hbar();
        let t_max = self.window.t_scale;
        let k = PRUNE_EXPONENT;
        let u = y.dot(&self.params.xi0().vector());
        let a = 4.0 / h - 8.0 * k;
        let b = -4.0 * u;
        let c = h * y.norm_squared() - 2.0 * k * h * h;
        let clip = |lo: f64, hi: f64| -> Option<(f64, f64)> {
            let (lo, hi) = (lo.max(-t_max), hi.min(t_max));
            (hi > lo).then_some((lo, hi))
        };
        let disc = b * b - 4.0 * a * c;
        let mut out = Vec::new();
        if a.abs() < 1e-300 {
            if b == 0.0 {
                if c <= 0.0 {
                    out.extend(clip(-t_max, t_max));
                }
            } else {
                let r = -c / b;
                out.extend(if b > 0.0 { clip(-t_max, r) } else { clip(r, t_max) });
            }
            return out;
        }
        if disc < 0.0 {
            if a < 0.0 {
                out.extend(clip(-t_max, t_max));
            }
            return out;
        }
        let sq = disc.sqrt();
        // Stable roots.
        let q = -0.5 * (b + b.signum() * sq);
        let (r1, r2) = if q != 0.0 { (q / a, c / q) } else { ((-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)) };
        let (r1, r2) = (r1.min(r2), r1.max(r2));
        if a > 0.0 {
            out.extend(clip(r1, r2));
        } else {
            out.extend(clip(-t_max, r1));
            out.extend(clip(r2, t_max));
        }
        out
    }

    /// Breakpoints inside `[lo, hi]` around the peak `t* = ℏu/2`.
    fn breakpoints(&self, lo: f64, hi: f64, u: f64) -> Vec<f64> {
        let h = self.params.hbar();
        let t_star = 0.5 * h * u;
        let sigma = 0.5 * (h * (h * h + 4.0 * t_star * t_star)).sqrt();
        let mut pts = vec![lo, hi];
        for m in [-6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0] {
            let p = t_star + m * sigma;
            if p > lo && p < hi {
                pts.push(p);
            }
        }
        // Keep panels short relative to the window so H is resolved.
        let n_win = 8;
        let t = self.window.t_scale;
        for i in 1..2 * n_win {
            let p = -t + t * i as f64 / n_win as f64;
            if p > lo && p < hi {
                pts.push(p);
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Envelope `H`-free integrand with the carrier `e^{iξ₀·x/ℏ}` removed and `e^{itλ}` cancelled.
    #[inline]
    fn kernel(&self, y: Vec2, t: f64) -> Complex64 {
        let h = self.params.hbar();
        let xi = self.params.xi0().vector();
        let sigma = Complex64::new(h, 2.0 * t);
        let z = y - xi * (2.0 * t / h);
        (-z.norm_squared() / (2.0 * sigma)).exp() * (h / sigma)
    }

    fn carrier(&self, x: Vec2) -> Complex64 {
        let s = self.state();
        Complex64::from_polar(s.peak(), self.params.xi0().vector().dot(&x) / self.params.hbar())
    }

    /// Joint evaluation of `Φ_λ(x)` and `(Δ+λ)Φ_λ(x) = i∫H′(t)e^{itλ}U_tφ₀(x)dt`.
    ///
    /// Substituting `t = (ℏ/2)sinh θ` gives the Gaussian factor a width `√ℏ` in `θ` independent of `t`;
    /// the trapezoid rule on a uniform `θ` grid is halved until two levels agree.
    pub fn field(&self, x: Vec2) -> Result<FieldValue, WavepacketError> {
        let y = x - self.params.x0();
        let intervals = self.relevant_intervals(y);
        if intervals.is_empty() {
            return Ok(FieldValue::default());
        }
        let h = self.params.hbar();
        let t = self.window.t_scale;
        let xi = self.params.xi0().vector();
        let amp = self.window.amplitude.abs().max(f64::MIN_POSITIVE);
        let abs_tol = self.spec.abs_tol.max(1e-16 * amp);
        let integrand = |th: f64| -> Pair {
            let (sh, ch) = (th.sinh(), th.cosh());
            let s = 0.5 * h * sh;
            let w = self.window.value(s);
            let dw = self.window.derivative(s) * t;
            if w == 0.0 && dw == 0.0 {
                return Pair::default();
            }
            let z = y - xi * sh;
            let one_i = Complex64::new(1.0, sh);
            let k = (-z.norm_squared() / (2.0 * h) / one_i).exp() / one_i * (0.5 * h * ch);
            Pair(k * w, k * dw)
        };
        let mut acc = Pair::default();
        let mut total_nodes = 0;
        for (lo, hi) in intervals {
            let (a, b) = ((2.0 * lo / h).asinh(), (2.0 * hi / h).asinh());
            let mut step = h.sqrt().min((b - a) / 8.0);
            let first = (a / step).ceil() as i64;
            let last = (b / step).floor() as i64;
            let mut sum = (first..=last).fold(Pair::default(), |s, k| s + integrand(k as f64 * step)) * step;
            total_nodes += (last - first + 1).max(0) as usize;
            loop {
                step *= 0.5;
                let first = (a / step).ceil() as i64;
                let last = (b / step).floor() as i64;
                let mut fresh = Pair::default();
                let mut k = first + (first.rem_euclid(2) == 0) as i64;
                while k <= last {
                    fresh = fresh + integrand(k as f64 * step);
                    total_nodes += 1;
                    k += 2;
                }
                let refined = sum * 0.5 + fresh * step;
                let diff = (refined - sum).magnitude();
                sum = refined;
                if diff <= (self.spec.rel_tol * sum.magnitude()).max(abs_tol) {
                    break;
                }
                if total_nodes > self.spec.max_nodes {
                    return Err(WavepacketError::QuadratureNotConverged(QuadratureError::NotConverged {
                        error: diff,
                        nodes: total_nodes,
                        magnitude: sum.magnitude(),
                    }));
                }
            }
            acc = acc + sum;
        }
        let c = self.carrier(x);
        Ok(FieldValue { value: acc.0 * c, defect: acc.1 * c * Complex64::new(0.0, 1.0 / t) })
    }

    /// As [`EuclideanQuasimode::field`], by adaptive Gauss–Legendre panels in `t`.
    pub fn field_adaptive(&self, x: Vec2) -> Result<FieldValue, WavepacketError> {
        let y = x - self.params.x0();
        let intervals = self.relevant_intervals(y);
        if intervals.is_empty() {
            return Ok(FieldValue::default());
        }
        let u = y.dot(&self.params.xi0().vector());
        let t = self.window.t_scale;
        let amp = self.window.amplitude.abs().max(f64::MIN_POSITIVE);
        let spec = self.spec.with_abs_tol(self.spec.abs_tol.max(1e-16 * amp));
        let mut acc = Pair(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for (lo, hi) in intervals {
            let br = self.breakpoints(lo, hi, u);
            let r = integrate_adaptive(
                |s: f64| {
                    let k = self.kernel(y, s);
                    // Defect integrand scaled by T so both components share a magnitude scale.
                    Pair(k * self.window.value(s), k * (self.window.derivative(s) * t))
                },
                &br,
                &spec,
            )?;
            acc = Pair(acc.0 + r.value.0, acc.1 + r.value.1);
        }
        let c = self.carrier(x);
        Ok(FieldValue { value: acc.0 * c, defect: acc.1 * c * Complex64::new(0.0, 1.0 / t) })
    }

    pub fn value(&self, x: Vec2) -> Result<Complex64, WavepacketError> {
        Ok(self.field(x)?.value)
    }

    pub fn defect(&self, x: Vec2) -> Result<Complex64, WavepacketError> {
        Ok(self.field(x)?.defect)
    }

    /// `Φ̂_λ(ξ/ℏ) = √(πℏ)·γ̂((ξ−ξ₀)/√ℏ)·W(T(|ξ|²−1)/ℏ²)·e^{−i(ξ−ξ₀)·x₀/ℏ}`.
    pub fn momentum_profile(&self, xi: Vec2) -> Result<Complex64, WavepacketError> {
        let h = self.params.hbar();
        let d = xi - self.params.xi0().vector();
        let g = super::gamma_hat(d / h.sqrt());
        if g == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let mu = self.window.t_scale * (xi.norm_squared() - 1.0) / (h * h);
        let w = self.window.transform(mu)?;
        let amp = (std::f64::consts::PI * h).sqrt() * g * w;
        Ok(Complex64::from_polar(1.0, -d.dot(&self.params.x0()) / h) * amp)
    }
}

/// Shared `θ` nodes (`t = (ℏ/2)sinh θ`) with trapezoid weights for `H` and `T·H′`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaRule {
    pub step: f64,
    /// `(sinh θ, weight for Φ, weight for the defect)`.
    pub nodes: Vec<(f64, f64, f64)>,
}

/// Exact exponentials are recomputed every this many samples along a line.
const LINE_REFRESH: usize = 64;

impl EuclideanQuasimode {
    /// Trapezoid rule in `θ` over `|θ| ≤ asinh(2T/ℏ)`.
    ///
    /// The default step resolves the Gaussian (`√ℏ/4`) and keeps the spacing in `t/T` at the window
    /// edge below `1/100`, where the bump is steepest.
    pub fn theta_rule(&self, step: Option<f64>) -> ThetaRule {
        let h = self.params.hbar();
        let t = self.window.t_scale;
        let end = (2.0 * t / h).asinh();
        let edge = 0.01 * 2.0 * t / (h * h + 4.0 * t * t).sqrt();
        let step = step.unwrap_or_else(|| (0.25 * h.sqrt()).min(edge));
        let n = (end / step).ceil() as i64;
        let mut nodes = Vec::with_capacity(2 * n as usize + 1);
        for k in -n..=n {
            let th = k as f64 * step;
            let (sh, ch) = (th.sinh(), th.cosh());
            let s = 0.5 * h * sh;
            let w = self.window.value(s);
            let dw = self.window.derivative(s) * t;
            if w == 0.0 && dw == 0.0 {
                continue;
            }
            let jac = step * 0.5 * h * ch;
            nodes.push((sh, w * jac, dw * jac));
        }
        ThetaRule { step, nodes }
    }

    /// Adds `Φ_λ` and `(Δ+λ)Φ_λ` at `start + i·delta`, `i < out.len()`, into `out`.
    ///
    /// Along a line the Gaussian exponent is quadratic in `i`, so each node's factor is advanced
    /// by two complex multiplications per sample.
    pub fn add_field_on_line(&self, rule: &ThetaRule, start: Vec2, delta: Vec2, out: &mut [FieldValue]) {
        let n = out.len();
        if n == 0 {
            return;
        }
        let h = self.params.hbar();
        let xi = self.params.xi0().vector();
        let y0 = start - self.params.x0();
        let dd = delta.norm_squared();
        let mut acc = vec![Pair::default(); n];
        let mut touched = false;
        for &(sh, wv, wd) in &rule.nodes {
            let one_i = Complex64::new(1.0, sh);
            let c = 1.0 / (2.0 * h * one_i);
            let w = y0 - xi * sh;
            let wd_dot = w.dot(&delta);
            let ww = w.norm_squared();
            // Samples with Re(c)·|w + iΔ|² ≤ K.
            let r2 = PRUNE_EXPONENT / c.re;
            let (lo, hi) = if dd > 0.0 {
                let disc = wd_dot * wd_dot - dd * (ww - r2);
                if disc < 0.0 {
                    continue;
                }
                let sq = disc.sqrt();
                (((-wd_dot - sq) / dd).ceil().max(0.0), ((-wd_dot + sq) / dd).floor().min((n - 1) as f64))
            } else if ww <= r2 {
                (0.0, (n - 1) as f64)
            } else {
                continue;
            };
            if hi < lo {
                continue;
            }
            let (lo, hi) = (lo as usize, hi as usize);
            touched = true;
            let q = |i: f64| ww + 2.0 * i * wd_dot + i * i * dd;
            let step_ratio = (-c * (2.0 * dd)).exp();
            let mut e = Complex64::new(0.0, 0.0);
            let mut f = Complex64::new(0.0, 0.0);
            for (k, slot) in acc[lo..=hi].iter_mut().enumerate() {
                if k % LINE_REFRESH == 0 {
                    let i = (lo + k) as f64;
                    e = (-c * q(i)).exp() / one_i;
                    f = (-c * (2.0 * wd_dot + (2.0 * i + 1.0) * dd)).exp();
                }
                *slot = Pair(slot.0 + e * wv, slot.1 + e * wd);
                e *= f;
                f *= step_ratio;
            }
        }
        if !touched {
            return;
        }
        let peak = self.state().peak();
        let t = self.window.t_scale;
        for (i, (slot, a)) in out.iter_mut().zip(acc).enumerate() {
            let x = start + delta * i as f64;
            let carrier = Complex64::from_polar(peak, xi.dot(&x) / h);
            slot.value += a.0 * carrier;
            slot.defect += a.1 * carrier * Complex64::new(0.0, 1.0 / t);
        }
    }
}
