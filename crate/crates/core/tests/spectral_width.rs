use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use superscar_core::gaussian_wavepacket::{EuclideanQuasimode, SemiclassicalParams, TimeWindow};
use superscar_core::linear_flow::UnitDirection;
use superscar_core::spectral_width::{
    angular_f, autocorrelation, defect_norm_squared, j_integral, lemma_expansion_check, norm_squared,
    overlap_closed_form, overlap_polar, overlap_polar_with_tol, overlap_value, spectral_width_report,
    AngularIntegralFamily, AutocorrelationSource, SpectralError,
};
use superscar_core::surface_geometry::Vec2;

fn params(h: f64) -> SemiclassicalParams {
    SemiclassicalParams::new(h, 0.05, Vec2::new(0.0, 0.0), UnitDirection::horizontal()).unwrap()
}

/// Chebyshev interpolant of `f` on `[−a, a]`, differentiated `k` times at 0.
fn chebyshev_derivative_at_zero<F: Fn(f64) -> f64>(f: F, a: f64, degree: usize, k: usize) -> f64 {
    let n = degree + 1;
    let vals: Vec<f64> = (0..n).map(|j| f(a * (std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos())).collect();
    let mut c: Vec<f64> = (0..n)
        .map(|m| {
            let s: f64 =
                (0..n).map(|j| vals[j] * (std::f64::consts::PI * m as f64 * (j as f64 + 0.5) / n as f64).cos()).sum();
            2.0 * s / n as f64
        })
        .collect();
    c[0] *= 0.5;
    for _ in 0..k {
        let m = c.len();
        let mut d = vec![0.0; m];
        for i in (1..m).rev() {
            let next = if i + 1 < m { d[i + 1] } else { 0.0 };
            d[i - 1] = next + 2.0 * i as f64 * c[i];
        }
        d[0] *= 0.5;
        d.pop();
        c = d;
    }
    // T_m(0) = cos(mπ/2)
    let at_zero: f64 = c
        .iter()
        .enumerate()
        .map(|(m, v)| match m % 4 {
            0 => *v,
            2 => -*v,
            _ => 0.0,
        })
        .sum();
    at_zero / a.powi(k as i32)
}

#[test]
fn taylor_coefficients_match_chebyshev_fit() {
    let w = TimeWindow::bump(1.0).unwrap();
    for source in [AutocorrelationSource::Profile, AutocorrelationSource::Derivative] {
        let auto = autocorrelation(w, source);
        let a = auto.taylor_coefficients(2).unwrap();
        let mut fact = 1.0;
        for (l, al) in a.iter().enumerate() {
            if l > 0 {
                fact *= ((2 * l - 1) * 2 * l) as f64;
            }
            let oracle = chebyshev_derivative_at_zero(|v| auto.g_tilde(v).unwrap(), 0.1, 24, 2 * l) / fact;
            assert_relative_eq!(*al, oracle, max_relative = 1e-5);
        }
    }
}

#[test]
fn overlap_routes_agree_on_random_v() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (h, t) in [(0.1, 0.05), (0.01, 2.0 * 0.01f64.powf(1.5))] {
        let p = params(h);
        for _ in 0..20 {
            let v = rng.random_range(-2.0 * t..2.0 * t);
            let a = overlap_value(&p, v).unwrap();
            let scale = a.norm().max(1e-8 * 0.25);
            let b = overlap_polar_with_tol(h, v, 1e-7 * scale).unwrap();
            assert!((a - b).norm() <= 1e-6 * scale, "ℏ = {h}, v = {v}: {a} vs {b}");
        }
    }
}

#[test]
fn overlap_polar_prefactor() {
    // ℏ/8π and not ℏ/8π²: the v = 0 value is ‖φ₀‖² = 1/4.
    for h in [0.2, 0.05, 0.01] {
        assert_relative_eq!(overlap_polar(h, 0.0).unwrap().re, 0.25, max_relative = 1e-9);
        assert_relative_eq!(overlap_closed_form(h, 0.0).re, 0.25);
    }
}

#[test]
fn j_derivative_transfer() {
    // ℏ^ℓJ_ℓ = F^{(ℓ)}(λ) by central finite differences on angular_f.
    let h = 0.1;
    let lam = 1.0 / (h * h);
    let step = 0.6;
    let f = |r: f64| angular_f(h, r);
    let d1 = (f(lam + step) - f(lam - step)) / (2.0 * step);
    let d2 = (f(lam + step) - 2.0 * f(lam) + f(lam - step)) / (step * step);
    let fine = 0.05;
    let d1f = (-f(lam + 2.0 * fine) + 8.0 * f(lam + fine) - 8.0 * f(lam - fine) + f(lam - 2.0 * fine)) / (12.0 * fine);
    let d2f = (-f(lam + 2.0 * fine) + 16.0 * f(lam + fine) - 30.0 * f(lam) + 16.0 * f(lam - fine)
        - f(lam - 2.0 * fine))
        / (12.0 * fine * fine);
    assert_relative_eq!(h * j_integral(h, 1).unwrap(), d1f, max_relative = 1e-4);
    assert_relative_eq!(h * h * j_integral(h, 2).unwrap(), d2f, max_relative = 1e-4);
    assert_relative_eq!(h * j_integral(h, 1).unwrap(), d1, max_relative = 1e-2);
    assert_relative_eq!(h * h * j_integral(h, 2).unwrap(), d2, max_relative = 1e-2);
}

#[test]
fn j_one_is_order_sqrt_hbar() {
    let ratios: Vec<f64> =
        [1e-4, 1e-3, 1e-2, 1e-1].iter().map(|h| j_integral(*h, 1).unwrap().abs() / h.sqrt()).collect();
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(hi < 1.0 && lo > 0.0, "{ratios:?}");
}

#[test]
fn norm_frozen_value() {
    // Double integral ∫∫H(t)H(s)⟨U_sφ₀, U_tφ₀⟩e^{i(t−s)λ}ds dt at 30 digits.
    let p = params(0.1);
    let w = TimeWindow::bump(0.05).unwrap();
    let n = norm_squared(&p, &w).unwrap();
    assert_relative_eq!(n.value, 7.531_781_847_061e-5, max_relative = 1e-10);
    assert!(n.imag.abs() < 1e-9 * n.value);
}

#[test]
fn norm_leading_asymptotics() {
    let w0 = TimeWindow::bump(1.0).unwrap();
    let a0 = autocorrelation(w0, AutocorrelationSource::Profile).g_tilde(0.0).unwrap();
    for h in [0.02f64, 0.005] {
        let t = 30.0 * h.powf(1.5);
        let p = params(h);
        let n = norm_squared(&p, &TimeWindow::bump(t).unwrap()).unwrap().value;
        let lead = h * t / 8.0 * a0 * j_integral(h, 0).unwrap();
        assert!((n / lead - 1.0).abs() < 0.02, "ℏ = {h}: ratio {}", n / lead);
    }
}

/// Cell-centred trapezoid of `|Φ|²` and `|(Δ+λ)Φ|²` over a box aligned with `ξ₀ = (1, 0)`.
fn spatial_norms(p: &SemiclassicalParams, w: &TimeWindow, step: f64) -> (f64, f64) {
    let q = EuclideanQuasimode::new(*p, *w);
    let h = p.hbar();
    let t = w.t_scale;
    let std = ((h * h + 4.0 * t * t) / (2.0 * h)).sqrt();
    let (lx, ly) = (2.0 * t / h + 9.0 * std, 9.0 * std);
    let nx = (2.0 * lx / step).ceil() as usize;
    let ny = (2.0 * ly / step).ceil() as usize;
    let (dx, dy) = (2.0 * lx / nx as f64, 2.0 * ly / ny as f64);
    let (mut a, mut b) = (0.0, 0.0);
    for i in 0..nx {
        for j in 0..ny {
            let x = Vec2::new(-lx + (i as f64 + 0.5) * dx, -ly + (j as f64 + 0.5) * dy);
            let f = q.field(x).unwrap();
            a += f.value.norm_sqr();
            b += f.defect.norm_sqr();
        }
    }
    (a * dx * dy, b * dx * dy)
}

#[test]
fn norms_match_spatial_grid() {
    let p = params(0.05);
    let w = TimeWindow::bump(0.04).unwrap();
    let (a, b) = spatial_norms(&p, &w, 0.05 / 3.0);
    let n = norm_squared(&p, &w).unwrap().value;
    let d = defect_norm_squared(&p, &w).unwrap().value;
    assert_relative_eq!(n, a, max_relative = 1e-5);
    assert_relative_eq!(d, b, max_relative = 1e-4);
}

#[test]
fn theta_scaling_across_hbar() {
    let hs = [0.02f64, 0.01, 0.005];
    let mut nr = Vec::new();
    let mut dr = Vec::new();
    for h in hs {
        let t = h.powf(0.85);
        let p = params(h);
        let w = TimeWindow::bump(t).unwrap();
        nr.push(norm_squared(&p, &w).unwrap().value / (t * h.powf(1.5)));
        dr.push(defect_norm_squared(&p, &w).unwrap().value / (h.powf(1.5) / t));
    }
    for r in [&nr, &dr] {
        let hi = r.iter().cloned().fold(0.0, f64::max);
        let lo = r.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(hi / lo - 1.0 < 0.05, "{r:?}");
    }
}

#[test]
fn width_scaling() {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for h in [0.02f64, 0.01, 0.005, 0.002] {
        let t = h.powf(0.85);
        let r = spectral_width_report(&params(h), &TimeWindow::bump(t).unwrap()).unwrap();
        assert!(r.width > 0.0);
        assert!((0.2..=5.0).contains(&r.width_times_t), "ℏ = {h}: {}", r.width_times_t);
        xs.push(r.lambda.ln());
        ys.push(r.width.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    assert!((slope - 0.425).abs() <= 0.02, "slope {slope}");
}

#[test]
fn width_isotropic_and_quadratic() {
    let w = TimeWindow::bump(0.03).unwrap();
    let base = spectral_width_report(&params(0.05), &w).unwrap();
    let turned = params(0.05).with_xi0(UnitDirection::from_angle(1.1));
    let r = spectral_width_report(&turned, &w).unwrap();
    assert_relative_eq!(r.width, base.width, max_relative = 1e-9);
    let doubled = norm_squared(&params(0.05), &w.scaled(2.0)).unwrap().value;
    assert_relative_eq!(doubled, 4.0 * base.norm_sq, max_relative = 1e-10);
    let d2 = defect_norm_squared(&params(0.05), &w.scaled(2.0)).unwrap().value;
    assert_relative_eq!(d2, 4.0 * base.defect_sq, max_relative = 1e-10);
}

#[test]
fn expansion_lemma_in_short_time_regime() {
    let p = params(0.1);
    let w = TimeWindow::bump(0.05).unwrap();
    let r = lemma_expansion_check(&p, &w, 2).unwrap();
    assert!(r.regime_ok);
    assert_relative_eq!(r.direct, 1.506_356_369_4e-4, max_relative = 1e-9);
    let fam = AngularIntegralFamily::new(0.1, 2).unwrap();
    let a = &r.taylor_coefficients;
    let bound = (0.1f64 / 0.05).powi(2) * (a[1] / a[0]).abs() * (fam.j(2).unwrap() / fam.j(0).unwrap()).abs() * 1.5;
    assert!(r.residuals[0] < bound, "{} vs {bound}", r.residuals[0]);
    assert!(r.residuals[2] < r.residuals[0]);
    let long = lemma_expansion_check(&p, &TimeWindow::bump(0.2).unwrap(), 1).unwrap();
    assert!(!long.regime_ok);
}

#[test]
fn invalid_order_is_reported() {
    assert!(matches!(j_integral(0.1, 20), Err(SpectralError::OrderTooLarge(20))));
}
