use num_complex::Complex64;

use super::cutoff::CutoffState;
use super::SurfaceQuasimodeError;
use crate::gaussian_wavepacket::{EuclideanQuasimode, FieldValue, SemiclassicalParams, ThetaRule, TimeWindow};
use crate::linear_flow::{
    enumerate_translates, find_cylinder, verify_no_self_intersection, Cylinder, PhaseSpaceBox, SelfIntersectionReport,
    TranslateSet,
};
use crate::surface_geometry::{SurfacePoint, TranslationSurface, Vec2};

/// Closed-orbit search length, in units of `√area`.
pub const CYLINDER_SEARCH_FACTOR: f64 = 100.0;
const SELF_INTERSECTION_SAMPLES: usize = 64;

/// `Λ_λ(x) = Σ_j Φ_λ(τ_j⁻¹x)` over the translates met by the unrolled cylinder.
///
/// `params.x0()` is the position of `x₀` in the chart of polygon `polygon`.
#[derive(Debug, Clone)]
pub struct SurfaceQuasimodeEval {
    pub surface: TranslationSurface,
    pub polygon: usize,
    pub euclidean: EuclideanQuasimode,
    pub cylinder: Cylinder,
    pub translates: TranslateSet,
    pub certification: SelfIntersectionReport,
    per_polygon: Vec<Vec<Vec2>>,
    rule: ThetaRule,
}

impl SurfaceQuasimodeEval {
    /// Finds the cylinder through `x₀` in direction `ξ₀` and certifies the translate sum.
    pub fn new(
        surface: &TranslationSurface,
        polygon: usize,
        params: SemiclassicalParams,
        window: TimeWindow,
    ) -> Result<Self, SurfaceQuasimodeError> {
        let cyl = Self::cylinder_for(surface, polygon, &params)?;
        Self::with_cylinder(surface, polygon, params, window, cyl, true)
    }

    /// As [`SurfaceQuasimodeEval::new`] but keeps a failed certification in the report instead of erroring.
    pub fn new_unchecked(
        surface: &TranslationSurface,
        polygon: usize,
        params: SemiclassicalParams,
        window: TimeWindow,
    ) -> Result<Self, SurfaceQuasimodeError> {
        let cyl = Self::cylinder_for(surface, polygon, &params)?;
        Self::with_cylinder(surface, polygon, params, window, cyl, false)
    }

    pub fn cylinder_for(
        surface: &TranslationSurface,
        polygon: usize,
        params: &SemiclassicalParams,
    ) -> Result<Cylinder, SurfaceQuasimodeError> {
        let area = surface.total_area;
        let x0 = SurfacePoint::new(polygon, params.x0());
        Ok(find_cylinder(surface, params.xi0(), x0, CYLINDER_SEARCH_FACTOR * area.sqrt())?)
    }

    pub fn with_cylinder(
        surface: &TranslationSurface,
        polygon: usize,
        params: SemiclassicalParams,
        window: TimeWindow,
        cylinder: Cylinder,
        require_certified: bool,
    ) -> Result<Self, SurfaceQuasimodeError> {
        if polygon >= surface.polygons.len() {
            return Err(SurfaceQuasimodeError::Invalid(format!("polygon {polygon} does not exist")));
        }
        let hbar = params.hbar();
        let t = window.t_scale;
        let x0 = SurfacePoint::new(polygon, params.x0());
        let bx = PhaseSpaceBox::new(x0, params.xi0(), hbar, params.eps())?;
        let certification = verify_no_self_intersection(surface, &bx, &cylinder, t, hbar, SELF_INTERSECTION_SAMPLES)?;
        if require_certified && !certification.passed {
            let why = certification.reason.clone().unwrap_or_else(|| "tube leaves the cylinder".into());
            return Err(SurfaceQuasimodeError::PreconditionNotCertified(why));
        }
        let translates = enumerate_translates(surface, &cylinder, &bx, t, hbar)?;
        let mut per_polygon = vec![Vec::new(); surface.polygons.len()];
        for (tau, &p) in translates.translations.iter().zip(&translates.polygons) {
            per_polygon[p].push(*tau);
        }
        let euclidean = EuclideanQuasimode::new(params, window);
        Ok(Self {
            surface: surface.clone(),
            polygon,
            rule: euclidean.theta_rule(None),
            euclidean,
            cylinder,
            translates,
            certification,
            per_polygon,
        })
    }

    pub fn params(&self) -> SemiclassicalParams {
        self.euclidean.params
    }

    pub fn window(&self) -> TimeWindow {
        self.euclidean.window
    }

    pub fn cutoff_state(&self) -> CutoffState {
        CutoffState::new(self.params())
    }

    /// Translations attached to polygon `p`.
    pub fn translates_for(&self, p: usize) -> &[Vec2] {
        self.per_polygon.get(p).map(Vec::as_slice).unwrap_or(&[])
    }

    /// `Λ_λ` and `(Δ+λ)Λ_λ` at a surface point.
    pub fn field(&self, x: SurfacePoint) -> Result<FieldValue, SurfaceQuasimodeError> {
        let mut acc = FieldValue::default();
        for tau in self.translates_for(x.polygon) {
            acc += self.euclidean.field(x.position - tau)?;
        }
        Ok(acc)
    }

    /// Adds `Λ_λ` and `(Δ+λ)Λ_λ` at `start + i·delta` in the chart of `polygon` into `out`.
    ///
    /// Uses a shared time rule for the whole line; [`SurfaceQuasimodeEval::field`] is the pointwise route.
    pub fn add_field_on_line(&self, polygon: usize, start: Vec2, delta: Vec2, out: &mut [FieldValue]) {
        for tau in self.translates_for(polygon) {
            self.euclidean.add_field_on_line(&self.rule, start - tau, delta, out);
        }
    }

    pub fn value(&self, x: SurfacePoint) -> Result<Complex64, SurfaceQuasimodeError> {
        Ok(self.field(x)?.value)
    }

    pub fn defect(&self, x: SurfacePoint) -> Result<Complex64, SurfaceQuasimodeError> {
        Ok(self.field(x)?.defect)
    }

    /// `ψ₀` transported to the surface: the lift of `x` lying in `B(x₀, ℏ^{1/2−ε})`, if any.
    pub fn cutoff_value(&self, x: SurfacePoint) -> Complex64 {
        let state = self.cutoff_state();
        self.translates_for(x.polygon).iter().map(|tau| state.value(x.position - tau)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear_flow::UnitDirection;
    use approx::assert_relative_eq;

    fn torus_eval(h: f64, t: f64) -> SurfaceQuasimodeEval {
        let s = TranslationSurface::square_torus(10.0);
        let p = SemiclassicalParams::new(h, 0.05, Vec2::new(5.0, 5.0), UnitDirection::horizontal()).unwrap();
        SurfaceQuasimodeEval::new(&s, 0, p, TimeWindow::bump(t).unwrap()).unwrap()
    }

    #[test]
    fn single_translate_regime() {
        let e = torus_eval(0.02, 1e-3);
        assert!(e.translates_for(0).iter().any(|t| t.norm() == 0.0));
        for dx in [0.0, 0.05, 0.1] {
            let x = Vec2::new(5.0 + dx, 5.02);
            let a = e.value(SurfacePoint::new(0, x)).unwrap();
            let b = e.euclidean.value(x).unwrap();
            assert!((a - b).norm() <= 1e-15 * b.norm().max(1e-300));
        }
    }

    #[test]
    fn wraps_downstream() {
        let h = 0.02;
        let t = 0.5 * h * 10.0 / 4.0;
        let e = torus_eval(h, t);
        // x₀ + (1, 0) and x₀ + (1, 0) − (10, 0) lie on the same orbit; the far copy must vanish.
        let x = Vec2::new(6.0, 5.0);
        let a = e.value(SurfacePoint::new(0, x)).unwrap();
        let b = e.euclidean.value(x).unwrap();
        assert_relative_eq!(a.re, b.re, max_relative = 1e-8);
        assert_relative_eq!(a.im, b.im, max_relative = 1e-8);
        assert!(a.norm() > 0.0);
    }

    #[test]
    fn uncertified_rejected() {
        let s = TranslationSurface::square_torus(1.0);
        let p = SemiclassicalParams::new(0.01, 0.05, Vec2::new(0.5, 0.5), UnitDirection::horizontal()).unwrap();
        let err = SurfaceQuasimodeEval::new(&s, 0, p, TimeWindow::bump(0.01).unwrap()).unwrap_err();
        assert!(matches!(err, SurfaceQuasimodeError::PreconditionNotCertified(_) | SurfaceQuasimodeError::Flow(_)));
    }
}
