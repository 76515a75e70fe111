use serde::{Deserialize, Serialize};

use super::FlowError;

/// Which term attains the minimum in the time budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetConstraint {
    /// `c·ℏ^a`.
    TimeScale,
    /// `ℏ^{1/2+ε}·w/4`: transverse spreading stays inside the cylinder.
    Width,
    /// `ℏ·L/4`: longitudinal travel stays below one period.
    Length,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeBudget {
    pub t: f64,
    pub binding: BudgetConstraint,
    /// Exponent `a` of the time-scale term `c·ℏ^a`.
    pub exponent: f64,
}

/// `T = min(c·ℏ^{3/4+2ε}, ℏ^{1/2+ε}·w/4, ℏ·L/4)`.
pub fn time_budget(hbar: f64, eps: f64, length: f64, width: f64, c: f64) -> Result<TimeBudget, FlowError> {
    time_budget_with_exponent(hbar, eps, length, width, c, 0.75 + 2.0 * eps)
}

/// As [`time_budget`] with the time-scale exponent given explicitly.
pub fn time_budget_with_exponent(
    hbar: f64,
    eps: f64,
    length: f64,
    width: f64,
    c: f64,
    exponent: f64,
) -> Result<TimeBudget, FlowError> {
    if !(hbar > 0.0 && hbar < 1.0) {
        return Err(FlowError::Invalid(format!("hbar must lie in (0, 1), got {hbar}")));
    }
    if !(0.0..0.125).contains(&eps) {
        return Err(FlowError::Invalid(format!("eps must lie in [0, 1/8), got {eps}")));
    }
    if eps == 0.0 {
        log::warn!("time budget requested with eps = 0");
    }
    if !(length > 0.0 && width > 0.0 && c > 0.0 && exponent.is_finite()) {
        return Err(FlowError::Invalid(format!("need L, w, c > 0; got L={length}, w={width}, c={c}")));
    }
    let candidates = [
        (c * hbar.powf(exponent), BudgetConstraint::TimeScale),
        (hbar.powf(0.5 + eps) * width / 4.0, BudgetConstraint::Width),
        (hbar * length / 4.0, BudgetConstraint::Length),
    ];
    let (t, binding) =
        candidates
            .into_iter()
            .fold((f64::INFINITY, BudgetConstraint::TimeScale), |acc, x| if x.0 < acc.0 { x } else { acc });
    if !(t > 0.0 && t.is_finite()) {
        return Err(FlowError::NonPositiveBudget(t));
    }
    Ok(TimeBudget { t, binding, exponent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn documented_example() {
        let b = time_budget(1e-2, 0.05, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(b.t, 2.5e-3, max_relative = 1e-14);
        assert_eq!(b.binding, BudgetConstraint::Length);
    }

    #[test]
    fn zero_eps_allowed() {
        let b = time_budget(0.3, 0.0, 1.0, 1.0, 1.0).unwrap();
        assert!(b.t > 0.0);
        assert!(time_budget(1.5, 0.05, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn length_term_binds_for_small_hbar() {
        // 3/4+2ε < 1 for ε < 1/8, so ℏL/4 eventually undercuts c·ℏ^{3/4+2ε}.
        let eps = 0.05;
        for k in 20..40 {
            let hbar = 10f64.powf(-(k as f64) / 4.0);
            let b = time_budget(hbar, eps, 1.0, 1.0, 1.0).unwrap();
            assert_eq!(b.binding, BudgetConstraint::Length);
            assert_relative_eq!(b.t, hbar / 4.0, max_relative = 1e-15);
        }
        let b = time_budget(0.04, eps, 10.0, 10.0, 1.0).unwrap();
        assert_eq!(b.binding, BudgetConstraint::TimeScale);
    }

    proptest! {
        #[test]
        fn bounded_and_monotone(
            hbar in 1e-6f64..0.9, eps in 0.0f64..0.12, l in 0.1f64..50.0, w in 0.01f64..10.0,
            c in 0.01f64..10.0, f in 1.0f64..4.0,
        ) {
            let b = time_budget(hbar, eps, l, w, c).unwrap();
            prop_assert!(b.t <= c * hbar.powf(0.75 + 2.0 * eps) * (1.0 + 1e-15));
            prop_assert!(time_budget(hbar, eps, l * f, w, c).unwrap().t >= b.t);
            prop_assert!(time_budget(hbar, eps, l, w * f, c).unwrap().t >= b.t);
            prop_assert!(time_budget(hbar, eps, l, w, c * f).unwrap().t >= b.t);
        }
    }
}
