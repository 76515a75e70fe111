use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::SpectralError;
use crate::quadrature::periodic_trapezoid;
use crate::special::bessel_i_scaled;

/// Largest order accepted by [`q_polynomial`] and [`j_integral`].
pub const DEFAULT_MAX_ORDER: usize = 8;
/// Largest order an [`AngularIntegralFamily`] may be built with.
pub const HARD_MAX_ORDER: usize = 16;

type Q = Ratio<i128>;

fn trapezoid_points(x: f64) -> usize {
    (10.0 * x.max(0.0).sqrt()).ceil() as usize + 64
}

/// `F(ρ) = ∫₀^{2π} exp(−(ℏρ + 1/ℏ − 2ρ^{1/2}cosθ)) dθ` by the periodic trapezoid rule.
pub fn angular_f(hbar: f64, rho: f64) -> f64 {
    assert!(rho >= 0.0 && hbar > 0.0, "angular_f needs ρ ≥ 0 and ℏ > 0");
    let r = rho.sqrt();
    let base = (hbar.sqrt() * r - 1.0 / hbar.sqrt()).powi(2);
    let x = 2.0 * r;
    let sum = periodic_trapezoid(trapezoid_points(x), |th| {
        let s = (0.5 * th).sin();
        (-2.0 * x * s * s).exp()
    });
    (-base).exp() * sum
}

/// `F(ρ) = 2π·exp(−(√(ℏρ) − 1/√ℏ)²)·e^{−2√ρ}I₀(2√ρ)`.
pub fn angular_f_bessel(hbar: f64, rho: f64) -> f64 {
    let r = rho.sqrt();
    let base = (hbar.sqrt() * r - 1.0 / hbar.sqrt()).powi(2);
    TAU * (-base).exp() * bessel_i_scaled(0, 2.0 * r)
}

/// One term `coeff·u^{u_power}·ℏ^{hbar_power}` with `u = cosθ − 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTerm {
    pub u_power: u32,
    pub hbar_power: u32,
    pub numer: i128,
    pub denom: i128,
}

impl QTerm {
    fn coeff(&self) -> Q {
        Q::new(self.numer, self.denom)
    }
}

/// `q_ℓ` with `ℏ^ℓ q_ℓ(cosθ)e^{−(2/ℏ)(1−cosθ)} = ∂_ρ^ℓ f(ρ, θ)|_{ρ=λ}`, stored in powers of `u = x − 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QPolynomial {
    pub order: usize,
    pub terms: Vec<QTerm>,
}

impl QPolynomial {
    fn build(order: usize) -> Result<Self, SpectralError> {
        if order > HARD_MAX_ORDER {
            return Err(SpectralError::OrderTooLarge(order));
        }
        // P = Σ k·c^a·s^b·h^d with s = ρ^{−1/2}, c = cosθ, h = ℏ.
        let mut p: BTreeMap<(u32, u32, u32), Q> = BTreeMap::new();
        p.insert((0, 0, 0), Q::one());
        for _ in 0..order {
            let mut next: BTreeMap<(u32, u32, u32), Q> = BTreeMap::new();
            let mut add = |key, val: Q| {
                let e = next.entry(key).or_insert_with(Q::zero);
                *e += val;
            };
            for (&(a, b, d), k) in &p {
                if b > 0 {
                    add((a, b + 2, d), *k * Q::new(-(b as i128), 2));
                }
                add((a, b, d + 1), -*k);
                add((a + 1, b + 1, d), *k);
            }
            next.retain(|_, v| !v.is_zero());
            p = next;
        }
        // Set s = h, divide by h^ℓ, then expand c^a = (u + 1)^a.
        let mut collected: BTreeMap<(u32, u32), Q> = BTreeMap::new();
        for ((a, b, d), k) in p {
            let e = b + d - order as u32;
            let mut binom = Q::one();
            for j in 0..=a {
                if j > 0 {
                    binom = binom * Q::from_integer((a - j + 1) as i128) / Q::from_integer(j as i128);
                }
                *collected.entry((j, e)).or_insert_with(Q::zero) += k * binom;
            }
        }
        let terms = collected
            .into_iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|((u_power, hbar_power), v)| QTerm { u_power, hbar_power, numer: *v.numer(), denom: *v.denom() })
            .collect();
        Ok(Self { order, terms })
    }

    /// Coefficient of `x^k` as a polynomial in `ℏ` (index = power of `ℏ`).
    pub fn x_coefficients(&self) -> Vec<Vec<Ratio<i128>>> {
        let max_h = self.terms.iter().map(|t| t.hbar_power).max().unwrap_or(0) as usize;
        let mut out = vec![vec![Q::zero(); max_h + 1]; self.order + 1];
        for t in &self.terms {
            // u^m = (x − 1)^m
            let m = t.u_power;
            let mut binom = Q::one();
            for k in 0..=m {
                if k > 0 {
                    binom = binom * Q::from_integer((m - k + 1) as i128) / Q::from_integer(k as i128);
                }
                let sign = if (m - k) % 2 == 0 { Q::one() } else { -Q::one() };
                out[k as usize][t.hbar_power as usize] += t.coeff() * binom * sign;
            }
        }
        out
    }

    /// `q_ℓ(x; ℏ)` evaluated through `u = x − 1`.
    pub fn eval_u(&self, u: f64, hbar: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff().to_f64().unwrap_or(f64::NAN) * u.powi(t.u_power as i32) * hbar.powi(t.hbar_power as i32))
            .sum()
    }

    pub fn eval(&self, x: f64, hbar: f64) -> f64 {
        self.eval_u(x - 1.0, hbar)
    }

    /// Largest absolute rational coefficient, a guard against overflow in the recurrence.
    pub fn max_coefficient(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff().abs().to_f64().unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
    }
}

/// `q_ℓ` for `ℓ ≤ DEFAULT_MAX_ORDER`.
pub fn q_polynomial(order: usize) -> Result<QPolynomial, SpectralError> {
    if order > DEFAULT_MAX_ORDER {
        return Err(SpectralError::OrderTooLarge(order));
    }
    QPolynomial::build(order)
}

fn j_with(poly: &QPolynomial, hbar: f64) -> f64 {
    let x = 2.0 / hbar;
    periodic_trapezoid(trapezoid_points(x), |th| {
        let s = (0.5 * th).sin();
        let u = -2.0 * s * s;
        poly.eval_u(u, hbar) * (x * u).exp()
    })
}

/// `J_ℓ(2/ℏ) = ∫₀^{2π} q_ℓ(cosθ)e^{−(2/ℏ)(1−cosθ)} dθ`.
pub fn j_integral(hbar: f64, order: usize) -> Result<f64, SpectralError> {
    if !(hbar > 0.0) {
        return Err(SpectralError::Invalid(format!("hbar must be positive, got {hbar}")));
    }
    Ok(j_with(&q_polynomial(order)?, hbar))
}

/// `q_0..q_N` together with `J_0..J_N` at a fixed `ℏ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularIntegralFamily {
    pub hbar: f64,
    pub max_order: usize,
    pub polynomials: Vec<QPolynomial>,
    pub j_values: Vec<f64>,
}

impl AngularIntegralFamily {
    pub fn new(hbar: f64, max_order: usize) -> Result<Self, SpectralError> {
        if !(hbar > 0.0) {
            return Err(SpectralError::Invalid(format!("hbar must be positive, got {hbar}")));
        }
        if max_order > HARD_MAX_ORDER {
            return Err(SpectralError::OrderTooLarge(max_order));
        }
        let polynomials = (0..=max_order).map(QPolynomial::build).collect::<Result<Vec<_>, _>>()?;
        let j_values = polynomials.iter().map(|p| j_with(p, hbar)).collect();
        Ok(Self { hbar, max_order, polynomials, j_values })
    }

    pub fn j(&self, order: usize) -> Result<f64, SpectralError> {
        self.j_values.get(order).copied().ok_or(SpectralError::OrderTooLarge(order))
    }

    pub fn q(&self, order: usize) -> Result<&QPolynomial, SpectralError> {
        self.polynomials.get(order).ok_or(SpectralError::OrderTooLarge(order))
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn q(n: i128, d: i128) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn low_orders_symbolic() {
        let q0 = q_polynomial(0).unwrap().x_coefficients();
        assert_eq!(q0, vec![vec![Q::one()]]);
        // q₁ = x − 1
        let q1 = q_polynomial(1).unwrap().x_coefficients();
        assert_eq!(q1[0], vec![q(-1, 1)]);
        assert_eq!(q1[1], vec![q(1, 1)]);
        // q₂ = x² − (2 + ℏ/2)x + 1
        let q2 = q_polynomial(2).unwrap().x_coefficients();
        assert_eq!(q2[0][0], q(1, 1));
        assert!(q2[0].iter().skip(1).all(|c| c.is_zero()));
        assert_eq!(q2[1][0], q(-2, 1));
        assert_eq!(q2[1][1], q(-1, 2));
        assert_eq!(q2[2][0], q(1, 1));
        assert!(q2[2].iter().skip(1).all(|c| c.is_zero()));
    }

    #[test]
    fn structural_invariants() {
        for l in 0..=DEFAULT_MAX_ORDER {
            let c = q_polynomial(l).unwrap().x_coefficients();
            assert_eq!(c.len(), l + 1);
            // monic
            assert_eq!(c[l][0], Q::one());
            assert!(c[l].iter().skip(1).all(|v| v.is_zero()));
            // q(0) = (−1)^ℓ
            let sign = if l % 2 == 0 { Q::one() } else { -Q::one() };
            assert_eq!(c[0][0], sign);
            assert!(c[0].iter().skip(1).all(|v| v.is_zero()));
            // coefficient of x^k has ℏ-degree at most ℓ − k
            for (k, row) in c.iter().enumerate() {
                for (d, v) in row.iter().enumerate() {
                    if d > l - k {
                        assert!(v.is_zero(), "ℓ = {l}, k = {k}, ℏ^{d}");
                    }
                }
            }
        }
        assert!(QPolynomial::build(HARD_MAX_ORDER).unwrap().max_coefficient().is_finite());
    }

    #[test]
    fn order_limits() {
        assert!(matches!(q_polynomial(9), Err(SpectralError::OrderTooLarge(9))));
        assert!(matches!(j_integral(0.1, 9), Err(SpectralError::OrderTooLarge(9))));
        assert!(AngularIntegralFamily::new(0.1, 17).is_err());
    }

    #[test]
    fn f_values() {
        let h = 0.1;
        assert_relative_eq!(angular_f(h, 0.0), TAU * (-1.0 / h).exp(), max_relative = 1e-14);
        let lam = 1.0 / (h * h);
        let want = TAU * bessel_i_scaled(0, 2.0 / h);
        assert_relative_eq!(angular_f(h, lam), want, max_relative = 1e-13);
        for rho in [0.3, 12.0, 95.0, 230.0] {
            assert_relative_eq!(angular_f(h, rho), angular_f_bessel(h, rho), max_relative = 1e-12);
            assert!(angular_f(h, rho) > 0.0);
        }
    }

    #[test]
    fn j_zero_identity() {
        for h in [1e-3, 3e-3, 0.01, 0.1, 0.5, 1.0] {
            let j0 = j_integral(h, 0).unwrap();
            assert_relative_eq!(j0, TAU * bessel_i_scaled(0, 2.0 / h), max_relative = 1e-10);
        }
        let j0 = j_integral(1e-3, 0).unwrap();
        assert!((j0 / (std::f64::consts::PI * 1e-3).sqrt() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn j_values_frozen() {
        let fam = AngularIntegralFamily::new(0.1, 6).unwrap();
        // ℏ^{−ℓ}F^{(ℓ)}(λ) from the Bessel form, 50-digit arithmetic.
        let want = [
            0.564_106_336_508_739_67,
            -0.014_288_526_999_907_928,
            -0.026_404_726_951_067_318,
            0.005_966_323_741_446_511_7,
            0.002_337_524_270_188_267_6,
            -0.001_865_066_782_144_205_1,
            0.000_172_365_615_612_467_18,
        ];
        for (l, w) in want.iter().enumerate() {
            assert_relative_eq!(fam.j(l).unwrap(), *w, max_relative = 1e-10);
        }
    }
}
