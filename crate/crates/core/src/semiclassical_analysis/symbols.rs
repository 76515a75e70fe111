use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{AnalysisError, MomentumDensity};
use crate::experiment_runner::fit_power_law;
use crate::surface_geometry::{DihedralUnfolding, Vec2};

/// Symbol `a(ξ)` depending on momentum only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentumSymbol {
    Constant(f64),
    Xi1,
    Xi2,
    NormSquared,
    /// `ξ·d`.
    Dot([f64; 2]),
    /// `e^{−|ξ−c|²}`.
    Gaussian([f64; 2]),
    /// `Re (ξ₁ + iξ₂)^k = |ξ|^k cos kθ`.
    CosHarmonic(u32),
    /// `Im (ξ₁ + iξ₂)^k = |ξ|^k sin kθ`.
    SinHarmonic(u32),
    /// `Σ cᵢaᵢ`.
    Combination(Vec<(f64, MomentumSymbol)>),
}

impl MomentumSymbol {
    pub fn eval(&self, xi: Vec2) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Xi1 => xi.x,
            Self::Xi2 => xi.y,
            Self::NormSquared => xi.norm_squared(),
            Self::Dot(d) => xi.x * d[0] + xi.y * d[1],
            Self::Gaussian(c) => (-(xi - Vec2::new(c[0], c[1])).norm_squared()).exp(),
            Self::CosHarmonic(k) => Complex64::new(xi.x, xi.y).powu(*k).re,
            Self::SinHarmonic(k) => Complex64::new(xi.x, xi.y).powu(*k).im,
            Self::Combination(terms) => terms.iter().map(|(c, a)| c * a.eval(xi)).sum(),
        }
    }

    /// Bound on `|∇a|` over `|ξ| ≤ radius`.
    pub fn gradient_bound(&self, radius: f64) -> f64 {
        match self {
            Self::Constant(_) => 0.0,
            Self::Xi1 | Self::Xi2 => 1.0,
            Self::NormSquared => 2.0 * radius,
            Self::Dot(d) => d[0].hypot(d[1]),
            Self::Gaussian(_) => (2.0f64).sqrt() * (-0.5f64).exp(),
            Self::CosHarmonic(k) | Self::SinHarmonic(k) => {
                if *k == 0 {
                    0.0
                } else {
                    *k as f64 * radius.powi(*k as i32 - 1)
                }
            }
            Self::Combination(terms) => terms.iter().map(|(c, a)| c.abs() * a.gradient_bound(radius)).sum(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Constant(c) => format!("const({c})"),
            Self::Xi1 => "xi1".into(),
            Self::Xi2 => "xi2".into(),
            Self::NormSquared => "norm_sq".into(),
            Self::Dot(d) => format!("dot({},{})", d[0], d[1]),
            Self::Gaussian(c) => format!("gauss({},{})", c[0], c[1]),
            Self::CosHarmonic(k) => format!("cos{k}"),
            Self::SinHarmonic(k) => format!("sin{k}"),
            Self::Combination(t) => format!("combo{}", t.len()),
        }
    }

    /// `{1, ξ₁, ξ₂, |ξ|², e^{−|ξ−ξ₀|²}, |ξ|^k cos kθ, |ξ|^k sin kθ (1 ≤ k ≤ 4)}`.
    pub fn suite(xi0: Vec2) -> Vec<MomentumSymbol> {
        let mut v = vec![Self::Constant(1.0), Self::Xi1, Self::Xi2, Self::NormSquared, Self::Gaussian([xi0.x, xi0.y])];
        for k in 1..=4 {
            v.push(Self::CosHarmonic(k));
            v.push(Self::SinHarmonic(k));
        }
        v
    }
}

/// `⟨Op_ℏ(a)ψ, ψ⟩/‖ψ‖² = ∫a dμ_ψ`.
pub fn weyl_matrix_element(a: &MomentumSymbol, density: &MomentumDensity) -> f64 {
    density.expectation(|xi| a.eval(xi))
}

/// `μ(B(center, radius))`.
pub fn localization_mass(density: &MomentumDensity, center: Vec2, radius: f64) -> f64 {
    density.points.iter().zip(&density.masses).filter(|(p, _)| (*p - center).norm() < radius).map(|(_, m)| m).sum()
}

/// Weighted point masses in the momentum plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiracComb {
    pub atoms: Vec<(Vec2, f64)>,
}

impl DiracComb {
    pub fn new(atoms: Vec<(Vec2, f64)>) -> Result<Self, AnalysisError> {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if atoms.is_empty() || (total - 1.0).abs() > 1e-12 || atoms.iter().any(|a| a.1 < 0.0) {
            return Err(AnalysisError::Invalid(format!("comb weights must be nonnegative and sum to 1, got {total}")));
        }
        Ok(Self { atoms })
    }

    pub fn single(xi0: Vec2) -> Self {
        Self { atoms: vec![(xi0, 1.0)] }
    }

    /// `(1/|D|)Σ_{g∈D} δ(ξ − gξ₀)`.
    pub fn dihedral(unfolding: &DihedralUnfolding, xi0: Vec2) -> Self {
        let w = 1.0 / unfolding.group_elements.len() as f64;
        Self { atoms: unfolding.group_elements.iter().map(|g| (g.apply_linear(xi0), w)).collect() }
    }

    /// `Σ wᵢa(ξᵢ)`.
    pub fn pair(&self, a: &MomentumSymbol) -> f64 {
        self.atoms.iter().map(|(x, w)| w * a.eval(*x)).sum()
    }

    /// Atoms merged when closer than `tol`, weights added.
    pub fn distinct_atoms(&self, tol: f64) -> Vec<(Vec2, f64)> {
        let mut out: Vec<(Vec2, f64)> = Vec::new();
        for &(x, w) in &self.atoms {
            match out.iter_mut().find(|(y, _)| (y - x).norm() < tol) {
                Some(slot) => slot.1 += w,
                None => out.push((x, w)),
            }
        }
        out
    }
}

/// `|∫a dμ_ℏ − Σ wᵢa(ξᵢ)|` per `ℏ` and symbol, with fitted decay rates in `ℏ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiracLimitTable {
    pub hbars: Vec<f64>,
    pub symbols: Vec<String>,
    /// `errors[i][s]` at `hbars[i]` for symbol `s`.
    pub errors: Vec<Vec<f64>>,
    /// Log–log slope of error against `ℏ`; `None` when some error is below `floor`.
    pub rates: Vec<Option<f64>>,
    pub floor: f64,
}

impl DiracLimitTable {
    /// Smallest ratio `error(ℏ_i)/error(ℏ_{i+1})` per symbol, rescaled to a halving of `ℏ`.
    ///
    /// `None` for symbols whose errors all sit below the floor.
    pub fn halving_factors(&self) -> Vec<Option<f64>> {
        (0..self.symbols.len())
            .map(|s| {
                if self.errors.iter().all(|row| row[s] <= self.floor) {
                    return None;
                }
                let mut worst = f64::INFINITY;
                for i in 0..self.hbars.len() - 1 {
                    let (e0, e1) = (self.errors[i][s], self.errors[i + 1][s]);
                    let steps = (self.hbars[i] / self.hbars[i + 1]).log2();
                    let f = if e1 <= self.floor { f64::INFINITY } else { (e0 / e1).powf(1.0 / steps) };
                    worst = worst.min(f);
                }
                Some(worst)
            })
            .collect()
    }

    /// Every symbol's error shrinks by at least `factor` per halving of `ℏ`, or stays below the floor.
    pub fn decreasing_by(&self, factor: f64) -> bool {
        self.halving_factors().iter().all(|f| f.is_none_or(|f| f >= factor))
    }
}

/// Default floor under which an error counts as exact.
pub const DIRAC_ERROR_FLOOR: f64 = 1e-10;

/// Errors of each density against the comb; `densities` are ordered by strictly decreasing `ℏ`.
pub fn dirac_limit_error(
    densities: &[MomentumDensity],
    comb: &DiracComb,
    symbols: &[MomentumSymbol],
) -> Result<DiracLimitTable, AnalysisError> {
    if densities.len() < 3 || symbols.len() < 2 {
        return Err(AnalysisError::Invalid(format!(
            "need at least 3 densities and 2 symbols, got {} and {}",
            densities.len(),
            symbols.len()
        )));
    }
    if densities.windows(2).any(|w| w[1].hbar >= w[0].hbar) {
        return Err(AnalysisError::Invalid("densities must be ordered by decreasing hbar".into()));
    }
    let floor = DIRAC_ERROR_FLOOR;
    let errors: Vec<Vec<f64>> = densities
        .iter()
        .map(|d| symbols.iter().map(|a| (weyl_matrix_element(a, d) - comb.pair(a)).abs()).collect())
        .collect();
    let hbars: Vec<f64> = densities.iter().map(|d| d.hbar).collect();
    let rates = (0..symbols.len())
        .map(|s| {
            let pts: Vec<(f64, f64)> = hbars.iter().zip(&errors).map(|(&h, row)| (h, row[s])).collect();
            if pts.iter().any(|p| p.1 <= floor) {
                None
            } else {
                fit_power_law(&pts).ok().map(|f| f.exponent)
            }
        })
        .collect();
    Ok(DiracLimitTable { hbars, symbols: symbols.iter().map(MomentumSymbol::name).collect(), errors, rates, floor })
}
