use serde::{Deserialize, Serialize};

use super::RunnerError;

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    /// `ln y` at `ln x = 0`.
    pub intercept: f64,
    pub residual_rms: f64,
    pub points: Vec<(f64, f64)>,
}

impl ScalingFit {
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.exponent * x.ln()).exp()
    }
}

/// Fits `y = C·x^p` by least squares in log–log coordinates.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<ScalingFit, RunnerError> {
    if points.len() < 3 {
        return Err(RunnerError::TooFewPoints(points.len()));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(RunnerError::NonPositiveData { x, y });
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(RunnerError::Invalid("abscissae are all equal".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss: f64 = logs.iter().map(|p| (p.1 - intercept - exponent * p.0).powi(2)).sum();
    Ok(ScalingFit { exponent, intercept, residual_rms: (ss / n).sqrt(), points: points.to_vec() })
}
