use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::RunnerError;
use crate::exec::Execution;
use crate::gaussian_wavepacket::WindowKind;

/// Launch direction: an explicit vector or `"auto"` for the shortest periodic direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DirectionSpec {
    Vector([f64; 2]),
    Keyword(String),
}

impl DirectionSpec {
    pub fn is_auto(&self) -> bool {
        matches!(self, Self::Keyword(k) if k == "auto")
    }
}

fn default_polygon() -> usize {
    0
}

fn default_c() -> f64 {
    1.0
}

fn default_window() -> WindowKind {
    WindowKind::Bump
}

fn default_defect_ppw() -> f64 {
    16.0
}

fn default_momentum_ppw() -> f64 {
    8.0
}

fn default_true() -> bool {
    true
}

fn default_localization_factor() -> f64 {
    5.0
}

/// Flat experiment description, read from TOML and echoed into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Surface JSON file; relative paths are taken from the config file's directory.
    pub surface: String,
    #[serde(default = "default_polygon")]
    pub polygon: usize,
    pub x0: [f64; 2],
    pub xi0: DirectionSpec,
    /// Length bound for `xi0 = "auto"`; defaults to `4·√area`.
    #[serde(default)]
    pub auto_length_bound: Option<f64>,
    pub eps: f64,
    /// Strictly decreasing.
    pub hbar: Vec<f64>,
    /// Exponent of `c·ℏ^a`; defaults to `3/4 + 2ε`.
    #[serde(default)]
    pub t_exponent: Option<f64>,
    #[serde(default = "default_c")]
    pub t_constant: f64,
    #[serde(default = "default_window")]
    pub window: WindowKind,
    /// Samples per wavelength `2πℏ` for the norm and defect grids.
    #[serde(default = "default_defect_ppw")]
    pub points_per_wavelength: f64,
    /// Samples per wavelength for the momentum DFT.
    #[serde(default = "default_momentum_ppw")]
    pub momentum_points_per_wavelength: f64,
    #[serde(default = "default_true")]
    pub momentum: bool,
    /// Radius of the localization ball in units of `√ℏ`.
    #[serde(default = "default_localization_factor")]
    pub localization_factor: f64,
    pub output_dir: String,
    #[serde(default)]
    pub execution: Execution,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, RunnerError> {
        let c: Self = toml::from_str(text).map_err(|e| RunnerError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Reads a TOML file and resolves `surface` and `output_dir` against its directory.
    pub fn from_path(path: &Path) -> Result<Self, RunnerError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunnerError::Io(format!("{}: {e}", path.display())))?;
        let mut c = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        c.surface = resolve(base, &c.surface);
        c.output_dir = resolve(base, &c.output_dir);
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), RunnerError> {
        let bad = |m: String| Err(RunnerError::Config(m));
        if self.hbar.is_empty() {
            return bad("hbar grid is empty".into());
        }
        if let Some(h) = self.hbar.iter().find(|h| !(**h > 0.0 && **h < 1.0)) {
            return bad(format!("hbar values must lie in (0, 1), got {h}"));
        }
        if self.hbar.windows(2).any(|w| w[1] >= w[0]) {
            return bad("hbar grid must be strictly decreasing".into());
        }
        if !(self.eps >= 0.0 && self.eps < 0.125) {
            return bad(format!("eps must lie in [0, 1/8), got {}", self.eps));
        }
        if !(self.t_constant > 0.0 && self.t_constant.is_finite()) {
            return bad(format!("t_constant must be positive, got {}", self.t_constant));
        }
        if self.t_exponent.is_some_and(|a| !a.is_finite()) {
            return bad("t_exponent must be finite".into());
        }
        if let DirectionSpec::Keyword(k) = &self.xi0 {
            if k != "auto" {
                return bad(format!("xi0 must be a vector or \"auto\", got {k:?}"));
            }
        }
        if let DirectionSpec::Vector(v) = self.xi0 {
            if !(v[0].hypot(v[1]) > 0.0) {
                return bad("xi0 must be nonzero".into());
            }
        }
        if self.auto_length_bound.is_some_and(|b| !(b > 0.0)) {
            return bad("auto_length_bound must be positive".into());
        }
        for (name, v) in [
            ("points_per_wavelength", self.points_per_wavelength),
            ("momentum_points_per_wavelength", self.momentum_points_per_wavelength),
            ("localization_factor", self.localization_factor),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !self.x0.iter().all(|x| x.is_finite()) {
            return bad("x0 must be finite".into());
        }
        Ok(())
    }

    pub fn t_exponent(&self) -> f64 {
        self.t_exponent.unwrap_or(0.75 + 2.0 * self.eps)
    }

    /// Canonical JSON mirror of the flat keys.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON mirror, hex encoded.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(&self.to_json_value()).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

fn resolve(base: &Path, p: &str) -> String {
    let path = PathBuf::from(p);
    if path.is_absolute() {
        p.to_string()
    } else {
        base.join(path).to_string_lossy().into_owned()
    }
}
