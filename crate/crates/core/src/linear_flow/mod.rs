//! Straight-line flow on translation surfaces: traces, cylinders, time budgets, lifted translates.

mod billiard;
mod budget;
mod cylinder;
mod search;
mod trace;
mod translates;

pub use billiard::billiard_trace;
pub use budget::{time_budget, time_budget_with_exponent, BudgetConstraint, TimeBudget};
pub use cylinder::{find_cylinder, find_cylinder_with_tol, Cylinder};
pub use search::{period_lattice, search_periodic_directions};
pub use trace::{first_return, trace_flow, FlowSegment, FlowTrace, Terminal};
pub use translates::{
    enumerate_translates, unroll_translates, verify_no_self_intersection, PhaseSpaceBox, SelfIntersectionReport,
    TranslateSet,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::surface_geometry::{GeometryError, Vec2};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("start point lies within the hit tolerance of cone point {0}")]
    StartAtSingularity(usize),
    #[error("orbit does not close within length {0}")]
    NotPeriodic(f64),
    #[error("orbit hits cone point {cone_point} at length {length}")]
    HitSingularity { cone_point: usize, length: f64 },
    #[error("longitudinal budget {distance} exceeds cylinder length {length}")]
    BudgetExceeded { distance: f64, length: f64 },
    #[error("time budget is not positive: {0}")]
    NonPositiveBudget(f64),
    #[error("invalid flow input: {0}")]
    Invalid(String),
    #[error("numerical failure while tracing: {0}")]
    Numerical(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Unit vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct UnitDirection(Vec2);

impl UnitDirection {
    pub fn new(v: Vec2) -> Result<Self, FlowError> {
        let n = v.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(FlowError::Invalid(format!("cannot normalize direction ({}, {})", v.x, v.y)));
        }
        Ok(Self(v / n))
    }

    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self(Vec2::new(c, s))
    }

    pub fn horizontal() -> Self {
        Self(Vec2::new(1.0, 0.0))
    }

    pub fn vector(&self) -> Vec2 {
        self.0
    }

    /// Angle in [0, 2π).
    pub fn angle(&self) -> f64 {
        let a = self.0.y.atan2(self.0.x);
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }

    /// Counterclockwise normal.
    pub fn perp(&self) -> Vec2 {
        Vec2::new(-self.0.y, self.0.x)
    }

    pub fn reversed(&self) -> Self {
        Self(-self.0)
    }

    pub fn rotated(&self, theta: f64) -> Self {
        Self::from_angle(self.angle() + theta)
    }
}

impl TryFrom<[f64; 2]> for UnitDirection {
    type Error = FlowError;
    fn try_from(a: [f64; 2]) -> Result<Self, FlowError> {
        UnitDirection::new(Vec2::new(a[0], a[1]))
    }
}

impl From<UnitDirection> for [f64; 2] {
    fn from(d: UnitDirection) -> Self {
        [d.0.x, d.0.y]
    }
}
