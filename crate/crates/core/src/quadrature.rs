//! Gauss–Legendre rules, adaptive composite integration and periodic trapezoid sums.

use std::collections::HashMap;
use std::ops::{Add, Mul, Sub};
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("quadrature not converged: error estimate {error:e} after {nodes} nodes (value magnitude {magnitude:e})")]
    NotConverged { error: f64, nodes: usize, magnitude: f64 },
    #[error("invalid quadrature setup: {0}")]
    Invalid(&'static str),
}

/// Values that can be accumulated by a quadrature rule.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Two complex values integrated on shared nodes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pair(pub Complex64, pub Complex64);

impl Add for Pair {
    type Output = Pair;
    fn add(self, o: Pair) -> Pair {
        Pair(self.0 + o.0, self.1 + o.1)
    }
}

impl Sub for Pair {
    type Output = Pair;
    fn sub(self, o: Pair) -> Pair {
        Pair(self.0 - o.0, self.1 - o.1)
    }
}

impl Mul<f64> for Pair {
    type Output = Pair;
    fn mul(self, s: f64) -> Pair {
        Pair(self.0 * s, self.1 * s)
    }
}

impl QuadValue for Pair {
    fn zero() -> Self {
        Pair::default()
    }
    /// Componentwise maximum, so convergence is judged on each component.
    fn magnitude(&self) -> f64 {
        self.0.norm().max(self.1.norm())
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<T: QuadValue, F: FnMut(f64) -> T>(&self, a: f64, b: f64, mut f: F) -> T {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(c + h * x) * *w;
        }
        acc * h
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared, lazily built rule of order `n`.
pub fn gauss_legendre(n: usize) -> &'static GaussLegendre {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static GaussLegendre>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("quadrature cache poisoned");
    *map.entry(n).or_insert_with(|| Box::leak(Box::new(GaussLegendre::new(n))))
}

/// Tolerances for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveSpec {
    /// Gauss–Legendre order used on every panel.
    pub order: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_nodes: usize,
}

impl Default for AdaptiveSpec {
    fn default() -> Self {
        Self { order: 16, rel_tol: 1e-9, abs_tol: 0.0, max_nodes: 1 << 16 }
    }
}

impl AdaptiveSpec {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub nodes: usize,
}

struct Panel<T> {
    a: f64,
    b: f64,
    left: T,
    right: T,
    error: f64,
}

/// Adaptive composite Gauss–Legendre integration over `[breaks[0], breaks[last]]`.
///
/// Each panel is compared against its two halves; the panel with the largest
/// discrepancy is split until the summed discrepancy meets the tolerance.
pub fn integrate_adaptive<T, F>(mut f: F, breaks: &[f64], spec: &AdaptiveSpec) -> Result<QuadResult<T>, QuadratureError>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    if breaks.len() < 2 {
        return Err(QuadratureError::Invalid("need at least two breakpoints"));
    }
    if spec.order < 2 {
        return Err(QuadratureError::Invalid("panel order must be at least 2"));
    }
    let rule = gauss_legendre(spec.order);
    let m = rule.order();
    let mut nodes = 0usize;
    let mut panels: Vec<Panel<T>> = Vec::new();
    let new_panel = |a: f64, b: f64, whole: T, f: &mut F, nodes: &mut usize| {
        let mid = 0.5 * (a + b);
        let left = rule.integrate(a, mid, &mut *f);
        let right = rule.integrate(mid, b, &mut *f);
        *nodes += 2 * m;
        let error = (left + right - whole).magnitude();
        Panel { a, b, left, right, error }
    };
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let whole = rule.integrate(a, b, &mut f);
        nodes += m;
        panels.push(new_panel(a, b, whole, &mut f, &mut nodes));
    }
    if panels.is_empty() {
        return Ok(QuadResult { value: T::zero(), error: 0.0, nodes: 0 });
    }
    loop {
        let mut total = T::zero();
        let mut err = 0.0;
        let mut worst = 0;
        for (i, p) in panels.iter().enumerate() {
            total = total + p.left + p.right;
            err += p.error;
            if p.error > panels[worst].error {
                worst = i;
            }
        }
        let target = (spec.rel_tol * total.magnitude()).max(spec.abs_tol);
        if err <= target {
            return Ok(QuadResult { value: total, error: err, nodes });
        }
        if nodes + 4 * m > spec.max_nodes {
            return Err(QuadratureError::NotConverged { error: err, nodes, magnitude: total.magnitude() });
        }
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Panel cannot be split further in double precision.
            return Err(QuadratureError::NotConverged { error: err, nodes, magnitude: total.magnitude() });
        }
        panels.push(new_panel(p.a, mid, p.left, &mut f, &mut nodes));
        panels.push(new_panel(mid, p.b, p.right, &mut f, &mut nodes));
    }
}

/// `n`-point trapezoid rule for a 2π-periodic integrand over one period.
pub fn periodic_trapezoid<F: FnMut(f64) -> f64>(n: usize, mut f: F) -> f64 {
    let h = std::f64::consts::TAU / n as f64;
    (0..n).map(|k| f(k as f64 * h)).sum::<f64>() * h
}
