//! Modified Bessel functions of the first kind, integer order.

use std::f64::consts::PI;

/// Threshold above which the large-argument expansion is used.
fn asymptotic_threshold(n: u32) -> f64 {
    let nf = n as f64;
    (25.0f64).max(2.0 * nf * nf + 10.0)
}

/// Exponentially scaled `e^{-x} I_n(x)` for `x ≥ 0`.
pub fn bessel_i_scaled(n: u32, x: f64) -> f64 {
    assert!(x >= 0.0 && x.is_finite(), "bessel argument must be finite and non-negative");
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x >= asymptotic_threshold(n) {
        asymptotic_scaled(n, x)
    } else {
        series_scaled(n, x)
    }
}

/// `I_n(x)`; overflows to infinity for `x` beyond about 713.
pub fn bessel_i(n: u32, x: f64) -> f64 {
    let s = bessel_i_scaled(n, x);
    if x < 700.0 {
        s * x.exp()
    } else {
        (s.ln() + x).exp()
    }
}

/// Power series summed outward from its largest term, in log scale.
fn series_scaled(n: u32, x: f64) -> f64 {
    let nf = n as f64;
    let q = 0.25 * x * x;
    // Term ratio t_{k+1}/t_k = q / ((k+1)(k+n+1)); the peak is where it crosses 1.
    let kstar = (0.5 * (-(nf + 2.0) + (nf * nf + 4.0 * q).sqrt())).max(0.0).ceil() as u64;
    let ln_factorial_n: f64 = (1..=n).map(|j| (j as f64).ln()).sum();
    let mut ln_peak = nf * (0.5 * x).ln() - ln_factorial_n;
    for k in 0..kstar {
        let kf = k as f64;
        ln_peak += q.ln() - ((kf + 1.0) * (kf + nf + 1.0)).ln();
    }
    let mut sum = 1.0;
    let mut t = 1.0;
    let mut k = kstar;
    loop {
        let kf = k as f64;
        t *= q / ((kf + 1.0) * (kf + nf + 1.0));
        sum += t;
        k += 1;
        if t < 1e-18 * sum {
            break;
        }
    }
    let mut t = 1.0;
    let mut k = kstar;
    while k > 0 {
        let kf = k as f64;
        t *= (kf * (kf + nf)) / q;
        sum += t;
        k -= 1;
        if t < 1e-18 * sum {
            break;
        }
    }
    (ln_peak - x).exp() * sum
}

fn asymptotic_scaled(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n as f64) * (n as f64);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= -(mu - odd * odd) / (8.0 * k as f64 * x);
        if term.abs() >= prev {
            break;
        }
        sum += term;
        prev = term.abs();
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}
