//! `psi(r) = r^{-nu} J_nu(r)` with `nu = (N - 2) / 2`, the radial solution
//! of `(D + 1) psi = 0` in `R^N` that is regular at the origin.

use std::f64::consts::PI;

/// Below this argument the power series is used.
const SERIES_LIMIT: f64 = 12.0;

/// `Gamma(x)` for `x` a positive multiple of `1/2`.
fn gamma_half(x: f64) -> f64 {
    let twice = (2.0 * x).round() as i64;
    let (mut g, mut y) = if twice % 2 == 0 {
        (1.0, 1.0)
    } else {
        (PI.sqrt(), 0.5)
    };
    while y < x - 0.25 {
        g *= y;
        y += 1.0;
    }
    g
}

/// Power series of `x^{-nu} J_nu(x)`.
fn series(nu: f64, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0 / (2f64.powf(nu) * gamma_half(nu + 1.0));
    let mut sum = term;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    sum
}

/// Hankel's asymptotic expansion of `J_nu(x)`, truncated at its smallest term.
fn hankel(nu: f64, x: f64) -> f64 {
    let mu4 = 4.0 * nu * nu;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            term *= (mu4 - odd * odd) / (k as f64 * 8.0 * x);
        }
        if term.abs() > last {
            break;
        }
        last = term.abs();
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term == 0.0 {
            break;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// `J_nu(x)` for `nu` a non-negative multiple of `1/2` and `x >= 12`, by
/// upward recurrence from the two lowest orders of the same parity.
fn large_argument(nu: f64, x: f64) -> f64 {
    let base = nu.fract();
    let mut prev = hankel(base, x);
    if nu == base {
        return prev;
    }
    let mut cur = hankel(base + 1.0, x);
    let mut order = base + 1.0;
    while order < nu - 0.25 {
        let next = 2.0 * order / x * cur - prev;
        prev = cur;
        cur = next;
        order += 1.0;
    }
    cur
}

/// `r^{-nu} J_nu(r)` for `nu` a non-negative multiple of `1/2`; the value at
/// `r = 0` is the series limit `1 / (2^nu Gamma(nu + 1))`.
pub fn bessel_scaled(nu: f64, r: f64) -> f64 {
    let x = r.abs();
    if x < SERIES_LIMIT || x < nu {
        series(nu, x)
    } else {
        large_argument(nu, x) * x.powf(-nu)
    }
}

/// `psi(r)` in dimension `n >= 2`.
pub fn bessel_psi(n: usize, r: f64) -> f64 {
    bessel_scaled(0.5 * (n as f64 - 2.0), r)
}

/// `psi'(r) = -r psi_{N+2}(r)`.
pub fn bessel_psi_slope(n: usize, r: f64) -> f64 {
    -r * bessel_psi(n + 2, r)
}
