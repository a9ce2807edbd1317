//! Bracketing helpers shared by the landscape and fiber layers.

use crate::scalar::{count, lit, Scalar};

/// Sign-change brackets of `f` on a coarse grid of `n` points.
///
/// With `log` the grid is geometric, which needs `0 < lo`.
pub fn scan_brackets<T: Scalar>(
    f: impl Fn(T) -> T,
    lo: T,
    hi: T,
    n: usize,
    log: bool,
) -> Vec<(T, T)> {
    let node = |i: usize| {
        let w = count::<T>(i) / count::<T>(n - 1);
        if log {
            (lo.ln() + w * (hi.ln() - lo.ln())).exp()
        } else {
            lo + w * (hi - lo)
        }
    };
    let mut out = Vec::new();
    let mut x0 = node(0);
    let mut f0 = f(x0);
    for i in 1..n {
        let x1 = node(i);
        let f1 = f(x1);
        if f0 == T::zero() {
            // Exact hits count once, bracketed by their neighbours.
            if i >= 2 {
                out.push((node(i - 2), x1));
            }
        } else if f0 * f1 < T::zero() {
            out.push((x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    out
}

/// Bisection on a sign-changing bracket down to absolute width `tol`
/// or the floating-point resolution of the bracket, whichever is coarser.
pub fn bisect<T: Scalar>(f: impl Fn(T) -> T, mut a: T, mut b: T, tol: T) -> T {
    let mut fa = f(a);
    let half = lit::<T>(0.5);
    for _ in 0..400 {
        let m = a + half * (b - a);
        if (b - a).abs() <= tol || m <= a.min(b) || m >= a.max(b) {
            return m;
        }
        let fm = f(m);
        if fm == T::zero() {
            return m;
        }
        if fa * fm < T::zero() {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    a + half * (b - a)
}
