//! Dilation geometry of a profile, computed from its norm quadruple.
//!
//! Under `(s * u)(x) = e^{Ns/2} u(e^s x)` the four norms scale by
//! `(e^{4s}, e^{2s}, e^{2 p g s}, 1)`, so the fiber map and its critical
//! points depend on the profile only through these numbers.

use std::fmt;

use crate::analytic::{GnConstant, ProblemParams};
use crate::error::{Error, Result};
use crate::roots::{bisect, scan_brackets};
use crate::scalar::{lit, Scalar};

const SCAN_POINTS: usize = 4096;
const WINDOW: f64 = 40.0;
const ROOT_TOL: f64 = 1e-12;
/// Relative slack on the interpolation inequality for quadruples built
/// from floating-point quadratures.
const INTERP_SLACK: f64 = 1e-10;

/// `(|Du|^2, |grad u|^2, |u|_p^p, |u|_2^2)` with `D` the Laplacian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormQuadruple<T> {
    pub dd: T,
    pub gg: T,
    pub pp: T,
    pub mm: T,
}

impl<T: Scalar> NormQuadruple<T> {
    /// Validated constructor; rejects quadruples violating `gg <= sqrt(mm dd)`.
    pub fn new(dd: T, gg: T, pp: T, mm: T) -> Result<Self> {
        let all_finite = dd.is_finite() && gg.is_finite() && pp.is_finite() && mm.is_finite();
        if !all_finite || dd < T::zero() || gg < T::zero() || pp < T::zero() || !(mm > T::zero()) {
            return Err(Error::InvalidQuadruple(format!(
                "({dd}, {gg}, {pp}, {mm}) needs finite nonnegative norms and positive mass"
            )));
        }
        if gg > (mm * dd).sqrt() * (T::one() + lit(INTERP_SLACK)) {
            return Err(Error::InvalidQuadruple(format!(
                "interpolation inequality violated: gg = {gg} > sqrt(mm dd) = {}",
                (mm * dd).sqrt()
            )));
        }
        Ok(NormQuadruple { dd, gg, pp, mm })
    }

    /// Quadruple of `s * u`; the mass is unchanged.
    pub fn scaled(&self, s: T, pg: T) -> Self {
        let two = lit::<T>(2.0);
        NormQuadruple {
            dd: (lit::<T>(4.0) * s).exp() * self.dd,
            gg: (two * s).exp() * self.gg,
            pp: (two * pg * s).exp() * self.pp,
            mm: self.mm,
        }
    }

    /// Weinstein quotient `pp / (mm^{p(1-g)/2} dd^{pg/2})`, invariant under dilation and scaling.
    pub fn weinstein(&self, p: T, gamma: T) -> T {
        let half = lit::<T>(0.5);
        self.pp / (self.mm.powf(half * p * (T::one() - gamma)) * self.dd.powf(half * p * gamma))
    }

    /// Whether the quadruple respects the Gagliardo-Nirenberg inequality with relative `slack`.
    pub fn gn_consistent(&self, gn: &GnConstant<T>, p: T, gamma: T, slack: T) -> bool {
        self.weinstein(p, gamma) <= gn.pow_p(p) * (T::one() + slack)
    }
}

/// `E = dd/2 - mu gg/2 - pp/p`.
pub fn energy<T: Scalar>(q: &NormQuadruple<T>, params: &ProblemParams<T>) -> T {
    let half = lit::<T>(0.5);
    half * q.dd - half * params.mu * q.gg - q.pp / params.p
}

/// `P = 2 dd - mu gg - 2 g pp`.
pub fn pohozaev<T: Scalar>(q: &NormQuadruple<T>, params: &ProblemParams<T>) -> T {
    let two = lit::<T>(2.0);
    two * q.dd - params.mu * q.gg - two * params.gamma() * q.pp
}

pub fn fiber_value<T: Scalar>(q: &NormQuadruple<T>, params: &ProblemParams<T>, s: T) -> T {
    energy(&q.scaled(s, params.pg()), params)
}

/// `Psi'(s)`, which equals the Pohozaev functional of the dilated profile.
pub fn fiber_deriv<T: Scalar>(q: &NormQuadruple<T>, params: &ProblemParams<T>, s: T) -> T {
    pohozaev(&q.scaled(s, params.pg()), params)
}

pub fn fiber_second<T: Scalar>(q: &NormQuadruple<T>, params: &ProblemParams<T>, s: T) -> T {
    let qs = q.scaled(s, params.pg());
    let g = params.gamma();
    lit::<T>(8.0) * qs.dd
        - lit::<T>(2.0) * params.mu * qs.gg
        - lit::<T>(4.0) * params.p * g * g * qs.pp
}

/// Position of a profile relative to the Pohozaev manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManifoldClass {
    Pplus,
    Pzero,
    Pminus,
    OffManifold,
}

impl fmt::Display for ManifoldClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ManifoldClass::Pplus => "Pplus",
            ManifoldClass::Pzero => "Pzero",
            ManifoldClass::Pminus => "Pminus",
            ManifoldClass::OffManifold => "OffManifold",
        };
        f.write_str(s)
    }
}

/// Relative width of the band around `Psi''(0) = 0` classified as `Pzero`.
pub const PZERO_BAND: f64 = 1e-9;

/// Classifies by the sign of `Psi''(0)` once `|P| <= tol dd`.
pub fn classify<T: Scalar>(
    q: &NormQuadruple<T>,
    params: &ProblemParams<T>,
    tol: T,
) -> ManifoldClass {
    if pohozaev(q, params).abs() > tol * q.dd {
        return ManifoldClass::OffManifold;
    }
    let second = fiber_second(q, params, T::zero());
    let g = params.gamma();
    let size = lit::<T>(8.0) * q.dd
        + lit::<T>(2.0) * params.mu * q.gg
        + lit::<T>(4.0) * params.p * g * g * q.pp;
    if second.abs() <= lit::<T>(PZERO_BAND) * size {
        ManifoldClass::Pzero
    } else if second > T::zero() {
        ManifoldClass::Pplus
    } else {
        ManifoldClass::Pminus
    }
}

/// Critical points and zeros of the fiber map.
///
/// For `mu = 0` only the maximum `t_u` and the zero `d_u` exist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberGeometry<T> {
    pub s_u: Option<T>,
    pub t_u: T,
    pub c_u: Option<T>,
    pub d_u: T,
    pub class_at_zero: ManifoldClass,
}

/// `e^{-4s} Psi'(s)` and `e^{-4s} Psi(s)`: same signs and zeros as
/// `Psi'` and `Psi`, without the overflow of `e^{4s} dd` at large `|s|`.
fn normalized<T: Scalar>(
    q: &NormQuadruple<T>,
    params: &ProblemParams<T>,
) -> (impl Fn(T) -> T + Copy, impl Fn(T) -> T + Copy) {
    let two = lit::<T>(2.0);
    let (dd, gg, pp) = (q.dd, q.gg, q.pp);
    let (mu, p, g) = (params.mu, params.p, params.gamma());
    let rate = two * params.pg() - lit(4.0);
    let deriv = move |s: T| two * dd - mu * gg * (-two * s).exp() - two * g * pp * (rate * s).exp();
    let value = move |s: T| dd / two - mu * gg * (-two * s).exp() / two - pp * (rate * s).exp() / p;
    (deriv, value)
}

/// Scan interval and point count for the critical points of `Psi`.
///
/// Starts from `[-WINDOW, WINDOW]` and widens to the a priori bounds
/// `s_u > ln(mu gg / (2 dd)) / 2` and `t_u < d_u < ln(p dd / (2 g pp)) / (2 p g - 4)`
/// (`p / 2` dominates `1 / g` since `p g > 2`). The point count keeps the
/// base resolution.
fn scan_window<T: Scalar>(q: &NormQuadruple<T>, params: &ProblemParams<T>) -> (T, T, usize) {
    let two = lit::<T>(2.0);
    let w = lit::<T>(WINDOW);
    let rate = two * params.pg() - lit(4.0);
    // Keep `e^{-2s}` and `e^{rate s}` finite.
    let room = T::max_value().ln() * lit(0.9);
    let mut lo = -w;
    if q.gg > T::zero() {
        lo = lo.min((params.mu * q.gg / (two * q.dd)).ln() / two - T::one());
    }
    let hi = w.max((params.p * q.dd / (two * params.gamma() * q.pp)).ln() / rate + T::one());
    let (lo, hi) = (lo.max(-room / two), hi.min(room / rate));
    let cells = ((hi - lo) / (two * w))
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .max(1);
    (lo, hi, SCAN_POINTS * cells)
}

pub fn fiber_geometry<T: Scalar>(
    q: &NormQuadruple<T>,
    params: &ProblemParams<T>,
) -> Result<FiberGeometry<T>> {
    let pg = params.pg();
    let two = lit::<T>(2.0);
    let class_at_zero = classify(q, params, lit(1e-8));
    if !(q.pp > T::zero()) || !(q.dd > T::zero()) {
        return Err(Error::InvalidQuadruple(
            "fiber geometry needs dd > 0 and pp > 0".into(),
        ));
    }
    if params.mu == T::zero() {
        let g = params.gamma();
        let t_u = (q.dd / (g * q.pp)).ln() / (two * pg - lit(4.0));
        let d_u = (params.p * q.dd / (two * q.pp)).ln() / (two * pg - lit(4.0));
        return Ok(FiberGeometry {
            s_u: None,
            t_u,
            c_u: None,
            d_u,
            class_at_zero,
        });
    }
    let (lo, hi, points) = scan_window(q, params);
    let (dpsi, psi) = normalized(q, params);
    let br = scan_brackets(dpsi, lo, hi, points, false);
    if br.len() != 2 {
        return Err(Error::GeometryNotGuaranteed {
            found: br.len(),
            expected: 2,
        });
    }
    let tol = lit::<T>(ROOT_TOL);
    let s_u = bisect(dpsi, br[0].0, br[0].1, tol);
    let t_u = bisect(dpsi, br[1].0, br[1].1, tol);
    if !(psi(s_u) < T::zero()) || !(psi(t_u) > T::zero()) || !(psi(hi) < T::zero()) {
        return Err(Error::Hypothesis(
            "fiber map lacks the negative-minimum / positive-maximum structure".into(),
        ));
    }
    let c_u = bisect(psi, s_u, t_u, tol);
    let d_u = bisect(psi, t_u, hi, tol);
    Ok(FiberGeometry {
        s_u: Some(s_u),
        t_u,
        c_u: Some(c_u),
        d_u,
        class_at_zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(mu: f64) -> ProblemParams<f64> {
        ProblemParams::new(5, 3.8, 2.0, mu).unwrap()
    }

    #[test]
    fn energy_definition_cases() {
        let pr = params(0.0);
        let q = NormQuadruple::new(2.0, 1.0, 3.8, 4.0).unwrap();
        assert!(energy(&q, &pr).abs() < 1e-15);
        let pm = params(0.7);
        assert!((energy(&q, &pm) - energy(&q, &pr) + 0.35 * q.gg).abs() < 1e-15);
    }

    #[test]
    fn pohozaev_vanishes_on_limit_identity() {
        let pr = params(0.0);
        let g = pr.gamma();
        let q = NormQuadruple::new(g * 5.0, 0.3, 5.0, 1.0).unwrap();
        assert!(pohozaev(&q, &pr).abs() < 1e-14);
        assert_eq!(fiber_geometry(&q, &pr).unwrap().t_u, 0.0);
    }

    #[test]
    fn rejects_interpolation_violation() {
        assert!(NormQuadruple::new(1.0, 2.0, 1.0, 1.0).is_err());
        assert!(NormQuadruple::new(1.0, 0.5, 1.0, 0.0).is_err());
        assert!(NormQuadruple::new(f64::NAN, 0.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn fiber_at_origin_is_energy() {
        let pr = params(1.0);
        let q = NormQuadruple::new(3.0, 1.0, 2.0, 4.0).unwrap();
        assert_eq!(fiber_value(&q, &pr, 0.0), energy(&q, &pr));
        assert_eq!(fiber_deriv(&q, &pr, 0.0), pohozaev(&q, &pr));
    }

    #[test]
    fn fiber_tails() {
        let pr = params(1.0);
        let q = NormQuadruple::new(3.0, 1.0, 2.0, 4.0).unwrap();
        let left = fiber_value(&q, &pr, -30.0);
        assert!(left < 0.0 && left > -1e-20);
        assert!(fiber_value(&q, &pr, 30.0) < -1e20);
    }

    #[test]
    fn limit_closed_form() {
        let pr = params(0.0);
        let q = NormQuadruple::new(7.0, 1.0, 0.3, 4.0).unwrap();
        let geo = fiber_geometry(&q, &pr).unwrap();
        let scale = q.scaled(geo.t_u, pr.pg()).dd;
        assert!(fiber_deriv(&q, &pr, geo.t_u).abs() < 1e-12 * scale);
        assert!(fiber_value(&q, &pr, geo.d_u).abs() < 1e-12 * q.scaled(geo.d_u, pr.pg()).dd);
        assert!(geo.s_u.is_none());
    }

    #[test]
    fn f32_geometry_matches_f64() {
        let p64 = ProblemParams::new(5, 3.8f64, 1.0, 0.1).unwrap();
        let p32 = ProblemParams::new(5, 3.8f32, 1.0, 0.1).unwrap();
        let q64 = NormQuadruple::new(1.0, 0.5, 0.02, 1.0).unwrap();
        let q32 = NormQuadruple::new(1.0f32, 0.5, 0.02, 1.0).unwrap();
        let g64 = fiber_geometry(&q64, &p64).unwrap();
        let g32 = fiber_geometry(&q32, &p32).unwrap();
        assert!((g64.t_u - g32.t_u as f64).abs() < 1e-4);
        assert!((g64.s_u.unwrap() - g32.s_u.unwrap() as f64).abs() < 1e-4);
    }
}
