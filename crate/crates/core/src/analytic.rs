//! Closed-form layer: exponents, admissibility thresholds, landscape
//! functions, rescaling constants and multiplier bounds.

use crate::error::{Error, Result};
use crate::roots::{bisect, scan_brackets};
use crate::scalar::{count, lit, Scalar};

const SCAN_POINTS: usize = 2048;
const ROOT_TOL: f64 = 1e-12;

/// Upper Sobolev exponent `4*`, unbounded for `N <= 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CriticalExponent<T> {
    Finite(T),
    Unbounded,
}

impl<T: Scalar> CriticalExponent<T> {
    /// True when `x` lies strictly below the exponent.
    pub fn exceeds(&self, x: T) -> bool {
        match *self {
            CriticalExponent::Finite(v) => x < v,
            CriticalExponent::Unbounded => true,
        }
    }

    pub fn value(&self) -> T {
        match *self {
            CriticalExponent::Finite(v) => v,
            CriticalExponent::Unbounded => T::infinity(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents<T> {
    pub gamma_p: T,
    pub p_bar: T,
    pub p_star4: CriticalExponent<T>,
}

/// `gamma_p = N(p-2)/(4p)`, `p_bar = 2 + 8/N` and `4* = 2N/(N-4)`.
pub fn derive_exponents<T: Scalar>(n: usize, p: T) -> Result<Exponents<T>> {
    if n < 2 {
        return Err(Error::InvalidParams(format!(
            "dimension N = {n} must be >= 2"
        )));
    }
    if !(p > lit(2.0)) || !p.is_finite() {
        return Err(Error::InvalidParams(format!(
            "exponent p = {p} must be > 2"
        )));
    }
    let nn = count::<T>(n);
    let gamma_p = nn * (p - lit(2.0)) / (lit::<T>(4.0) * p);
    let p_bar = lit::<T>(2.0) + lit::<T>(8.0) / nn;
    let p_star4 = if n <= 4 {
        CriticalExponent::Unbounded
    } else {
        CriticalExponent::Finite(lit::<T>(2.0) * nn / (nn - lit(4.0)))
    };
    Ok(Exponents {
        gamma_p,
        p_bar,
        p_star4,
    })
}

/// Dimension, exponent, mass and dispersion of one problem instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams<T> {
    pub n: usize,
    pub p: T,
    pub a: T,
    pub mu: T,
    pub exps: Exponents<T>,
}

/// Which further hypotheses hold beyond the basic supercritical range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hypotheses {
    /// `N >= 5` and `p < min(4, 4*)`: existence of both states.
    pub existence: bool,
    /// `N < 8` and `p < min(2(N-2)/(N-4), 4)`: both states change sign.
    pub sign_changing: bool,
    /// `N >= 5` and `p < 4`: the Bessel witness applies.
    pub witness: bool,
}

impl<T: Scalar> ProblemParams<T> {
    pub fn new(n: usize, p: T, a: T, mu: T) -> Result<Self> {
        let exps = derive_exponents(n, p)?;
        if !(a > T::zero()) || !a.is_finite() {
            return Err(Error::InvalidParams(format!(
                "mass a = {a} must be positive"
            )));
        }
        if !(mu >= T::zero()) || !mu.is_finite() {
            return Err(Error::InvalidParams(format!(
                "dispersion mu = {mu} must be >= 0"
            )));
        }
        if !(p > exps.p_bar) || !exps.p_star4.exceeds(p) {
            return Err(Error::InvalidParams(format!(
                "p = {p} outside the supercritical range ({}, {})",
                exps.p_bar,
                exps.p_star4.value()
            )));
        }
        Ok(ProblemParams { n, p, a, mu, exps })
    }

    pub fn gamma(&self) -> T {
        self.exps.gamma_p
    }

    /// `p * gamma_p`, strictly above 2 in the supercritical range.
    pub fn pg(&self) -> T {
        self.p * self.exps.gamma_p
    }

    pub fn dim(&self) -> T {
        count(self.n)
    }

    pub fn with_mu(&self, mu: T) -> Result<Self> {
        Self::new(self.n, self.p, self.a, mu)
    }

    pub fn with_a(&self, a: T) -> Result<Self> {
        Self::new(self.n, self.p, a, self.mu)
    }

    pub fn hypotheses(&self) -> Hypotheses {
        let four = lit::<T>(4.0);
        let below4 = self.p < four && self.exps.p_star4.exceeds(self.p);
        let sign_cap = if self.n > 4 {
            let nn = self.dim();
            (lit::<T>(2.0) * (nn - lit(2.0)) / (nn - four)).min(four)
        } else {
            four
        };
        Hypotheses {
            existence: self.n >= 5 && below4,
            sign_changing: self.n >= 5 && self.n < 8 && below4 && self.p < sign_cap,
            witness: self.n >= 5 && self.p < four,
        }
    }
}

/// Where a Gagliardo-Nirenberg constant came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GnProvenance {
    UserSupplied,
    /// Numerical estimate with its relative change under grid halving.
    Estimated {
        refinement_delta: f64,
        nodes: usize,
    },
}

/// The constant `C` in `|u|_p^p <= C^p |u|_2^{p(1-g)} |Du|_2^{pg}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnConstant<T> {
    pub c_np: T,
    pub provenance: GnProvenance,
}

impl<T: Scalar> GnConstant<T> {
    pub fn user(c_np: T) -> Result<Self> {
        if !(c_np > T::zero()) || !c_np.is_finite() {
            return Err(Error::InvalidParams(format!(
                "GN constant {c_np} must be positive"
            )));
        }
        Ok(GnConstant {
            c_np,
            provenance: GnProvenance::UserSupplied,
        })
    }

    /// `C^p`.
    pub fn pow_p(&self, p: T) -> T {
        self.c_np.powf(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds<T> {
    pub c_tilde: T,
    pub c_upper: T,
    pub c_lower: T,
    /// `mu^{p g - 2} a^{p - 2}`.
    pub lhs: T,
    pub admissible_min_flag: bool,
}

impl<T: Scalar> Thresholds<T> {
    pub fn min(&self) -> T {
        self.c_tilde.min(self.c_upper).min(self.c_lower)
    }

    /// The weaker condition that only involves the convex-concave geometry.
    pub fn admissible_tilde(&self) -> bool {
        self.lhs < self.c_tilde
    }
}

/// `mu^{p g - 2} a^{p - 2}`, zero when `mu = 0`.
pub fn admissibility_lhs<T: Scalar>(params: &ProblemParams<T>) -> T {
    if params.mu == T::zero() {
        return T::zero();
    }
    params.mu.powf(params.pg() - lit(2.0)) * params.a.powf(params.p - lit(2.0))
}

pub fn thresholds<T: Scalar>(params: &ProblemParams<T>, gn: &GnConstant<T>) -> Thresholds<T> {
    let p = params.p;
    let g = params.gamma();
    let pg = params.pg();
    let two = lit::<T>(2.0);
    let base = p / (two * (pg - T::one()) * gn.pow_p(p));
    let c_tilde = base * ((pg - two) / (pg - T::one())).powf(pg - two);
    let c_upper = two.powf(pg - two) * base * ((T::one() - g) / g).powf((pg - two) / two);
    let c_lower = base * (two * (p - two) / (pg - T::one())).powf((pg - two) / two);
    let lhs = admissibility_lhs(params);
    let min = c_tilde.min(c_upper).min(c_lower);
    Thresholds {
        c_tilde,
        c_upper,
        c_lower,
        lhs,
        admissible_min_flag: lhs < min,
    }
}

/// Mass `a` placing `mu^{p g - 2} a^{p - 2}` at `fraction` of the threshold minimum.
pub fn mass_for_fraction<T: Scalar>(
    n: usize,
    p: T,
    mu: T,
    gn: &GnConstant<T>,
    fraction: T,
) -> Result<T> {
    if !(mu > T::zero()) {
        return Err(Error::InvalidParams(
            "mass from threshold fraction needs mu > 0".into(),
        ));
    }
    if !(fraction > T::zero()) {
        return Err(Error::InvalidParams(format!(
            "fraction {fraction} must be positive"
        )));
    }
    let probe = ProblemParams::new(n, p, T::one(), mu)?;
    let th = thresholds(&probe, gn);
    let two = lit::<T>(2.0);
    Ok((fraction * th.min() / mu.powf(probe.pg() - two)).powf(T::one() / (p - two)))
}

/// Roots and peak of the landscape function `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Landscape<T> {
    pub t_bar: T,
    pub r0: T,
    pub r1: T,
    pub t_max: T,
    pub h_max: T,
}

/// Coefficient `(C^p / p) a^{p(1-g)}` of the nonlinear term of `h`.
fn h_coeff<T: Scalar>(params: &ProblemParams<T>, gn: &GnConstant<T>) -> T {
    let p = params.p;
    gn.pow_p(p) / p * params.a.powf(p * (T::one() - params.gamma()))
}

/// `h(t) = t^2/2 - mu a t/2 - (C^p/p) a^{p(1-g)} t^{p g}`.
pub fn h_value<T: Scalar>(params: &ProblemParams<T>, gn: &GnConstant<T>, t: T) -> T {
    let half = lit::<T>(0.5);
    half * t * t - half * params.mu * params.a * t - h_coeff(params, gn) * t.powf(params.pg())
}

fn h_slope<T: Scalar>(params: &ProblemParams<T>, gn: &GnConstant<T>, t: T) -> T {
    let pg = params.pg();
    t - lit::<T>(0.5) * params.mu * params.a - h_coeff(params, gn) * pg * t.powf(pg - T::one())
}

/// `phi(t) = t/2 - (C^p/p) a^{p(1-g)} t^{p g - 1}`, so that `h(t) = t (phi(t) - mu a / 2)`.
pub fn phi_value<T: Scalar>(params: &ProblemParams<T>, gn: &GnConstant<T>, t: T) -> T {
    lit::<T>(0.5) * t - h_coeff(params, gn) * t.powf(params.pg() - T::one())
}

/// Maximizer of `phi`.
pub fn t_bar<T: Scalar>(params: &ProblemParams<T>, gn: &GnConstant<T>) -> T {
    let p = params.p;
    let pg = params.pg();
    let denom = lit::<T>(2.0)
        * (pg - T::one())
        * gn.pow_p(p)
        * params.a.powf(p * (T::one() - params.gamma()));
    (p / denom).powf(T::one() / (pg - lit(2.0)))
}

/// Two positive roots of a `(-, +, -)` profile, refined by bisection,
/// plus the peak between them located on the slope.
fn window<T: Scalar>(
    f: impl Fn(T) -> T + Copy,
    slope: impl Fn(T) -> T,
    lo: T,
    hi: T,
) -> Result<(T, T, T, T)> {
    let br = scan_brackets(f, lo, hi, SCAN_POINTS, true);
    if br.len() != 2 {
        return Err(Error::NoPositiveWindow);
    }
    let tol = lit::<T>(ROOT_TOL);
    let r0 = bisect(f, br[0].0, br[0].1, tol);
    let r1 = bisect(f, br[1].0, br[1].1, tol);
    if !(f(lit::<T>(0.5) * (r0 + r1)) > T::zero()) {
        return Err(Error::NoPositiveWindow);
    }
    let t_max = bisect(slope, r0, r1, tol);
    Ok((r0, r1, t_max, f(t_max)))
}

pub fn landscape_h<T: Scalar>(
    params: &ProblemParams<T>,
    gn: &GnConstant<T>,
) -> Result<Landscape<T>> {
    if !(params.mu > T::zero()) {
        return Err(Error::InvalidParams(
            "the landscape degenerates at mu = 0; use the limit-problem path".into(),
        ));
    }
    let tb = t_bar(params, gn);
    let lo = lit::<T>(0.5) * params.mu * params.a;
    let hi = tb * lit(1e3);
    let (r0, r1, t_max, h_max) = window(
        |t| h_value(params, gn, t),
        |t| h_slope(params, gn, t),
        lo.min(tb * lit(1e-3)),
        hi,
    )?;
    Ok(Landscape {
        t_bar: tb,
        r0,
        r1,
        t_max,
        h_max,
    })
}

/// Rescaling `v(x) = b u(a x)` that turns `E_mu` into a multiple of `Phi_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescaleConstants<T> {
    pub a_tilde: T,
    pub b_tilde: T,
    /// Mass factor: the rescaled profile has `|v|_2^2 = c_tilde_mass a^2`.
    pub c_tilde_mass: T,
}

impl<T: Scalar> RescaleConstants<T> {
    /// `a^N b^{-p}`, the factor in `E_mu(u) = a^N b^{-p} Phi_0(v)`.
    pub fn energy_factor(&self, params: &ProblemParams<T>) -> T {
        self.a_tilde.powi(params.n as i32) * self.b_tilde.powf(-params.p)
    }
}

pub fn rescale_constants<T: Scalar>(params: &ProblemParams<T>) -> Result<RescaleConstants<T>> {
    if !(params.mu > T::zero()) {
        return Err(Error::InvalidParams("rescaling needs mu > 0".into()));
    }
    let two = lit::<T>(2.0);
    let mu = params.mu;
    let q = params.p - two;
    let half_n = params.dim() / two;
    Ok(RescaleConstants {
        a_tilde: (two / mu).sqrt(),
        b_tilde: (lit::<T>(8.0) / (mu * mu)).powf(T::one() / q),
        c_tilde_mass: two.powf(lit::<T>(6.0) / q - half_n) * mu.powf(half_n - lit::<T>(4.0) / q),
    })
}

/// Roots and peak scale of the rescaled landscape `h~`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapeTilde<T> {
    pub tau_tilde: T,
    pub r0: T,
    pub r1: T,
}

fn h_tilde_coeff<T: Scalar>(params: &ProblemParams<T>, gn: &GnConstant<T>, mass: T) -> T {
    let p = params.p;
    gn.pow_p(p) / p * mass.powf(p * (T::one() - params.gamma()))
}

/// Rescaled mass `a sqrt(c~)`.
pub fn rescaled_mass<T: Scalar>(params: &ProblemParams<T>) -> Result<T> {
    Ok(params.a * rescale_constants(params)?.c_tilde_mass.sqrt())
}

/// `h~(t) = t^2 - 2 a sqrt(c~) t - (C^p/p) (a sqrt(c~))^{p(1-g)} t^{p g}`.
pub fn h_tilde_value<T: Scalar>(params: &ProblemParams<T>, gn: &GnConstant<T>, t: T) -> Result<T> {
    let m = rescaled_mass(params)?;
    Ok(t * t - lit::<T>(2.0) * m * t - h_tilde_coeff(params, gn, m) * t.powf(params.pg()))
}

pub fn landscape_h_tilde<T: Scalar>(
    params: &ProblemParams<T>,
    gn: &GnConstant<T>,
) -> Result<LandscapeTilde<T>> {
    if !(params.mu > T::zero()) {
        return Err(Error::InvalidParams(
            "the landscape degenerates at mu = 0; use the limit-problem path".into(),
        ));
    }
    let m = rescaled_mass(params)?;
    let k = h_tilde_coeff(params, gn, m);
    let pg = params.pg();
    let p = params.p;
    let tau_tilde = (p / ((pg - T::one()) * gn.pow_p(p) * m.powf(p * (T::one() - params.gamma()))))
        .powf(T::one() / (pg - lit(2.0)));
    let two = lit::<T>(2.0);
    let f = |t: T| t * t - two * m * t - k * t.powf(pg);
    let df = |t: T| two * t - two * m - k * pg * t.powf(pg - T::one());
    let (r0, r1, _, _) = window(f, df, m.min(tau_tilde * lit(1e-3)), tau_tilde * lit(1e3))?;
    Ok(LandscapeTilde { tau_tilde, r0, r1 })
}

/// Window `(lower, upper)` for the Lagrange multipliers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierBounds<T> {
    pub upper: T,
    pub lower: T,
}

impl<T: Scalar> MultiplierBounds<T> {
    pub fn contains(&self, lambda: T) -> bool {
        self.lower < lambda && lambda < self.upper
    }
}

pub fn multiplier_bounds<T: Scalar>(
    params: &ProblemParams<T>,
    gn: &GnConstant<T>,
) -> MultiplierBounds<T> {
    let mu = params.mu;
    let p = params.p;
    let g = params.gamma();
    let pg = params.pg();
    let two = lit::<T>(2.0);
    let four = lit::<T>(4.0);
    let upper = -mu * mu / four;
    let lower = -(pg - T::one()) * mu * mu / (four * (pg - two))
        + (g - T::one())
            * gn.pow_p(p)
            * ((pg - T::one()) / (two * (pg - two))).powf(pg)
            * mu.powf(pg)
            * params.a.powf(p - two);
    MultiplierBounds { upper, lower }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference(c: f64) -> (ProblemParams<f64>, GnConstant<f64>) {
        let gn = GnConstant::user(c).unwrap();
        let a = mass_for_fraction(5, 3.8, 1.0, &gn, 0.5).unwrap();
        (ProblemParams::new(5, 3.8, a, 1.0).unwrap(), gn)
    }

    #[test]
    fn exponents_at_the_l2_critical_point() {
        let e = derive_exponents(4, 4.0f64).unwrap();
        assert!((e.gamma_p - 0.5).abs() < 1e-15);
        assert!((e.p_bar - 4.0).abs() < 1e-15);
        assert!((4.0 * e.gamma_p - 2.0).abs() < 1e-15);
        assert_eq!(e.p_star4, CriticalExponent::Unbounded);
    }

    #[test]
    fn exponents_in_dimension_five_and_eight() {
        let e = derive_exponents(5, 3.8f64).unwrap();
        assert!((e.gamma_p - 9.0 / 15.2).abs() < 1e-15);
        assert!((3.8 * e.gamma_p - 2.25).abs() < 1e-14);
        assert_eq!(e.p_star4, CriticalExponent::Finite(10.0));
        let e = derive_exponents(8, 3.5f64).unwrap();
        assert!((e.p_bar - 3.0).abs() < 1e-15);
        assert_eq!(e.p_star4, CriticalExponent::Finite(4.0));
        assert!((e.gamma_p - 3.0 / 3.5).abs() < 1e-15);
    }

    #[test]
    fn exponents_reject_bad_input() {
        assert!(derive_exponents(1, 3.0f64).is_err());
        assert!(derive_exponents(5, 2.0f64).is_err());
        assert!(ProblemParams::new(5, 3.0f64, 1.0, 1.0).is_err());
        assert!(ProblemParams::new(5, 10.5, 1.0, 1.0).is_err());
        assert!(ProblemParams::new(5, 3.8, -1.0, 1.0).is_err());
        assert!(ProblemParams::new(5, 3.8, 1.0, -1.0).is_err());
    }

    #[test]
    fn c_tilde_hand_value() {
        let params = ProblemParams::new(5, 3.8, 1.0, 1.0).unwrap();
        let th = thresholds(&params, &GnConstant::user(1.0).unwrap());
        let expected = (3.8 / 2.5) * 0.2f64.powf(0.25);
        assert!((th.c_tilde - expected).abs() < 1e-14);
        // The quoted five-digit value 1.01650 rounds 1.016485 upward.
        assert!((th.c_tilde - 1.01650).abs() < 2e-5);
        assert!(th.c_upper > 0.0 && th.c_lower > 0.0);
    }

    #[test]
    fn zero_dispersion_is_always_admissible() {
        let gn = GnConstant::user(3.0).unwrap();
        for a in [1e-3, 1.0, 1e6] {
            let params = ProblemParams::new(5, 3.8, a, 0.0).unwrap();
            assert!(thresholds(&params, &gn).admissible_min_flag);
        }
    }

    #[test]
    fn landscape_ordering_and_signs() {
        let (params, gn) = reference(0.2);
        let l = landscape_h(&params, &gn).unwrap();
        let ma = params.mu * params.a;
        assert!(0.0 < ma && ma < l.r0 && l.r0 < l.t_bar && l.t_bar < l.r1);
        assert!(h_value(&params, &gn, l.t_bar) > 0.0);
        assert!(h_value(&params, &gn, ma) < 0.0);
        assert!(h_value(&params, &gn, l.r0).abs() <= 1e-12 * l.h_max.max(1.0));
        assert!(h_value(&params, &gn, l.r1).abs() <= 1e-12 * l.h_max.max(1.0));
    }

    #[test]
    fn landscape_rejects_zero_dispersion_and_inadmissible_mass() {
        let gn = GnConstant::user(0.2f64).unwrap();
        let params = ProblemParams::new(5, 3.8, 1.0, 0.0).unwrap();
        assert!(matches!(
            landscape_h(&params, &gn),
            Err(Error::InvalidParams(_))
        ));
        let a = mass_for_fraction(5, 3.8, 1.0, &gn, 1.0).unwrap();
        let th = thresholds(&ProblemParams::new(5, 3.8, a, 1.0).unwrap(), &gn);
        let big = a * (th.c_tilde / th.min()).powf(1.0 / 1.8) * 1.5;
        let params = ProblemParams::new(5, 3.8, big, 1.0).unwrap();
        assert_eq!(landscape_h(&params, &gn), Err(Error::NoPositiveWindow));
    }

    #[test]
    fn tau_tilde_is_rescaled_t_bar() {
        let (params, gn) = reference(0.7);
        let lt = landscape_h_tilde(&params, &gn).unwrap();
        let rc = rescale_constants(&params).unwrap();
        let tb = t_bar(&params, &gn);
        let expect = rc.a_tilde.powf(2.0 - 2.5) * rc.b_tilde * tb;
        assert!((lt.tau_tilde / expect - 1.0).abs() < 1e-10);
        let m = rescaled_mass(&params).unwrap();
        assert!(0.0 < 2.0 * m && 2.0 * m < lt.r0 && lt.r0 < lt.tau_tilde && lt.tau_tilde < lt.r1);
        assert!(h_tilde_value(&params, &gn, 2.0 * m).unwrap() < 0.0);
    }

    #[test]
    fn multiplier_window_is_nonempty() {
        let (params, gn) = reference(0.5);
        let b = multiplier_bounds(&params, &gn);
        assert_eq!(b.upper, -0.25);
        assert!(b.lower < b.upper);
    }

    #[test]
    fn hypotheses_at_reference_point() {
        let params = ProblemParams::new(5, 3.8, 1.0, 1.0).unwrap();
        let h = params.hypotheses();
        assert!(h.existence && h.sign_changing && h.witness);
        let params = ProblemParams::new(5, 4.5, 1.0, 1.0).unwrap();
        assert!(!params.hypotheses().witness);
    }
}
