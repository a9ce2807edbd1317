//! Test-function bound for the local minimum level: the truncated Bessel
//! profile `psi_m = psi phi(r/m)` rescaled to mass `a^2 c~`, on which
//! `Phi0(v) = dd - 2 gg - pp/p` drops below `-c~ a^2` for `m` large.

use std::sync::Arc;

use crate::analytic::{landscape_h_tilde, rescale_constants, GnConstant, ProblemParams};
use crate::error::{Error, Result};
use crate::radial::{sphere_area, GridSpec, RadialGrid, RadialProfile};
use crate::scalar::{wide, Scalar};

use super::bessel::{bessel_psi, bessel_psi_slope};

/// Midpoint step of the witness quadrature; the integrands are smooth and
/// compactly supported, so the rule converges faster than any power.
const QUAD_STEP: f64 = 1.0 / 32.0;
/// Node spacing of the stored profile.
const PROFILE_STEP: f64 = 0.1;
/// Cells of the ramp antiderivative table.
const RAMP_CELLS: usize = 4096;

/// Smooth cutoff, `1` on `[0, 1]` and `0` on `[2, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub enum CutoffShape {
    /// `g(2 - t) / (g(2 - t) + g(t - 1))` with `g(x) = exp(-1/x)`.
    Standard,
    /// `1 - F(t - 1)`, `F` the normalized antiderivative of
    /// `exp(-eps / (y (1 - y)))`; small `eps` approaches the linear ramp.
    Ramp { eps: f64 },
}

/// Value and first two derivatives of `exp(-1/x)`, zero for `x <= 0`.
fn smooth_edge(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let g = (-1.0 / x).exp();
    (g, g / (x * x), g * (1.0 - 2.0 * x) / x.powi(4))
}

/// Evaluator of a cutoff and its derivatives.
#[derive(Debug, Clone)]
pub struct Cutoff {
    shape: CutoffShape,
    /// Ramp antiderivative at the table nodes, normalized to end at 1.
    table: Vec<f64>,
    norm: f64,
}

impl Cutoff {
    pub fn new(shape: CutoffShape) -> Result<Self> {
        let (table, norm) = match shape {
            CutoffShape::Standard => (Vec::new(), 1.0),
            CutoffShape::Ramp { eps } => {
                if !(eps > 0.0 && eps.is_finite()) {
                    return Err(Error::InvalidParams(format!(
                        "ramp needs eps > 0, got {eps}"
                    )));
                }
                ramp_table(eps)
            }
        };
        Ok(Cutoff { shape, table, norm })
    }

    fn ramp_density(eps: f64, y: f64) -> (f64, f64) {
        if y <= 0.0 || y >= 1.0 {
            return (0.0, 0.0);
        }
        let q = y * (1.0 - y);
        let b = (-eps / q).exp();
        (b, b * eps * (1.0 - 2.0 * y) / (q * q))
    }

    /// `(phi, phi', phi'')` at `t >= 0`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        if t <= 1.0 {
            return (1.0, 0.0, 0.0);
        }
        if t >= 2.0 {
            return (0.0, 0.0, 0.0);
        }
        match self.shape {
            CutoffShape::Standard => {
                let (a, a1, a2) = smooth_edge(2.0 - t);
                let (b, b1, b2) = smooth_edge(t - 1.0);
                let (a1, b1) = (-a1, b1);
                let d = a + b;
                let num = a1 * b - a * b1;
                let dnum = a2 * b - a * b2;
                let d1 = a1 + b1;
                (
                    a / d,
                    num / (d * d),
                    dnum / (d * d) - 2.0 * num * d1 / (d * d * d),
                )
            }
            CutoffShape::Ramp { eps } => {
                let y = t - 1.0;
                let (b, b1) = Self::ramp_density(eps, y);
                (
                    1.0 - self.ramp_integral(eps, y),
                    -b / self.norm,
                    -b1 / self.norm,
                )
            }
        }
    }

    /// Cubic Hermite interpolation of the normalized antiderivative.
    fn ramp_integral(&self, eps: f64, y: f64) -> f64 {
        let h = 1.0 / RAMP_CELLS as f64;
        let k = ((y / h) as usize).min(RAMP_CELLS - 1);
        let (y0, y1) = (k as f64 * h, (k + 1) as f64 * h);
        let s = (y - y0) / h;
        let (f0, f1) = (self.table[k], self.table[k + 1]);
        let d0 = Self::ramp_density(eps, y0).0 / self.norm * h;
        let d1 = Self::ramp_density(eps, y1).0 / self.norm * h;
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * f0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * f1
            + (s3 - s2) * d1
    }
}

/// Antiderivative table by 5-point Gauss-Legendre per cell.
fn ramp_table(eps: f64) -> (Vec<f64>, f64) {
    const NODES: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683,
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.236_926_885_056_189,
        0.478_628_670_499_366,
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
    ];
    let h = 1.0 / RAMP_CELLS as f64;
    let mut table = Vec::with_capacity(RAMP_CELLS + 1);
    let mut acc = 0.0;
    table.push(0.0);
    for k in 0..RAMP_CELLS {
        let mid = (k as f64 + 0.5) * h;
        acc += NODES
            .iter()
            .zip(&WEIGHTS)
            .map(|(x, w)| w * Cutoff::ramp_density(eps, mid + 0.5 * h * x).0)
            .sum::<f64>()
            * 0.5
            * h;
        table.push(acc);
    }
    let norm = acc;
    for v in &mut table {
        *v /= norm;
    }
    (table, norm)
}

/// Norms of the unnormalized `psi_m` by midpoint quadrature on `[0, 2m]`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct RawNorms {
    mm: f64,
    gg: f64,
    dd: f64,
    pp: f64,
    /// `|(D + 1) psi_m|_2^2` from its closed form.
    resolvent: f64,
}

fn raw_norms(n: usize, p: f64, m: f64, cutoff: &Cutoff) -> RawNorms {
    let omega = sphere_area(n);
    let nf = n as f64;
    let cells = (2.0 * m / QUAD_STEP).ceil() as usize;
    let mut acc = RawNorms {
        mm: 0.0,
        gg: 0.0,
        dd: 0.0,
        pp: 0.0,
        resolvent: 0.0,
    };
    for i in 0..cells {
        let r = (i as f64 + 0.5) * QUAD_STEP;
        let (f, f1, f2) = cutoff.eval(r / m);
        if f == 0.0 && f1 == 0.0 {
            continue;
        }
        let psi = bessel_psi(n, r);
        let dpsi = bessel_psi_slope(n, r);
        let u = psi * f;
        let du = dpsi * f + psi * f1 / m;
        let res = psi * (f2 / (m * m) + (nf - 1.0) * f1 / (r * m)) + 2.0 * dpsi * f1 / m;
        let lap = res - u;
        let w = omega * r.powi(n as i32 - 1) * QUAD_STEP;
        acc.mm += w * u * u;
        acc.gg += w * du * du;
        acc.dd += w * lap * lap;
        acc.pp += w * u.abs().powf(p);
        acc.resolvent += w * res * res;
    }
    acc
}

/// Certificate data for one cutoff scale `m`.
#[derive(Debug, Clone)]
pub struct BesselWitness {
    pub m: f64,
    pub cutoff: CutoffShape,
    /// `psi~_m` sampled on a uniform grid covering its support.
    pub profile: RadialProfile<f64>,
    /// `|psi~_m|_2^2`, equal to `c~ a^2`.
    pub mass_sq: f64,
    pub target_mass_sq: f64,
    pub laplacian_norm: f64,
    pub tau_tilde: f64,
    /// `2 a sqrt(c~)`.
    pub laplacian_cap: f64,
    /// `Phi0` as `dd - 2 gg - pp/p`.
    pub phi0_value: f64,
    /// `Phi0` as `|(D + 1) v|^2 - |v|^2 - pp/p`.
    pub phi0_resolvent: f64,
    /// `-c~ a^2 - Phi0`; positive certifies the bound.
    pub bound_margin: f64,
    /// `a~^N b~^{-p} Phi0`, an upper bound for the local minimum level.
    pub implied_bound: f64,
    /// The same bound as the energy of `u(x) = v(x / a~) / b~`.
    pub implied_bound_direct: f64,
    /// `-a^2 mu^2 / 8`.
    pub reference_level: f64,
}

impl BesselWitness {
    /// Margin positive and `|D psi~_m|_2 < tau~`.
    pub fn certifies(&self) -> bool {
        self.bound_margin > 0.0 && self.laplacian_norm < self.tau_tilde
    }
}

fn check_hypotheses<T: Scalar>(params: &ProblemParams<T>, m: f64) -> Result<()> {
    let p = wide(params.p);
    if params.n < 5 || p >= 4.0 {
        return Err(Error::Hypothesis(format!(
            "the Bessel test-function bound needs N >= 5 and p < 4, got N = {} and p = {p}",
            params.n
        )));
    }
    if !(m >= 1.0) {
        return Err(Error::InvalidParams(format!(
            "cutoff scale m must be >= 1, got {m}"
        )));
    }
    Ok(())
}

/// Evaluates the witness at scale `m` whatever the sign of its margin.
pub fn evaluate_witness<T: Scalar>(
    params: &ProblemParams<T>,
    gn: &GnConstant<T>,
    m: f64,
    shape: &CutoffShape,
) -> Result<BesselWitness> {
    check_hypotheses(params, m)?;
    let n = params.n;
    let p = wide(params.p);
    let a = wide(params.a);
    let mu = wide(params.mu);
    let rc = rescale_constants(params)?;
    let (a_t, b_t, c_t) = (wide(rc.a_tilde), wide(rc.b_tilde), wide(rc.c_tilde_mass));
    let tau = wide(landscape_h_tilde(params, gn)?.tau_tilde);
    let cutoff = Cutoff::new(shape.clone())?;

    let raw = raw_norms(n, p, m, &cutoff);
    let target = c_t * a * a;
    let s2 = target / raw.mm;
    let sp = s2.powf(0.5 * p);
    let (mm, gg, dd, pp) = (s2 * raw.mm, s2 * raw.gg, s2 * raw.dd, sp * raw.pp);
    let phi0 = dd - 2.0 * gg - pp / p;
    let phi0_resolvent = s2 * raw.resolvent - mm - pp / p;

    let factor = a_t.powi(n as i32) * b_t.powf(-p);
    let nf = n as f64;
    let u_dd = b_t.powi(-2) * a_t.powf(nf - 4.0) * dd;
    let u_gg = b_t.powi(-2) * a_t.powf(nf - 2.0) * gg;
    let u_pp = b_t.powf(-p) * a_t.powf(nf) * pp;

    let extent = 2.0 * m + 1.0;
    let spec = GridSpec {
        nodes: ((extent / PROFILE_STEP).ceil() as usize).max(16),
        rmax: extent,
        fine_ratio: 1.0,
        refine_radius: 1.0,
    };
    let grid = Arc::new(RadialGrid::new(n, spec)?);
    let s = s2.sqrt();
    let profile = RadialProfile::from_fn(grid, |r| s * bessel_psi(n, r) * cutoff.eval(r / m).0);

    Ok(BesselWitness {
        m,
        cutoff: shape.clone(),
        profile,
        mass_sq: mm,
        target_mass_sq: target,
        laplacian_norm: dd.sqrt(),
        tau_tilde: tau,
        laplacian_cap: 2.0 * a * c_t.sqrt(),
        phi0_value: phi0,
        phi0_resolvent,
        bound_margin: -target - phi0,
        implied_bound: factor * phi0,
        implied_bound_direct: 0.5 * u_dd - 0.5 * mu * u_gg - u_pp / p,
        reference_level: -a * a * mu * mu / 8.0,
    })
}

/// Witness at scale `m`; fails when the bound is not achieved there.
pub fn build_witness<T: Scalar>(
    params: &ProblemParams<T>,
    gn: &GnConstant<T>,
    m: f64,
    shape: &CutoffShape,
) -> Result<BesselWitness> {
    let w = evaluate_witness(params, gn, m, shape)?;
    if !w.certifies() {
        return Err(Error::BoundNotAchieved {
            m,
            margin: w.bound_margin,
        });
    }
    Ok(w)
}

/// Outcome of the doubling search over `m`.
#[derive(Debug, Clone)]
pub struct WitnessSearch {
    /// `(m, margin)` for every scale tried.
    pub attempts: Vec<(f64, f64)>,
    /// First certifying witness, else the one at the largest `m`.
    pub witness: BesselWitness,
}

impl WitnessSearch {
    pub fn certified(&self) -> bool {
        self.witness.certifies()
    }
}

/// Doubles `m` from `m_start` up to `m_max` until the bound holds.
pub fn search_witness<T: Scalar>(
    params: &ProblemParams<T>,
    gn: &GnConstant<T>,
    shape: &CutoffShape,
    m_start: f64,
    m_max: f64,
) -> Result<WitnessSearch> {
    let mut m = m_start;
    let mut attempts = Vec::new();
    loop {
        let w = evaluate_witness(params, gn, m, shape)?;
        attempts.push((m, w.bound_margin));
        if w.certifies() || 2.0 * m > m_max {
            return Ok(WitnessSearch {
                attempts,
                witness: w,
            });
        }
        m *= 2.0;
    }
}
