//! Numerical Gagliardo-Nirenberg constant: the maximum of the Weinstein
//! quotient `pp / (mm^{p(1-g)/2} dd^{pg/2})` over radial profiles.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analytic::{derive_exponents, GnConstant, GnProvenance};
use crate::error::{Error, Result};
use crate::radial::{GridSpec, RadialGrid, RadialProfile};
use crate::scalar::{lit, wide, Scalar};

use super::config::SolverConfig;
use super::functional::{Functional, Workspace};
use super::newton::Lagrange;
use super::{random_start, MAX_BACKTRACK};

/// Ascent stops and hands over to Newton below this preconditioned slope.
const ASCENT_SWITCH: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct GnEstimate<T> {
    pub constant: GnConstant<T>,
    /// Estimate on the doubled grid.
    pub refined: T,
    /// Maximizer on the base grid, with `mm = dd = 1`.
    pub profile: RadialProfile<T>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnValidation {
    pub samples: usize,
    /// Largest `quotient / C^p` seen.
    pub worst_ratio: f64,
    pub slack: f64,
}

impl GnValidation {
    pub fn passed(&self) -> bool {
        self.worst_ratio <= 1.0 + self.slack
    }
}

fn log_quotient<T: Scalar>(u: &RadialProfile<T>, p: T, gamma: T) -> Result<T> {
    Ok(u.norm_quadruple(p)?.weinstein(p, gamma).ln())
}

/// Preconditioned ascent on `ln W` at unit mass, then Newton for
/// `max pp` subject to `mm = dd = 1`. Returns `(C, maximizer, iterations)`.
fn maximize<T: Scalar>(
    ws: &Workspace<T>,
    p: T,
    gamma: T,
    start: RadialProfile<T>,
    cfg: &SolverConfig<T>,
) -> Result<(T, RadialProfile<T>, usize)> {
    let one = T::one();
    let mut u = start.with_mass(one);
    let mut w = log_quotient(&u, p, gamma)?;
    let mut step = cfg.step0;
    let mut switch: T = lit(ASCENT_SWITCH);
    let problem = Lagrange {
        objective: Functional::lp(),
        constraints: vec![(Functional::mass(), one), (Functional::laplacian_sq(), one)],
        p,
    };
    let mut last_slope = T::infinity();
    for it in 0..=cfg.max_iter {
        let q = u.norm_quadruple(p)?;
        let g: Vec<T> = Functional {
            dd: -p * gamma / (lit::<T>(2.0) * q.dd),
            gg: T::zero(),
            pp: one / q.pp,
            mm: -p * (one - gamma) / (lit::<T>(2.0) * q.mm),
        }
        .gradient(&ws.grid, &u.values, p);
        let d = ws.precondition(&g);
        let slope = ws.grid.inner(&g, &d);
        last_slope = slope;
        let stuck = !(slope > T::zero());
        if slope.sqrt() < switch || stuck || it == cfg.max_iter {
            let s = -q.dd.ln() / lit(4.0);
            let fixed = u.dilate(s)?.with_mass(one);
            let out = problem.solve(
                ws,
                &fixed.values,
                None,
                cfg.tol_grad,
                cfg.tol_pohozaev,
                cfg.newton_iter,
            )?;
            if out.converged {
                let v = RadialProfile::new(ws.grid.clone(), out.values)?;
                let pp = v.norm_quadruple(p)?.pp;
                return Ok((pp.powf(one / p), v, it + out.iterations));
            }
            if stuck || it == cfg.max_iter {
                break;
            }
            switch *= lit(0.1);
        }
        let mut t = (step / cfg.backtrack).min(cfg.step0);
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACK {
            let v: Vec<T> = u.values.iter().zip(&d).map(|(x, y)| *x + t * *y).collect();
            if let Ok(v) = RadialProfile::new(ws.grid.clone(), v) {
                let v = v.with_mass(one);
                if let Ok(wv) = log_quotient(&v, p, gamma) {
                    if wv >= w + cfg.armijo * t * slope {
                        accepted = Some((v, wv));
                        break;
                    }
                }
            }
            t *= cfg.backtrack;
        }
        match accepted {
            Some((v, wv)) => {
                let dd = v.norm_quadruple(p)?.dd;
                u = v.dilate(-dd.ln() / lit(4.0))?.with_mass(one);
                w = wv;
                step = t;
            }
            None => switch = T::infinity(),
        }
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iter,
        grad_norm: wide(last_slope.abs().sqrt()),
        pohozaev: f64::NAN,
    })
}

/// Estimate of `C_{N,p}` on `spec`, with the relative change on `spec.refined(2)`
/// recorded as provenance.
pub fn gn_constant_estimate<T: Scalar>(
    n: usize,
    p: T,
    spec: &GridSpec,
    cfg: &SolverConfig<T>,
) -> Result<GnEstimate<T>> {
    let exps = derive_exponents(n, p)?;
    if !(p > lit(2.0)) || !exps.p_star4.exceeds(p) {
        return Err(Error::InvalidParams(format!(
            "p = {p} outside (2, 4*) for N = {n}"
        )));
    }
    let gamma = exps.gamma_p;
    let grid = Arc::new(RadialGrid::new(n, *spec)?);
    let ws = Workspace::new(grid.clone())?;
    let start = RadialProfile::from_fn(grid, |r: T| (-r * r).exp());
    let (c, profile, iterations) = maximize(&ws, p, gamma, start, cfg)?;

    let fine_spec = spec.refined(2);
    let fine = Arc::new(RadialGrid::new(n, fine_spec)?);
    let fine_ws = Workspace::new(fine.clone())?;
    let (c_fine, _, _) = maximize(&fine_ws, p, gamma, profile.resample(fine), cfg)?;
    let delta = wide((c - c_fine).abs() / c_fine);
    Ok(GnEstimate {
        constant: GnConstant {
            c_np: c,
            provenance: GnProvenance::Estimated {
                refinement_delta: delta,
                nodes: spec.nodes,
            },
        },
        refined: c_fine,
        profile,
        iterations,
    })
}

/// Checks the inequality with `gn` on `samples` random profiles.
pub fn validate_gn<T: Scalar>(
    gn: &GnConstant<T>,
    grid: &Arc<RadialGrid<T>>,
    p: T,
    samples: usize,
    slack: f64,
    seed: u64,
) -> Result<GnValidation> {
    let gamma = derive_exponents(grid.dim, p)?.gamma_p;
    let bound = wide(gn.pow_p(p));
    let mut worst = 0.0f64;
    for k in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let u = random_start(grid, &mut rng);
        let q = u.norm_quadruple(p)?;
        worst = worst.max(wide(q.weinstein(p, gamma)) / bound);
    }
    Ok(GnValidation {
        samples,
        worst_ratio: worst,
        slack,
    })
}
