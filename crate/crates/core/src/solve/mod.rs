//! Constructive solvers: the local minimizer on `P+`, the mountain-pass
//! state as the minimizer over `P-`, the `mu = 0` limit state, and the
//! Gagliardo-Nirenberg constant.
//!
//! Each solver runs a preconditioned, mass-preserving descent with fiber
//! projections and hands over to a Newton iteration on the Lagrange system
//! for `E` restricted to `{|u|_2 = a, P = 0}` once close.

mod config;
mod functional;
mod gn;
mod newton;
mod report;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytic::{landscape_h, GnConstant, ProblemParams};
use crate::error::{Error, Result};
use crate::fiber::{classify, energy, fiber_geometry, pohozaev, ManifoldClass};
use crate::radial::{constrained_gradient, RadialGrid, RadialProfile};
use crate::scalar::{lit, wide, Scalar};

pub use config::SolverConfig;
pub use functional::{Functional, Workspace};
pub use gn::{gn_constant_estimate, validate_gn, GnEstimate, GnValidation};
pub use newton::{Lagrange, NewtonOutcome, Residual};
pub use report::{Diagnostics, SolveReport};

/// Classification tolerance on `|P| / dd` at convergence.
const CLASS_TOL: f64 = 1e-6;
/// Descent checks of `sqrt(dd) >= R0` tolerated before giving up.
const DISK_STRIKES: usize = 3;
/// Step halvings before a line search counts as stalled.
pub(crate) const MAX_BACKTRACK: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    GroundLocalMin,
    MountainPass,
    LimitMuZero,
}

impl Branch {
    pub fn label(&self) -> &'static str {
        match self {
            Branch::GroundLocalMin => "ground",
            Branch::MountainPass => "mp",
            Branch::LimitMuZero => "limit",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Which critical point of the fiber map a projection selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// Dilates `u` (after mass normalization) onto `P+` or `P-`, iterating
/// until the remaining dilation is below `1e-13`.
pub fn project_side<T: Scalar>(
    u: &RadialProfile<T>,
    params: &ProblemParams<T>,
    side: Side,
) -> Result<RadialProfile<T>> {
    let mut v = u.with_mass(params.a);
    for _ in 0..10 {
        let q = v.norm_quadruple(params.p)?;
        let geo = fiber_geometry(&q, params)?;
        let s = match side {
            Side::Plus => geo
                .s_u
                .ok_or_else(|| Error::Hypothesis("no P+ component at mu = 0".into()))?,
            Side::Minus => geo.t_u,
        };
        if s.abs() <= lit(1e-13) {
            break;
        }
        v = v.dilate(s)?.with_mass(params.a);
    }
    Ok(v)
}

fn expect_class<T: Scalar>(
    v: &RadialProfile<T>,
    params: &ProblemParams<T>,
    want: ManifoldClass,
) -> Result<()> {
    let q = v.norm_quadruple(params.p)?;
    let got = classify(&q, params, lit(CLASS_TOL));
    if got != want {
        return Err(Error::Hypothesis(format!(
            "projection classified {got}, expected {want}"
        )));
    }
    Ok(())
}

/// `s_u * u`: the local minimum of the fiber map, inside the disk `|Du| < R0`.
pub fn project_plus<T: Scalar>(
    u: &RadialProfile<T>,
    params: &ProblemParams<T>,
    gn: &GnConstant<T>,
) -> Result<RadialProfile<T>> {
    let v = project_side(u, params, Side::Plus)?;
    expect_class(&v, params, ManifoldClass::Pplus)?;
    let r0 = landscape_h(params, gn)?.r0;
    let norm = v.norm_quadruple(params.p)?.dd.sqrt();
    if norm >= r0 {
        return Err(Error::LeftAdmissibleDisk {
            norm: wide(norm),
            r0: wide(r0),
        });
    }
    Ok(v)
}

/// `t_u * u`: the maximum of the fiber map.
pub fn project_minus<T: Scalar>(
    u: &RadialProfile<T>,
    params: &ProblemParams<T>,
    _gn: &GnConstant<T>,
) -> Result<RadialProfile<T>> {
    let v = project_side(u, params, Side::Minus)?;
    expect_class(&v, params, ManifoldClass::Pminus)?;
    Ok(v)
}

/// Gaussian `e^{-b r^2}` with mass `a` and `|Du|_2^2 ~ dd`.
pub fn gaussian_guess<T: Scalar>(
    grid: &Arc<RadialGrid<T>>,
    p: T,
    a: T,
    dd: T,
) -> Result<RadialProfile<T>> {
    let unit = RadialProfile::from_fn(grid.clone(), |r| (-r * r).exp());
    let q = unit.norm_quadruple(p)?;
    // dd / mm scales like b^2 for e^{-b r^2}.
    let b = (dd / (a * a) / (q.dd / q.mm)).sqrt();
    Ok(RadialProfile::from_fn(grid.clone(), |r| (-b * r * r).exp()).with_mass(a))
}

fn manifold_problem<T: Scalar>(params: &ProblemParams<T>) -> Lagrange<T> {
    Lagrange {
        objective: Functional::energy(params),
        constraints: vec![
            (Functional::mass(), params.a * params.a),
            (Functional::pohozaev(params), T::zero()),
        ],
        p: params.p,
    }
}

/// Retraction onto the mass sphere.
fn retract<T: Scalar>(ws: &Workspace<T>, u: &[T], d: &[T], t: T, a: T) -> Result<RadialProfile<T>> {
    let v: Vec<T> = u.iter().zip(d).map(|(x, y)| *x + t * *y).collect();
    Ok(RadialProfile::new(ws.grid.clone(), v)?.with_mass(a))
}

struct Branching<T> {
    branch: Branch,
    side: Side,
    r0: Option<T>,
}

impl<T: Scalar> Branching<T> {
    fn accepts(&self, e: T, class: ManifoldClass, norm: T) -> bool {
        match self.branch {
            Branch::GroundLocalMin => {
                class == ManifoldClass::Pplus && e < T::zero() && self.r0.is_none_or(|r0| norm < r0)
            }
            Branch::MountainPass | Branch::LimitMuZero => {
                class == ManifoldClass::Pminus && e > T::zero()
            }
        }
    }
}

fn build_report<T: Scalar>(
    ws: &Workspace<T>,
    params: &ProblemParams<T>,
    branch: Branch,
    out: &NewtonOutcome<T>,
    descent_iterations: usize,
    energy_history: Vec<T>,
) -> Result<SolveReport<T>> {
    let profile = RadialProfile::new(ws.grid.clone(), out.values.clone())?;
    let q = profile.norm_quadruple(params.p)?;
    let e = energy(&q, params);
    let lambda = (q.dd - params.mu * q.gg - q.pp) / q.mm;
    let (free, _) = constrained_gradient(&profile, params)?;
    let free_grad_norm = ws.pre_norm(&free.values) / q.mm.sqrt();
    Ok(SolveReport {
        energy: e,
        lambda,
        pohozaev_residual: pohozaev(&q, params),
        grad_norm: out.residual.grad,
        branch,
        iterations: descent_iterations + out.iterations,
        quadruple: q,
        manifold_class: classify(&q, params, lit(CLASS_TOL)),
        diagnostics: Diagnostics {
            descent_iterations,
            newton_iterations: out.iterations,
            newton_lambda: out.multipliers[0] * lit(2.0),
            pohozaev_multiplier: out.multipliers[1],
            free_grad_norm,
            truncation_ratio: profile.truncation_ratio(),
            sign_changes: profile.sign_changes(),
            energy_history,
            start_energies: Vec::new(),
        },
        profile,
    })
}

/// Descent on the mass sphere with fiber projections, then Newton polish.
fn run_branch<T: Scalar>(
    ws: &Workspace<T>,
    params: &ProblemParams<T>,
    cfg: &SolverConfig<T>,
    how: &Branching<T>,
    u0: &RadialProfile<T>,
) -> Result<SolveReport<T>> {
    cfg.validate()?;
    let a = params.a;
    let p = params.p;
    let e_of = |v: &RadialProfile<T>| -> Result<T> { Ok(energy(&v.norm_quadruple(p)?, params)) };
    let lag = manifold_problem(params);
    let mut u = project_side(u0, params, how.side)?;
    // Descent preconditioner `L^2 + mu L - lambda`, the linear part of the
    // Hessian at the current multiplier, refitted as the iterate moves. The
    // gap `-lambda - mu^2/4` is kept away from zero.
    let quarter = params.mu * params.mu / lit(4.0);
    let gap_floor = (quarter * lit(1e-2)).max(lit(1e-8));
    let gap_of = |v: &RadialProfile<T>| -> Result<T> {
        let q = v.norm_quadruple(p)?;
        let lambda = (q.dd - params.mu * q.gg - q.pp) / q.mm;
        Ok((-lambda - quarter).max(gap_floor))
    };
    let mut gap = gap_of(&u)?;
    let mut local = Workspace::with_operator(ws.grid.clone(), params.mu, quarter + gap)?;
    let mut e = e_of(&u)?;
    let mut history = vec![e];
    let mut switch = cfg.newton_switch;
    let mut step = cfg.step0;
    let mut strikes = 0;
    let mut last = Residual {
        grad: T::infinity(),
        constraint: T::infinity(),
    };
    let mut stalled = false;
    for it in 0..=cfg.max_iter {
        if it % cfg.cadence == 0 || stalled {
            if how.side == Side::Plus && it > 0 {
                u = project_side(&u, params, Side::Plus)?;
                e = e_of(&u)?;
                history.push(e);
            }
            let fresh = gap_of(&u)?;
            if fresh > gap * lit(2.0) || fresh * lit(2.0) < gap {
                gap = fresh;
                local = Workspace::with_operator(ws.grid.clone(), params.mu, quarter + gap)?;
            }
            let mult = lag.least_squares_multipliers(ws, &u.values)?;
            last = lag.residual(ws, &u.values, &mult)?;
            if last.grad < switch || stalled {
                let out = lag.solve(
                    ws,
                    &u.values,
                    Some(mult),
                    cfg.tol_grad,
                    cfg.tol_pohozaev,
                    cfg.newton_iter,
                )?;
                if out.converged {
                    let rep = build_report(ws, params, how.branch, &out, it, history.clone())?;
                    if how.accepts(rep.energy, rep.manifold_class, rep.quadruple.dd.sqrt()) {
                        return Ok(rep);
                    }
                }
                if stalled {
                    break;
                }
                switch *= lit(0.1);
            }
            if let Some(r0) = how.r0 {
                if u.norm_quadruple(p)?.dd.sqrt() >= r0 {
                    strikes += 1;
                    if strikes >= DISK_STRIKES {
                        return Err(Error::LeftAdmissibleDisk {
                            norm: wide(u.norm_quadruple(p)?.dd.sqrt()),
                            r0: wide(r0),
                        });
                    }
                } else {
                    strikes = 0;
                }
            }
        }
        if it == cfg.max_iter {
            break;
        }
        let (g, _) = constrained_gradient(&u, params)?;
        let mut d: Vec<T> = local
            .precondition(&g.values)
            .into_iter()
            .map(|x| -x)
            .collect();
        let mm = u.mass_sq();
        let c = ws.grid.inner(&d, &u.values) / mm;
        for (x, y) in d.iter_mut().zip(&u.values) {
            *x -= c * *y;
        }
        let slope = ws.grid.inner(&g.values, &d);
        if !(slope < T::zero()) {
            stalled = true;
            continue;
        }
        let mut t = (step / cfg.backtrack).min(cfg.step0);
        let mut accepted = None;
        // Below this the predicted decrease is lost in the rounding of `E`.
        let resolution = T::epsilon() * lit(64.0) * (T::one() + e.abs());
        for _ in 0..MAX_BACKTRACK {
            if -cfg.armijo * t * slope < resolution {
                break;
            }
            let trial = retract(ws, &u.values, &d, t, a).and_then(|v| match how.side {
                Side::Minus => project_side(&v, params, Side::Minus),
                Side::Plus => Ok(v),
            });
            if let Ok(v) = trial {
                let et = e_of(&v)?;
                if et <= e + cfg.armijo * t * slope {
                    accepted = Some((v, et));
                    break;
                }
            }
            t *= cfg.backtrack;
        }
        match accepted {
            Some((v, et)) => {
                u = v;
                e = et;
                step = t;
                history.push(e);
            }
            None => stalled = true,
        }
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iter,
        grad_norm: wide(last.grad),
        pohozaev: wide(pohozaev(&u.norm_quadruple(p)?, params)),
    })
}

/// Local minimizer of `E` on `{|u|_2 = a, |Du|_2 < R0}`.
pub fn solve_ground<T: Scalar>(
    ws: &Workspace<T>,
    params: &ProblemParams<T>,
    gn: &GnConstant<T>,
    cfg: &SolverConfig<T>,
    u0: Option<&RadialProfile<T>>,
) -> Result<SolveReport<T>> {
    if !(params.mu > T::zero()) {
        return Err(Error::InvalidParams(
            "the ground branch needs mu > 0".into(),
        ));
    }
    let land = landscape_h(params, gn)?;
    let start = match u0 {
        Some(u) => u.clone(),
        None => {
            let half = land.r0 * lit(0.5);
            gaussian_guess(&ws.grid, params.p, params.a, half * half)?
        }
    };
    let how = Branching {
        branch: Branch::GroundLocalMin,
        side: Side::Plus,
        r0: Some(land.r0),
    };
    run_branch(ws, params, cfg, &how, &start)
}

/// Random smooth start: a signed sum of three Gaussians with widths spread
/// over a decade, dominated by the first term.
pub fn random_start<T: Scalar>(
    grid: &Arc<RadialGrid<T>>,
    rng: &mut ChaCha8Rng,
) -> RadialProfile<T> {
    let terms: Vec<(T, T)> = (0..3)
        .map(|j| {
            let c = if j == 0 {
                1.0
            } else {
                rng.gen_range(-0.8..0.8)
            };
            (lit(c), lit(10f64.powf(rng.gen_range(-0.5..0.5))))
        })
        .collect();
    RadialProfile::from_fn(grid.clone(), |r| {
        terms
            .iter()
            .fold(T::zero(), |acc, &(c, b)| acc + c * (-b * r * r).exp())
    })
}

fn mountain_pass_starts<T: Scalar>(
    ws: &Workspace<T>,
    params: &ProblemParams<T>,
    cfg: &SolverConfig<T>,
    branch: Branch,
    u0: Option<&RadialProfile<T>>,
) -> Result<SolveReport<T>> {
    let how = Branching {
        branch,
        side: Side::Minus,
        r0: None,
    };
    if let Some(u) = u0 {
        return run_branch(ws, params, cfg, &how, u);
    }
    let gauss = gaussian_guess(&ws.grid, params.p, params.a, params.a * params.a)?;
    let results: Vec<Result<SolveReport<T>>> = (0..cfg.starts)
        .into_par_iter()
        .map(|k| {
            let start = if k == 0 {
                gauss.clone()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(k as u64);
                random_start(&ws.grid, &mut rng)
            };
            run_branch(ws, params, cfg, &how, &start)
        })
        .collect();
    let energies: Vec<Option<T>> = results
        .iter()
        .map(|r| r.as_ref().ok().map(|s| s.energy))
        .collect();
    let mut best: Option<SolveReport<T>> = None;
    let mut first_err = None;
    for r in results {
        match r {
            Ok(rep) => {
                if best.as_ref().is_none_or(|b| rep.energy < b.energy) {
                    best = Some(rep);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match best {
        Some(mut rep) => {
            rep.diagnostics.start_energies = energies;
            Ok(rep)
        }
        None => Err(first_err.unwrap_or(Error::NotConverged {
            iterations: 0,
            grad_norm: f64::NAN,
            pohozaev: f64::NAN,
        })),
    }
}

/// Mountain-pass state as the minimizer of `E` over `P-`; the minimum over
/// `cfg.starts` starts (the first a Gaussian) unless `u0` is given.
pub fn solve_mountain_pass<T: Scalar>(
    ws: &Workspace<T>,
    params: &ProblemParams<T>,
    _gn: &GnConstant<T>,
    cfg: &SolverConfig<T>,
    u0: Option<&RadialProfile<T>>,
) -> Result<SolveReport<T>> {
    let branch = if params.mu == T::zero() {
        Branch::LimitMuZero
    } else {
        Branch::MountainPass
    };
    mountain_pass_starts(ws, params, cfg, branch, u0)
}

/// Ground state of the `mu = 0` problem, where `P = P-`.
pub fn solve_limit<T: Scalar>(
    ws: &Workspace<T>,
    params: &ProblemParams<T>,
    gn: &GnConstant<T>,
    cfg: &SolverConfig<T>,
) -> Result<SolveReport<T>> {
    if params.mu != T::zero() {
        return Err(Error::InvalidParams(
            "the limit problem needs mu = 0".into(),
        ));
    }
    solve_mountain_pass(ws, params, gn, cfg, None)
}
