//! Parameter sweeps toward `mu -> 0+` and `a -> 0+`, and the tail-decay check.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::analytic::{multiplier_bounds, GnConstant, ProblemParams};
use crate::error::{Error, Result};
use crate::radial::io::sig17;
use crate::radial::{RadialGrid, RadialProfile};
use crate::scalar::{lit, wide, Scalar};
use crate::solve::{
    solve_ground, solve_limit, solve_mountain_pass, SolveReport, SolverConfig, Workspace,
};

/// Pohozaev residual accepted per row, relative to `1 + dd`.
const ROW_POHOZAEV_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Mu,
    A,
}

impl SweepAxis {
    pub fn label(&self) -> &'static str {
        match self {
            SweepAxis::Mu => "mu",
            SweepAxis::A => "a",
        }
    }
}

/// Per-solve quantities kept in a sweep table.
#[derive(Debug, Clone)]
pub struct PointSummary<T> {
    pub energy: T,
    pub lambda: T,
    pub dd_over_mm: T,
    pub gg_over_mm: T,
    pub laplacian_norm: T,
    pub concentration: T,
    /// `|u / |u|_2|_q` for each configured `q`.
    pub lq: Vec<T>,
    pub pohozaev_residual: T,
    pub sign_changes: usize,
    /// `|P| <= 1e-8 (1 + dd)` and `lambda` inside the multiplier window.
    pub invariants_hold: bool,
}

impl<T: Scalar> PointSummary<T> {
    fn from_report(
        rep: &SolveReport<T>,
        params: &ProblemParams<T>,
        gn: &GnConstant<T>,
        q_list: &[T],
    ) -> Self {
        let q = rep.quadruple;
        let window = multiplier_bounds(params, gn);
        let in_window = params.mu == T::zero() || window.contains(rep.lambda);
        let pohozaev_ok =
            rep.pohozaev_residual.abs() <= lit::<T>(ROW_POHOZAEV_TOL) * (T::one() + q.dd);
        PointSummary {
            energy: rep.energy,
            lambda: rep.lambda,
            dd_over_mm: q.dd / q.mm,
            gg_over_mm: q.gg / q.mm,
            laplacian_norm: q.dd.sqrt(),
            concentration: rep.profile.concentration(params.mu),
            lq: q_list
                .iter()
                .map(|&x| rep.profile.normalized_lq(x))
                .collect(),
            pohozaev_residual: rep.pohozaev_residual,
            sign_changes: rep.diagnostics.sign_changes,
            invariants_hold: in_window && pohozaev_ok,
        }
    }
}

/// One sweep point; solver failures are kept as messages.
#[derive(Debug, Clone)]
pub struct SweepRow<T> {
    pub value: T,
    pub ground: std::result::Result<PointSummary<T>, String>,
    /// Mountain-pass summary; `mu` sweeps only.
    pub mp: Option<std::result::Result<PointSummary<T>, String>>,
    /// Relative H^2 distance of the mountain-pass profile to the `mu = 0` profile.
    pub h2_distance: Option<T>,
    /// `-mu^2 a^2 / 8`.
    pub reference_level: T,
    /// `-mu^2 / 4`.
    pub lambda_threshold: T,
    pub mu: T,
}

impl<T: Scalar> SweepRow<T> {
    /// `m_r / (-mu^2 a^2 / 8)`.
    pub fn energy_ratio(&self) -> Option<T> {
        self.ground
            .as_ref()
            .ok()
            .map(|g| g.energy / self.reference_level)
    }

    /// `lambda / (-mu^2 / 4)`.
    pub fn lambda_ratio(&self) -> Option<T> {
        self.ground
            .as_ref()
            .ok()
            .map(|g| g.lambda / self.lambda_threshold)
    }

    /// `(dd / mm) / (mu^2 / 4)`.
    pub fn dd_ratio(&self) -> Option<T> {
        self.ground
            .as_ref()
            .ok()
            .map(|g| -g.dd_over_mm / self.lambda_threshold)
    }

    /// `(gg / mm) / (mu / 2)`.
    pub fn gg_ratio(&self) -> Option<T> {
        self.ground
            .as_ref()
            .ok()
            .map(|g| g.gg_over_mm * lit(2.0) / self.mu)
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult<T> {
    pub axis: SweepAxis,
    pub q_list: Vec<T>,
    pub rows: Vec<SweepRow<T>>,
    /// `sigma(a, 0)` for `mu` sweeps.
    pub limit: Option<std::result::Result<PointSummary<T>, String>>,
}

/// Solver settings shared by the points of a sweep.
#[derive(Debug, Clone)]
pub struct SweepOptions<T> {
    pub grid: Arc<RadialGrid<T>>,
    pub cfg: SolverConfig<T>,
    /// Exponents of the normalized `L^q` columns; empty selects `p` and `(p + p_bar) / 2`.
    pub q_list: Vec<T>,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
}

fn in_pool<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParams(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn check_monotone<T: Scalar>(values: &[T], decreasing_only: bool) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidParams(
            "sweep needs at least one value".into(),
        ));
    }
    let inc = values.windows(2).all(|w| w[1] > w[0]);
    let dec = values.windows(2).all(|w| w[1] < w[0]);
    if !(dec || (inc && !decreasing_only)) {
        return Err(Error::InvalidParams(
            "sweep values must be strictly monotone".into(),
        ));
    }
    Ok(())
}

fn default_q<T: Scalar>(params: &ProblemParams<T>, q_list: &[T]) -> Vec<T> {
    if q_list.is_empty() {
        vec![params.p, (params.p + params.exps.p_bar) / lit(2.0)]
    } else {
        q_list.to_vec()
    }
}

/// Relative weighted H^2 distance `|u - v|_{H^2} / |v|_{H^2}` with
/// `|w|_{H^2}^2 = dd + gg + mm`.
pub fn h2_distance<T: Scalar>(u: &RadialProfile<T>, v: &RadialProfile<T>) -> Result<T> {
    let h2 = |w: &[T]| {
        let g = &*v.grid;
        let lw = g.lap(w);
        g.inner(&lw, &lw) + g.grad_sq(w) + g.inner(w, w)
    };
    if u.values.len() != v.values.len() {
        return Err(Error::InvalidParams(
            "H^2 distance needs profiles on one grid".into(),
        ));
    }
    let diff: Vec<T> = u
        .values
        .iter()
        .zip(&v.values)
        .map(|(a, b)| *a - *b)
        .collect();
    Ok((h2(&diff) / h2(&v.values)).sqrt())
}

/// Ground and mountain-pass solves along `mu_values` at fixed `(N, p, a)`,
/// with the `mu = 0` limit as reference.
pub fn sweep_mu<T: Scalar>(
    params: &ProblemParams<T>,
    gn: &GnConstant<T>,
    mu_values: &[T],
    opts: &SweepOptions<T>,
) -> Result<SweepResult<T>> {
    check_monotone(mu_values, false)?;
    let q_list = default_q(params, &opts.q_list);
    let pts: Vec<ProblemParams<T>> = mu_values
        .iter()
        .map(|&mu| params.with_mu(mu))
        .collect::<Result<_>>()?;
    if let Some(bad) = pts
        .iter()
        .find(|pp| !pp.mu.is_finite() || !(pp.mu > T::zero()))
    {
        return Err(Error::InvalidParams(format!(
            "mu sweep values must be positive, got {}",
            bad.mu
        )));
    }
    let ws = Workspace::new(opts.grid.clone())?;
    let limit_params = params.with_mu(T::zero())?;
    let (limit, rows) = in_pool(opts.workers, || {
        let limit = solve_limit(&ws, &limit_params, gn, &opts.cfg);
        let rows: Vec<SweepRow<T>> = pts
            .par_iter()
            .map(|pp| {
                let ground = solve_ground(&ws, pp, gn, &opts.cfg, None)
                    .map(|r| PointSummary::from_report(&r, pp, gn, &q_list))
                    .map_err(|e| e.to_string());
                let mp = solve_mountain_pass(&ws, pp, gn, &opts.cfg, None);
                let h2 = match (&mp, &limit) {
                    (Ok(m), Ok(l)) => h2_distance(&m.profile, &l.profile).ok(),
                    _ => None,
                };
                SweepRow {
                    value: pp.mu,
                    ground,
                    mp: Some(
                        mp.map(|r| PointSummary::from_report(&r, pp, gn, &q_list))
                            .map_err(|e| e.to_string()),
                    ),
                    h2_distance: h2,
                    reference_level: -pp.mu * pp.mu * pp.a * pp.a / lit(8.0),
                    lambda_threshold: -pp.mu * pp.mu / lit(4.0),
                    mu: pp.mu,
                }
            })
            .collect();
        (limit, rows)
    })?;
    Ok(SweepResult {
        axis: SweepAxis::Mu,
        limit: Some(
            limit
                .map(|r| PointSummary::from_report(&r, &limit_params, gn, &q_list))
                .map_err(|e| e.to_string()),
        ),
        q_list,
        rows,
    })
}

/// Ground solves along decreasing `a_values` at fixed `(N, p, mu)`.
pub fn sweep_a<T: Scalar>(
    params: &ProblemParams<T>,
    gn: &GnConstant<T>,
    a_values: &[T],
    opts: &SweepOptions<T>,
) -> Result<SweepResult<T>> {
    check_monotone(a_values, true)?;
    let q_list = default_q(params, &opts.q_list);
    let pts: Vec<ProblemParams<T>> = a_values
        .iter()
        .map(|&a| params.with_a(a))
        .collect::<Result<_>>()?;
    let ws = Workspace::new(opts.grid.clone())?;
    let rows = in_pool(opts.workers, || {
        pts.par_iter()
            .map(|pp| SweepRow {
                value: pp.a,
                ground: solve_ground(&ws, pp, gn, &opts.cfg, None)
                    .map(|r| PointSummary::from_report(&r, pp, gn, &q_list))
                    .map_err(|e| e.to_string()),
                mp: None,
                h2_distance: None,
                reference_level: -pp.mu * pp.mu * pp.a * pp.a / lit(8.0),
                lambda_threshold: -pp.mu * pp.mu / lit(4.0),
                mu: pp.mu,
            })
            .collect()
    })?;
    Ok(SweepResult {
        axis: SweepAxis::A,
        q_list,
        rows,
        limit: None,
    })
}

fn cell<T: Scalar>(x: Option<T>) -> String {
    x.map(|v| sig17(wide(v))).unwrap_or_default()
}

impl<T: Scalar> SweepResult<T> {
    /// Column names in output order.
    pub fn columns(&self) -> Vec<String> {
        let mut c: Vec<String> = [
            self.axis.label(),
            "ground_energy",
            "ground_lambda",
            "ground_dd_over_mm",
            "ground_gg_over_mm",
            "ground_laplacian_norm",
            "ground_concentration",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        c.extend(
            self.q_list
                .iter()
                .map(|q| format!("ground_lq_{}", wide(*q))),
        );
        c.extend(
            [
                "energy_ratio",
                "lambda_ratio",
                "dd_ratio",
                "gg_ratio",
                "ground_sign_changes",
                "ground_invariants",
                "mp_energy",
                "mp_lambda",
                "mp_sign_changes",
                "mp_invariants",
                "mp_h2_distance_to_limit",
                "limit_energy",
                "status",
            ]
            .iter()
            .map(|s| s.to_string()),
        );
        c
    }

    /// Rows as text cells, failures left blank with the message in `status`.
    pub fn records(&self) -> Vec<Vec<String>> {
        let limit_energy = self
            .limit
            .as_ref()
            .and_then(|l| l.as_ref().ok())
            .map(|l| l.energy);
        self.rows
            .iter()
            .map(|row| {
                let g = row.ground.as_ref().ok();
                let m = row.mp.as_ref().and_then(|m| m.as_ref().ok());
                let mut r = vec![
                    sig17(wide(row.value)),
                    cell(g.map(|g| g.energy)),
                    cell(g.map(|g| g.lambda)),
                    cell(g.map(|g| g.dd_over_mm)),
                    cell(g.map(|g| g.gg_over_mm)),
                    cell(g.map(|g| g.laplacian_norm)),
                    cell(g.map(|g| g.concentration)),
                ];
                for k in 0..self.q_list.len() {
                    r.push(cell(g.map(|g| g.lq[k])));
                }
                r.push(cell(row.energy_ratio()));
                r.push(cell(row.lambda_ratio()));
                r.push(cell(row.dd_ratio()));
                r.push(cell(row.gg_ratio()));
                r.push(g.map(|g| g.sign_changes.to_string()).unwrap_or_default());
                r.push(g.map(|g| g.invariants_hold.to_string()).unwrap_or_default());
                r.push(cell(m.map(|m| m.energy)));
                r.push(cell(m.map(|m| m.lambda)));
                r.push(m.map(|m| m.sign_changes.to_string()).unwrap_or_default());
                r.push(m.map(|m| m.invariants_hold.to_string()).unwrap_or_default());
                r.push(cell(row.h2_distance));
                r.push(cell(limit_energy));
                let mut status = Vec::new();
                if let Err(e) = &row.ground {
                    status.push(format!("ground: {e}"));
                }
                if let Some(Err(e)) = &row.mp {
                    status.push(format!("mp: {e}"));
                }
                r.push(if status.is_empty() {
                    "ok".into()
                } else {
                    status.join("; ")
                });
                r
            })
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(self.columns())?;
        for r in self.records() {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Plot data: the sweep parameter against each ratio column, one block
    /// per column separated by blank lines.
    pub fn plot_data(&self) -> String {
        let mut s = String::new();
        let series: [(&str, fn(&SweepRow<T>) -> Option<T>); 5] = [
            ("energy_ratio", |r| r.energy_ratio()),
            ("lambda_ratio", |r| r.lambda_ratio()),
            ("dd_ratio", |r| r.dd_ratio()),
            ("gg_ratio", |r| r.gg_ratio()),
            ("mp_energy", |r| {
                r.mp.as_ref()
                    .and_then(|m| m.as_ref().ok())
                    .map(|m| m.energy)
            }),
        ];
        for (name, f) in series {
            let _ = writeln!(s, "# {} {}", self.axis.label(), name);
            for row in &self.rows {
                if let Some(v) = f(row) {
                    let _ = writeln!(s, "{} {}", sig17(wide(row.value)), sig17(wide(v)));
                }
            }
            s.push_str("\n\n");
        }
        s
    }
}

/// Tail decay of a converged profile against the predicted rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayCheck {
    pub fitted: f64,
    /// `sqrt(2 sqrt(-lambda) + mu) / 2`.
    pub predicted: f64,
    /// `fitted - (predicted - 0.05)`.
    pub margin: f64,
    /// Real part of the slowest root `k` of `k^4 + mu k^2 - lambda = 0`,
    /// the rate of the linearized tail: `sqrt(2 sqrt(-lambda) - mu) / 2`.
    pub linearized: f64,
    pub window: (f64, f64),
}

/// Fits the tail where `|u|` falls from `1e-4` to `1e-11` of its maximum.
pub fn decay_check<T: Scalar>(
    report: &SolveReport<T>,
    params: &ProblemParams<T>,
) -> Result<DecayCheck> {
    let lambda = wide(report.lambda);
    let mu = wide(params.mu);
    if !(lambda < -mu * mu / 4.0) {
        return Err(Error::Hypothesis(format!(
            "decay rate needs lambda < -mu^2/4, got lambda = {lambda}"
        )));
    }
    let u = &report.profile;
    let g = &u.grid;
    let top = wide(u.max_abs());
    // Running envelope from the right: max |u| over [r, rmax].
    let mut env = vec![0.0; g.len()];
    let mut acc = 0.0f64;
    for i in (0..g.len()).rev() {
        acc = acc.max(wide(u.values[i].abs()));
        env[i] = acc;
    }
    let lo = env.iter().position(|&e| e < 1e-4 * top);
    let hi = env.iter().position(|&e| e < 1e-11 * top);
    let (lo, hi) = match (lo, hi) {
        (Some(lo), Some(hi)) if hi > lo => (lo, hi),
        _ => {
            return Err(Error::WindowTooNoisy {
                residual: f64::INFINITY,
                points: 0,
            })
        }
    };
    let window = (wide(g.r[lo]), wide(g.r[hi]));
    let fitted = wide(u.decay_rate_fit(g.r[lo], g.r[hi])?);
    let predicted = (2.0 * (-lambda).sqrt() + mu).sqrt() / 2.0;
    Ok(DecayCheck {
        fitted,
        predicted,
        margin: fitted - (predicted - 0.05),
        linearized: (2.0 * (-lambda).sqrt() - mu).max(0.0).sqrt() / 2.0,
        window,
    })
}
