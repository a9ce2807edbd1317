//! Subcommand bodies. Each writes its artifacts under the output directory
//! and returns the lines of its stdout summary.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::{json, Value};

use normsol_core::analytic::{
    landscape_h, landscape_h_tilde, mass_for_fraction, multiplier_bounds, rescale_constants,
    thresholds, GnProvenance,
};
use normsol_core::harness::{
    decay_check, search_witness, sweep_a, sweep_mu, SweepOptions, SweepResult,
};
use normsol_core::json::{self as js, num};
use normsol_core::radial::io::{format_profile, ProfileHeader};
use normsol_core::solve::{
    gn_constant_estimate, solve_ground, solve_limit, solve_mountain_pass, validate_gn, Workspace,
};
use normsol_core::{GnConstant, ProblemParams, RadialGrid, RadialProfile};

use crate::config::{Format, GnSetting, MassSpec, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchArg {
    Ground,
    Mp,
    Limit,
}

impl BranchArg {
    pub fn label(self) -> &'static str {
        match self {
            BranchArg::Ground => "ground",
            BranchArg::Mp => "mp",
            BranchArg::Limit => "limit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisArg {
    Mu,
    A,
}

/// What a command produced: stdout lines and whether the numerical goal was met.
#[derive(Debug, Default)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub failure: Option<String>,
}

pub struct Context {
    pub config: RunConfig,
    pub command: String,
}

impl Context {
    fn out_dir(&self) -> Result<&Path, CliError> {
        let dir = self.config.output_dir.as_path();
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(dir)
    }

    fn provenance(&self) -> Value {
        let cfg: serde_json::Map<String, Value> = self
            .config
            .pairs()
            .into_iter()
            .map(|(k, v)| (k.to_string(), Value::String(v)))
            .collect();
        json!({
            "tool": "normsol",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": cfg,
        })
    }

    /// The resolved config as `#` comment lines.
    fn comment_block(&self) -> String {
        let mut s = format!("# normsol {} {}\n", env!("CARGO_PKG_VERSION"), self.command);
        for (k, v) in self.config.pairs() {
            s.push_str(&format!("# config {k} = {v}\n"));
        }
        s
    }

    fn write(&self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        let path = self.out_dir()?.join(name);
        fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    fn write_json(&self, name: &str, result: Value) -> Result<PathBuf, CliError> {
        let doc = json!({ "provenance": self.provenance(), "result": result });
        let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
        self.write(name, &(text + "\n"))
    }

    /// Profile file with the config as comments after the header line.
    fn write_profile(
        &self,
        name: &str,
        header: &ProfileHeader,
        u: &RadialProfile,
    ) -> Result<PathBuf, CliError> {
        let text = format_profile(header, u);
        let (head, body) = text.split_once('\n').unwrap_or((&text, ""));
        self.write(name, &format!("{head}\n{}{body}", self.comment_block()))
    }

    fn grid(&self) -> Result<Arc<RadialGrid>, CliError> {
        Ok(Arc::new(RadialGrid::new(self.config.n, self.config.grid)?))
    }
}

/// The GN constant from the config, estimating (through the cache) when asked.
fn resolve_gn(ctx: &Context, out: &mut Outcome) -> Result<GnConstant, CliError> {
    match ctx.config.gn {
        GnSetting::Value(c) => Ok(GnConstant::user(c)?),
        GnSetting::Estimate => {
            let (entry, hit) = cached_gn(ctx)?;
            out.lines.push(format!(
                "gn: C = {} ({})",
                entry.gn.c_np,
                if hit { "cache hit" } else { "estimated" }
            ));
            Ok(entry.gn)
        }
    }
}

fn resolve_params(ctx: &Context, gn: &GnConstant) -> Result<ProblemParams, CliError> {
    let c = &ctx.config;
    let a = match c.mass {
        MassSpec::Value(a) => a,
        MassSpec::Fraction(f) => mass_for_fraction(c.n, c.p, c.mu, gn, f)?,
    };
    Ok(ProblemParams::new(c.n, c.p, a, c.mu)?)
}

struct GnEntry {
    gn: GnConstant,
    refined: f64,
    iterations: usize,
}

fn cache_path(ctx: &Context) -> Result<PathBuf, CliError> {
    let c = &ctx.config;
    let dir = ctx.out_dir()?.join("gn_cache");
    fs::create_dir_all(&dir)?;
    Ok(dir.join(format!(
        "gn_N{}_p{:.16e}_{}.json",
        c.n,
        c.p,
        c.grid.signature()
    )))
}

fn read_cache(path: &Path) -> Option<GnEntry> {
    let v: Value = serde_json::from_str(&fs::read_to_string(path).ok()?).ok()?;
    let r = v.get("result")?;
    let f = |x: &Value| x.as_f64();
    let prov = r.get("provenance")?;
    Some(GnEntry {
        gn: GnConstant {
            c_np: f(r.get("c_np")?)?,
            provenance: GnProvenance::Estimated {
                refinement_delta: f(prov.get("refinement_delta")?)?,
                nodes: prov.get("nodes")?.as_u64()? as usize,
            },
        },
        refined: f(r.get("refined")?)?,
        iterations: r.get("iterations")?.as_u64()? as usize,
    })
}

/// Estimate keyed by `(N, p, grid signature)`; the flag reports a cache hit.
fn cached_gn(ctx: &Context) -> Result<(GnEntry, bool), CliError> {
    let path = cache_path(ctx)?;
    if let Some(entry) = read_cache(&path) {
        return Ok((entry, true));
    }
    let c = &ctx.config;
    let est = gn_constant_estimate(c.n, c.p, &c.grid, &c.solver)?;
    let entry = GnEntry {
        gn: est.constant,
        refined: est.refined,
        iterations: est.iterations,
    };
    let doc = json!({
        "provenance": { "n": c.n, "p": num(c.p), "grid": js::grid(&c.grid) },
        "result": js::gn_estimate(&est, None),
    });
    let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(&path, text + "\n")?;
    Ok((entry, false))
}

pub fn constants(ctx: &Context) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let gn = resolve_gn(ctx, &mut out)?;
    let params = resolve_params(ctx, &gn)?;
    let th = thresholds(&params, &gn);
    let hyp = params.hypotheses();
    let verdict = if th.admissible_min_flag {
        "admissible"
    } else {
        "inadmissible"
    };
    let err = |e: normsol_core::Error| json!({ "error": e.to_string() });
    let landscape = match landscape_h(&params, &gn) {
        Ok(l) => json!({
            "t_bar": num(l.t_bar), "r0": num(l.r0), "r1": num(l.r1),
            "t_max": num(l.t_max), "h_max": num(l.h_max),
        }),
        Err(e) => err(e),
    };
    let landscape_tilde = match landscape_h_tilde(&params, &gn) {
        Ok(l) => json!({ "tau_tilde": num(l.tau_tilde), "r0": num(l.r0), "r1": num(l.r1) }),
        Err(e) => err(e),
    };
    let rescale = match rescale_constants(&params) {
        Ok(r) => json!({
            "a_tilde": num(r.a_tilde), "b_tilde": num(r.b_tilde), "c_tilde_mass": num(r.c_tilde_mass),
        }),
        Err(e) => err(e),
    };
    let mb = multiplier_bounds(&params, &gn);
    let e = &params.exps;
    let result = json!({
        "params": { "N": params.n, "p": num(params.p), "a": num(params.a), "mu": num(params.mu) },
        "gn": js::gn_constant(&gn),
        "exponents": {
            "gamma_p": num(e.gamma_p), "p_bar": num(e.p_bar),
            "p_star4": num(e.p_star4.value()), "p_gamma_p": num(params.pg()),
        },
        "thresholds": {
            "c_tilde": num(th.c_tilde), "c_upper": num(th.c_upper), "c_lower": num(th.c_lower),
            "lhs": num(th.lhs), "min": num(th.min()),
            "admissible_min_flag": th.admissible_min_flag,
            "admissible_tilde": th.admissible_tilde(),
        },
        "verdict": verdict,
        "hypotheses": {
            "existence": hyp.existence, "sign_changing": hyp.sign_changing, "witness": hyp.witness,
        },
        "landscape": landscape,
        "landscape_tilde": landscape_tilde,
        "rescale": rescale,
        "multiplier_bounds": { "lower": num(mb.lower), "upper": num(mb.upper) },
    });
    let path = ctx.write_json("constants.json", result)?;
    out.lines.push(format!(
        "N = {} p = {} a = {} mu = {}: gamma_p = {}, thresholds min = {}, lhs = {}, verdict {verdict}",
        params.n,
        params.p,
        params.a,
        params.mu,
        e.gamma_p,
        th.min(),
        th.lhs
    ));
    out.lines.push(format!("wrote {}", path.display()));
    Ok(out)
}

pub fn solve(ctx: &Context, branch: BranchArg) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let gn = resolve_gn(ctx, &mut out)?;
    let mut params = resolve_params(ctx, &gn)?;
    if branch == BranchArg::Limit {
        if params.mu != 0.0 {
            eprintln!(
                "warning: the limit branch ignores problem.mu = {} and solves at mu = 0",
                params.mu
            );
        }
        params = params.with_mu(0.0)?;
    } else if !thresholds(&params, &gn).admissible_min_flag {
        return Err(CliError::Hypothesis(format!(
            "the {} branch needs mu^(p gamma_p - 2) a^(p - 2) below the smallest threshold",
            branch.label()
        )));
    }
    let grid = ctx.grid()?;
    let ws = Workspace::new(grid)?;
    let c = &ctx.config;
    let rep = match branch {
        BranchArg::Ground => solve_ground(&ws, &params, &gn, &c.solver, None),
        BranchArg::Mp => solve_mountain_pass(&ws, &params, &gn, &c.solver, None),
        BranchArg::Limit => solve_limit(&ws, &params, &gn, &c.solver),
    }?;

    let label = branch.label();
    let profile_name = format!("{label}_profile.txt");
    let mut record = js::solve_report(
        &rep,
        c.wants(Format::Profile).then_some(profile_name.as_str()),
    );
    let window = multiplier_bounds(&params, &gn);
    let o = record.as_object_mut().expect("object");
    o.insert(
        "params".into(),
        json!({ "N": params.n, "p": num(params.p), "a": num(params.a), "mu": num(params.mu) }),
    );
    o.insert("gn".into(), js::gn_constant(&gn));
    if params.mu > 0.0 {
        o.insert(
            "multiplier_bounds".into(),
            json!({ "lower": num(window.lower), "upper": num(window.upper), "contains": window.contains(rep.lambda) }),
        );
    }
    o.insert(
        "decay".into(),
        match decay_check(&rep, &params) {
            Ok(d) => js::decay(&d),
            Err(e) => json!({ "error": e.to_string() }),
        },
    );
    if c.wants(Format::Profile) {
        let header = ProfileHeader {
            dim: params.n,
            p: params.p,
            a: params.a,
            mu: params.mu,
            lambda: rep.lambda,
            branch: rep.branch.label().to_string(),
            grid: c.grid,
        };
        ctx.write_profile(&profile_name, &header, &rep.profile)?;
    }
    if c.wants(Format::Json) {
        ctx.write_json(&format!("{label}.json"), record)?;
    }
    out.lines.push(format!(
        "{label}: E = {:.16e} lambda = {:.16e} pohozaev = {:.3e} grad = {:.3e} iterations = {} sign changes = {}",
        rep.energy, rep.lambda, rep.pohozaev_residual, rep.grad_norm, rep.iterations, rep.diagnostics.sign_changes
    ));
    Ok(out)
}

pub fn sweep(ctx: &Context, axis: AxisArg, values: &[f64]) -> Result<Outcome, CliError> {
    if values.is_empty() {
        return Err(CliError::Config(
            "sweep needs at least one value (--values)".into(),
        ));
    }
    let mut out = Outcome::default();
    let gn = resolve_gn(ctx, &mut out)?;
    let params = resolve_params(ctx, &gn)?;
    let c = &ctx.config;
    let opts = SweepOptions {
        grid: ctx.grid()?,
        cfg: c.solver,
        q_list: c.sweep_q.clone(),
        workers: c.workers,
    };
    let res = match axis {
        AxisArg::Mu => sweep_mu(&params, &gn, values, &opts),
        AxisArg::A => sweep_a(&params, &gn, values, &opts),
    }?;
    let name = format!("sweep_{}", res.axis.label());
    if c.wants(Format::Csv) {
        ctx.write(
            &format!("{name}.csv"),
            &(ctx.comment_block() + &csv_text(&res)?),
        )?;
    }
    if c.wants(Format::Plot) {
        ctx.write(
            &format!("{name}_plot.txt"),
            &(ctx.comment_block() + &res.plot_data()),
        )?;
    }
    if c.wants(Format::Json) {
        let rows: Vec<Value> = res
            .records()
            .into_iter()
            .map(|r| {
                Value::Object(
                    res.columns()
                        .into_iter()
                        .zip(r.into_iter().map(Value::String))
                        .collect(),
                )
            })
            .collect();
        let limit = res.limit.as_ref().map(|l| match l {
            Ok(s) => json!({ "energy": num(s.energy), "lambda": num(s.lambda) }),
            Err(e) => json!({ "error": e }),
        });
        ctx.write_json(
            &format!("{name}.json"),
            json!({ "axis": res.axis.label(), "rows": rows, "limit": limit }),
        )?;
    }
    let failed: Vec<String> = res
        .records()
        .iter()
        .zip(&res.rows)
        .filter(|(r, _)| r.last().is_some_and(|s| s != "ok"))
        .map(|(r, row)| {
            format!(
                "{} = {}: {}",
                res.axis.label(),
                row.value,
                r.last().cloned().unwrap_or_default()
            )
        })
        .collect();
    out.lines.push(format!("{name}: {} points", res.rows.len()));
    if !failed.is_empty() {
        out.failure = Some(failed.join("; "));
    }
    Ok(out)
}

fn csv_text(res: &SweepResult<f64>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(res.columns()).map_err(io)?;
    for r in res.records() {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

pub fn witness(ctx: &Context) -> Result<Outcome, CliError> {
    let c = &ctx.config;
    if c.n < 5 || c.p >= 4.0 {
        return Err(CliError::Hypothesis(format!(
            "the Bessel test-function bound needs N >= 5 and p < 4 (the truncated Bessel profile \
             is only admissible in that range), got N = {} and p = {}",
            c.n, c.p
        )));
    }
    let mut out = Outcome::default();
    let gn = resolve_gn(ctx, &mut out)?;
    let params = resolve_params(ctx, &gn)?;
    let search = search_witness(&params, &gn, &c.cutoff, c.m_start, c.m_max)?;
    let w = &search.witness;
    let profile_name = "witness_profile.txt";
    let mut record = js::witness(w, c.wants(Format::Profile).then_some(profile_name));
    let attempts: Vec<Value> = search
        .attempts
        .iter()
        .map(|&(m, margin)| json!({ "m": num(m), "margin": num(margin) }))
        .collect();
    record
        .as_object_mut()
        .expect("object")
        .insert("attempts".into(), Value::Array(attempts));
    if c.wants(Format::Profile) {
        let header = ProfileHeader {
            dim: params.n,
            p: params.p,
            a: params.a,
            mu: params.mu,
            lambda: f64::NAN,
            branch: "witness".into(),
            grid: w.profile.grid.spec,
        };
        ctx.write_profile(profile_name, &header, &w.profile)?;
    }
    if c.wants(Format::Json) {
        ctx.write_json("witness.json", record)?;
    }
    out.lines.push(format!(
        "witness: m = {} margin = {:.6e} implied bound = {:.16e}",
        w.m, w.bound_margin, w.implied_bound
    ));
    if !search.certified() {
        out.failure = Some(format!(
            "bound not achieved for m <= {}: margin {:.6e} at m = {}",
            c.m_max, w.bound_margin, w.m
        ));
    }
    Ok(out)
}

pub fn gn(ctx: &Context) -> Result<Outcome, CliError> {
    let c = &ctx.config;
    let mut out = Outcome::default();
    let (entry, hit) = cached_gn(ctx)?;
    let grid = ctx.grid()?;
    let val = validate_gn(&entry.gn, &grid, c.p, c.gn_samples, c.gn_slack, c.gn_seed)?;
    let delta = match entry.gn.provenance {
        GnProvenance::Estimated {
            refinement_delta, ..
        } => refinement_delta,
        GnProvenance::UserSupplied => f64::NAN,
    };
    let mut record = js::gn_constant(&entry.gn);
    let o = record.as_object_mut().expect("object");
    o.insert("refined".into(), num(entry.refined));
    o.insert("refinement_delta".into(), num(delta));
    o.insert("iterations".into(), entry.iterations.into());
    o.insert(
        "cache".into(),
        Value::String(if hit { "hit" } else { "miss" }.into()),
    );
    o.insert(
        "validation".into(),
        json!({
            "samples": val.samples, "worst_ratio": num(val.worst_ratio),
            "slack": num(val.slack), "passed": val.passed(),
        }),
    );
    if c.wants(Format::Json) {
        ctx.write_json("gn.json", record)?;
    }
    out.lines.push(format!(
        "gn: C = {:.16e} refinement delta = {:.3e} ({})",
        entry.gn.c_np,
        delta,
        if hit {
            "cache hit"
        } else {
            "cache miss, estimated"
        }
    ));
    out.lines.push(format!(
        "validation: {} samples, worst ratio {:.6}, {}",
        val.samples,
        val.worst_ratio,
        if val.passed() { "passed" } else { "FAILED" }
    ));
    if !val.passed() {
        out.failure = Some(format!(
            "inequality violated: worst ratio {}",
            val.worst_ratio
        ));
    }
    Ok(out)
}
