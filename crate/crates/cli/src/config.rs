//! Run configuration: line-oriented `key = value` text with dotted keys.
//!
//! Layers, lowest precedence first: built-in defaults, `NORMSOL_*`
//! environment variables, the config file, command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use normsol_core::harness::CutoffShape;
use normsol_core::radial::GridSpec;
use normsol_core::SolverConfig;

use crate::error::CliError;

/// Prefix of environment overrides; `NORMSOL_GRID__FINE_RATIO` sets `grid.fine_ratio`.
pub const ENV_PREFIX: &str = "NORMSOL_";

/// Every accepted key, in rendering order.
pub const KEYS: &[&str] = &[
    "problem.N",
    "problem.p",
    "problem.a",
    "problem.a_fraction",
    "problem.mu",
    "grid.nodes",
    "grid.rmax",
    "grid.fine_ratio",
    "grid.refine_radius",
    "solver.step0",
    "solver.max_iter",
    "solver.tol_grad",
    "solver.tol_pohozaev",
    "solver.backtrack",
    "solver.armijo",
    "solver.cadence",
    "solver.newton_switch",
    "solver.newton_iter",
    "solver.starts",
    "solver.seed",
    "gn.value",
    "gn.samples",
    "gn.slack",
    "gn.seed",
    "witness.cutoff",
    "witness.ramp_eps",
    "witness.m_start",
    "witness.m_max",
    "sweep.q",
    "sweep.workers",
    "output.dir",
    "output.formats",
];

/// Where a raw value came from, for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub enum Origin {
    File { path: String, line: usize },
    Env(String),
    Flag(&'static str),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::File { path, line } => write!(f, "{path}:{line}"),
            Origin::Env(var) => write!(f, "environment {var}"),
            Origin::Flag(name) => write!(f, "flag --{name}"),
        }
    }
}

/// Unvalidated key-value pairs with their origins.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, Origin)>,
}

impl RawConfig {
    /// Parses config text; later lines override earlier ones.
    pub fn parse_text(text: &str, path: &str) -> Result<Self, CliError> {
        let mut raw = RawConfig::default();
        raw.merge_text(text, path)?;
        Ok(raw)
    }

    pub fn merge_text(&mut self, text: &str, path: &str) -> Result<(), CliError> {
        for (i, line) in text.lines().enumerate() {
            let origin = Origin::File {
                path: path.to_string(),
                line: i + 1,
            };
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(CliError::config(
                    &origin,
                    None,
                    format!("expected `key = value`, got `{body}`"),
                ));
            };
            self.set(key.trim(), value.trim(), origin)?;
        }
        Ok(())
    }

    /// Collects `NORMSOL_SECTION__KEY` variables.
    pub fn merge_env(
        &mut self,
        vars: impl IntoIterator<Item = (String, String)>,
    ) -> Result<(), CliError> {
        let mut found: Vec<(String, String)> = vars
            .into_iter()
            .filter(|(k, _)| k.starts_with(ENV_PREFIX))
            .collect();
        found.sort();
        for (var, value) in found {
            let key = env_key(&var[ENV_PREFIX.len()..]);
            self.set(&key, value.trim(), Origin::Env(var.clone()))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str, origin: Origin) -> Result<(), CliError> {
        if !KEYS.contains(&key) {
            return Err(CliError::config(&origin, Some(key), "unknown key".into()));
        }
        self.entries
            .insert(key.to_string(), (value.to_string(), origin));
        Ok(())
    }

    /// Entries of `other` take precedence.
    pub fn overlay(&mut self, other: RawConfig) {
        self.entries.extend(other.entries);
    }

    fn take(&self, key: &str) -> Option<&(String, Origin)> {
        debug_assert!(KEYS.contains(&key), "{key} missing from KEYS");
        self.entries.get(key)
    }
}

/// `GRID__FINE_RATIO` to `grid.fine_ratio`; `PROBLEM__N` keeps its capital.
fn env_key(rest: &str) -> String {
    let lower = rest.to_ascii_lowercase().replace("__", ".");
    KEYS.iter()
        .find(|k| k.eq_ignore_ascii_case(&lower))
        .map(|k| k.to_string())
        .unwrap_or(lower)
}

/// Mass given directly or as a fraction of the admissibility threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MassSpec {
    Value(f64),
    /// `mu^{p g - 2} a^{p - 2}` at this fraction of the smallest threshold.
    Fraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GnSetting {
    Value(f64),
    Estimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Json,
    Csv,
    Profile,
    Plot,
}

impl Format {
    fn label(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Profile => "profile",
            Format::Plot => "plot",
        }
    }
}

/// Validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub p: f64,
    pub mass: MassSpec,
    pub mu: f64,
    pub grid: GridSpec,
    pub solver: SolverConfig,
    pub gn: GnSetting,
    pub gn_samples: usize,
    pub gn_slack: f64,
    pub gn_seed: u64,
    pub cutoff: CutoffShape,
    pub m_start: f64,
    pub m_max: f64,
    pub sweep_q: Vec<f64>,
    pub workers: usize,
    pub output_dir: PathBuf,
    pub formats: Vec<Format>,
}

/// Default ramp parameter when `witness.cutoff = ramp`.
const DEFAULT_RAMP_EPS: f64 = 0.05;

/// Grid defaults for the command-line tool: wide enough for the slowly
/// decaying local minimizer at moderate `mu`, fine enough in the core for
/// the concentrated mountain-pass state.
pub fn default_grid() -> GridSpec {
    GridSpec {
        nodes: 16384,
        rmax: 160.0,
        fine_ratio: 0.01,
        refine_radius: 1.0,
    }
}

struct Reader<'a> {
    raw: &'a RawConfig,
}

impl Reader<'_> {
    fn parsed<V>(
        &self,
        key: &str,
        what: &str,
        f: impl Fn(&str) -> Option<V>,
    ) -> Result<Option<V>, CliError> {
        match self.raw.take(key) {
            None => Ok(None),
            Some((text, origin)) => f(text).map(Some).ok_or_else(|| {
                CliError::config(origin, Some(key), format!("expected {what}, got `{text}`"))
            }),
        }
    }

    fn float(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.parsed(key, "a finite number", |s| {
            s.parse::<f64>().ok().filter(|x| x.is_finite())
        })
    }

    fn float_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.float(key)?.unwrap_or(default))
    }

    fn count_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        Ok(self
            .parsed(key, "a nonnegative integer", |s| s.parse::<usize>().ok())?
            .unwrap_or(default))
    }

    fn seed_or(&self, key: &str, default: u64) -> Result<u64, CliError> {
        Ok(self
            .parsed(key, "a nonnegative integer", |s| s.parse::<u64>().ok())?
            .unwrap_or(default))
    }

    fn required<V>(&self, key: &str, v: Option<V>) -> Result<V, CliError> {
        v.ok_or_else(|| CliError::MissingKey(key.to_string()))
    }

    fn invalid(&self, key: &str, msg: String) -> CliError {
        match self.raw.take(key) {
            Some((_, origin)) => CliError::config(origin, Some(key), msg),
            None => CliError::Config(format!("{key}: {msg}")),
        }
    }
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, CliError> {
        let r = Reader { raw };
        let n = r.parsed("problem.N", "an integer >= 2", |s| {
            s.parse::<usize>().ok().filter(|&n| n >= 2)
        })?;
        let n = r.required("problem.N", n)?;
        let p = r.required("problem.p", r.float("problem.p")?)?;
        let mass = match (r.float("problem.a")?, r.float("problem.a_fraction")?) {
            (Some(a), None) => MassSpec::Value(a),
            (None, Some(f)) => MassSpec::Fraction(f),
            (None, None) => return Err(CliError::MissingKey("problem.a".into())),
            (Some(_), Some(_)) => {
                return Err(r.invalid(
                    "problem.a_fraction",
                    "give either problem.a or problem.a_fraction".into(),
                ))
            }
        };
        let mu = r.required("problem.mu", r.float("problem.mu")?)?;

        let g = default_grid();
        let grid = GridSpec {
            nodes: r.count_or("grid.nodes", g.nodes)?,
            rmax: r.float_or("grid.rmax", g.rmax)?,
            fine_ratio: r.float_or("grid.fine_ratio", g.fine_ratio)?,
            refine_radius: r.float_or("grid.refine_radius", g.refine_radius)?,
        };
        grid.validate()
            .map_err(|e| r.invalid("grid.nodes", e.to_string()))?;

        let d = SolverConfig::default();
        let solver = SolverConfig {
            step0: r.float_or("solver.step0", d.step0)?,
            max_iter: r.count_or("solver.max_iter", d.max_iter)?,
            tol_grad: r.float_or("solver.tol_grad", d.tol_grad)?,
            tol_pohozaev: r.float_or("solver.tol_pohozaev", d.tol_pohozaev)?,
            backtrack: r.float_or("solver.backtrack", d.backtrack)?,
            armijo: r.float_or("solver.armijo", d.armijo)?,
            cadence: r.count_or("solver.cadence", d.cadence)?,
            newton_switch: r.float_or("solver.newton_switch", d.newton_switch)?,
            newton_iter: r.count_or("solver.newton_iter", d.newton_iter)?,
            starts: r.count_or("solver.starts", d.starts)?,
            seed: r.seed_or("solver.seed", d.seed)?,
        };
        solver
            .validate()
            .map_err(|e| CliError::Config(format!("solver: {e}")))?;

        let gn = r
            .parsed("gn.value", "a positive number or `estimate`", |s| {
                if s == "estimate" {
                    Some(GnSetting::Estimate)
                } else {
                    s.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite() && *x > 0.0)
                        .map(GnSetting::Value)
                }
            })?
            .unwrap_or(GnSetting::Estimate);
        let gn_slack = r.float_or("gn.slack", 1e-3)?;
        if gn_slack < 0.0 {
            return Err(r.invalid("gn.slack", "must be >= 0".into()));
        }

        let eps = r.float("witness.ramp_eps")?;
        let cutoff = r
            .parsed("witness.cutoff", "`standard` or `ramp`", |s| match s {
                "standard" => Some(CutoffShape::Standard),
                "ramp" => Some(CutoffShape::Ramp {
                    eps: eps.unwrap_or(DEFAULT_RAMP_EPS),
                }),
                _ => None,
            })?
            .unwrap_or(CutoffShape::Standard);
        if eps.is_some() && cutoff == CutoffShape::Standard {
            return Err(r.invalid(
                "witness.ramp_eps",
                "only meaningful with witness.cutoff = ramp".into(),
            ));
        }
        if let CutoffShape::Ramp { eps } = cutoff {
            if eps <= 0.0 {
                return Err(r.invalid("witness.ramp_eps", "must be > 0".into()));
            }
        }
        let m_start = r.float_or("witness.m_start", 8.0)?;
        let m_max = r.float_or("witness.m_max", 1024.0)?;
        if !(m_start >= 1.0 && m_max >= m_start) {
            return Err(r.invalid("witness.m_max", "need 1 <= m_start <= m_max".into()));
        }

        let sweep_q = r
            .parsed("sweep.q", "a comma-separated list of numbers", |s| {
                list(s)
                    .map(|x| x.parse::<f64>().ok().filter(|v| v.is_finite() && *v > 0.0))
                    .collect()
            })?
            .unwrap_or_default();
        let formats = r
            .parsed(
                "output.formats",
                "a list drawn from json, csv, profile, plot",
                |s| {
                    let mut v: Vec<Format> = list(s)
                        .map(|x| match x {
                            "json" => Some(Format::Json),
                            "csv" => Some(Format::Csv),
                            "profile" => Some(Format::Profile),
                            "plot" => Some(Format::Plot),
                            _ => None,
                        })
                        .collect::<Option<_>>()?;
                    v.sort();
                    v.dedup();
                    Some(v)
                },
            )?
            .unwrap_or_else(|| vec![Format::Json, Format::Csv, Format::Profile, Format::Plot]);

        Ok(RunConfig {
            n,
            p,
            mass,
            mu,
            grid,
            solver,
            gn,
            gn_samples: r.count_or("gn.samples", 200)?,
            gn_slack,
            gn_seed: r.seed_or("gn.seed", 42)?,
            cutoff,
            m_start,
            m_max,
            sweep_q,
            workers: r.count_or("sweep.workers", 0)?,
            output_dir: r
                .parsed("output.dir", "a path", |s| {
                    (!s.is_empty()).then(|| PathBuf::from(s))
                })?
                .unwrap_or_else(|| PathBuf::from("normsol-out")),
            formats,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        Self::from_raw(&RawConfig::parse_text(text, "<text>")?)
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    /// Resolved `(key, value)` pairs; parsing their text gives back `self`.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let f = |x: f64| format!("{x:?}");
        let mut out = vec![("problem.N", self.n.to_string()), ("problem.p", f(self.p))];
        match self.mass {
            MassSpec::Value(a) => out.push(("problem.a", f(a))),
            MassSpec::Fraction(x) => out.push(("problem.a_fraction", f(x))),
        }
        let s = &self.solver;
        out.extend([
            ("problem.mu", f(self.mu)),
            ("grid.nodes", self.grid.nodes.to_string()),
            ("grid.rmax", f(self.grid.rmax)),
            ("grid.fine_ratio", f(self.grid.fine_ratio)),
            ("grid.refine_radius", f(self.grid.refine_radius)),
            ("solver.step0", f(s.step0)),
            ("solver.max_iter", s.max_iter.to_string()),
            ("solver.tol_grad", f(s.tol_grad)),
            ("solver.tol_pohozaev", f(s.tol_pohozaev)),
            ("solver.backtrack", f(s.backtrack)),
            ("solver.armijo", f(s.armijo)),
            ("solver.cadence", s.cadence.to_string()),
            ("solver.newton_switch", f(s.newton_switch)),
            ("solver.newton_iter", s.newton_iter.to_string()),
            ("solver.starts", s.starts.to_string()),
            ("solver.seed", s.seed.to_string()),
            (
                "gn.value",
                match self.gn {
                    GnSetting::Value(c) => f(c),
                    GnSetting::Estimate => "estimate".into(),
                },
            ),
            ("gn.samples", self.gn_samples.to_string()),
            ("gn.slack", f(self.gn_slack)),
            ("gn.seed", self.gn_seed.to_string()),
        ]);
        match self.cutoff {
            CutoffShape::Standard => out.push(("witness.cutoff", "standard".into())),
            CutoffShape::Ramp { eps } => {
                out.push(("witness.cutoff", "ramp".into()));
                out.push(("witness.ramp_eps", f(eps)));
            }
        }
        out.extend([
            ("witness.m_start", f(self.m_start)),
            ("witness.m_max", f(self.m_max)),
        ]);
        if !self.sweep_q.is_empty() {
            out.push((
                "sweep.q",
                self.sweep_q
                    .iter()
                    .map(|&q| f(q))
                    .collect::<Vec<_>>()
                    .join(","),
            ));
        }
        out.extend([
            ("sweep.workers", self.workers.to_string()),
            ("output.dir", self.output_dir.display().to_string()),
            (
                "output.formats",
                self.formats
                    .iter()
                    .map(|x| x.label())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
        ]);
        out
    }

    pub fn render(&self) -> String {
        self.pairs()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

fn list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty())
}
