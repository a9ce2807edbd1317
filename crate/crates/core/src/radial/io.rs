//! Two-column `(r, u)` text format with a one-line metadata header.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};

use super::{GridSpec, RadialGrid, RadialProfile};

/// Metadata carried in the header line.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileHeader {
    pub dim: usize,
    pub p: f64,
    pub a: f64,
    pub mu: f64,
    pub lambda: f64,
    pub branch: String,
    pub grid: GridSpec,
}

/// Scientific notation with 17 significant digits.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn format_profile(header: &ProfileHeader, u: &RadialProfile<f64>) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# N={} p={} a={} mu={} lambda={} branch={} nodes={} rmax={} fine_ratio={} refine_radius={}",
        header.dim,
        sig17(header.p),
        sig17(header.a),
        sig17(header.mu),
        sig17(header.lambda),
        header.branch,
        header.grid.nodes,
        sig17(header.grid.rmax),
        sig17(header.grid.fine_ratio),
        sig17(header.grid.refine_radius),
    );
    s.push_str("# r u\n");
    for (r, v) in u.grid.r.iter().zip(&u.values) {
        let _ = writeln!(s, "{} {}", sig17(*r), sig17(*v));
    }
    s
}

fn field<'a>(map: &HashMap<&str, &'a str>, key: &str) -> Result<&'a str> {
    map.get(key)
        .copied()
        .ok_or_else(|| Error::Parse(format!("profile header lacks `{key}`")))
}

fn num<F: std::str::FromStr>(map: &HashMap<&str, &str>, key: &str) -> Result<F> {
    field(map, key)?
        .parse()
        .map_err(|_| Error::Parse(format!("profile header field `{key}` is not a number")))
}

pub fn parse_profile(text: &str) -> Result<(ProfileHeader, RadialProfile<f64>)> {
    let mut lines = text.lines();
    let head = lines
        .next()
        .and_then(|l| l.strip_prefix('#'))
        .ok_or_else(|| Error::Parse("missing profile header".into()))?;
    let map: HashMap<&str, &str> = head
        .split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .collect();
    let header = ProfileHeader {
        dim: num(&map, "N")?,
        p: num(&map, "p")?,
        a: num(&map, "a")?,
        mu: num(&map, "mu")?,
        lambda: num(&map, "lambda")?,
        branch: field(&map, "branch")?.to_string(),
        grid: GridSpec {
            nodes: num(&map, "nodes")?,
            rmax: num(&map, "rmax")?,
            fine_ratio: num(&map, "fine_ratio")?,
            refine_radius: num(&map, "refine_radius")?,
        },
    };
    let grid = Arc::new(RadialGrid::<f64>::new(header.dim, header.grid)?);
    let mut values = Vec::with_capacity(grid.len());
    for (lineno, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<f64> {
            tok.and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad data line {}", lineno + 2)))
        };
        let r = parse(it.next())?;
        let v = parse(it.next())?;
        let i = values.len();
        if i >= grid.len() || r != grid.r[i] {
            return Err(Error::Parse(format!(
                "node {i} at r = {r} does not match the grid in the header"
            )));
        }
        values.push(v);
    }
    let profile = RadialProfile::new(grid, values)?;
    Ok((header, profile))
}

pub fn write_profile(path: &Path, header: &ProfileHeader, u: &RadialProfile<f64>) -> Result<()> {
    std::fs::write(path, format_profile(header, u))?;
    Ok(())
}

pub fn read_profile(path: &Path) -> Result<(ProfileHeader, RadialProfile<f64>)> {
    parse_profile(&std::fs::read_to_string(path)?)
}
