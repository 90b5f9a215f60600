//! Profile CSV and JSON report files.

use std::fs;
use std::path::Path;

use qball_core::analysis::{ChargeTrend, PropertyReport, SweepResult};
use qball_core::functionals::Method;
use qball_core::{Profile, RadialGrid, SolveReport};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const PROFILE_HEADER: [&str; 5] = ["r", "f", "g", "f_prime", "g_prime"];

fn write_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_write_err(path: &Path, e: csv::Error) -> CliError {
    CliError::Write {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

/// `{:.16e}` keeps 17 significant digits, enough to round-trip every f64.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Profile as CSV, one row per node.
pub fn profile_csv(profile: &Profile) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(PROFILE_HEADER).expect("in-memory write");
    for k in 0..profile.grid.len() {
        w.write_record([
            num(profile.grid.nodes()[k]),
            num(profile.f[k]),
            num(profile.g[k]),
            num(profile.f_prime[k]),
            num(profile.g_prime[k]),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn write_profile(profile: &Profile, path: &Path) -> Result<()> {
    create_parent(path)?;
    fs::write(path, profile_csv(profile)).map_err(write_err(path))
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir).map_err(write_err(dir)),
        _ => Ok(()),
    }
}

/// Reads a profile written by [`write_profile`]. The radii must be exactly
/// the nodes of a uniform grid ending at the last row.
pub fn read_profile(path: &Path) -> Result<Profile> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_profile(&text).map_err(|message| CliError::Schema {
        path: path.to_path_buf(),
        message,
    })
}

pub fn parse_profile(text: &str) -> Result<Profile, String> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header = rd.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(PROFILE_HEADER) {
        return Err(format!("header must be `{}`", PROFILE_HEADER.join(",")));
    }
    let mut cols: [Vec<f64>; 5] = Default::default();
    for (row, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        if rec.len() != 5 {
            return Err(format!("row {}: expected 5 fields, got {}", row + 1, rec.len()));
        }
        for (c, field) in rec.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                format!(
                    "row {}, column {}: `{field}` is not a number",
                    row + 1,
                    PROFILE_HEADER[c]
                )
            })?;
            cols[c].push(v);
        }
    }
    let [r, f, g, fp, gp] = cols;
    let n = r.len();
    let r_max = *r.last().ok_or("no data rows")?;
    let grid = RadialGrid::new(r_max, n).map_err(|e| e.to_string())?;
    if let Some(k) = grid
        .nodes()
        .iter()
        .zip(&r)
        .position(|(a, b)| a.to_bits() != b.to_bits())
    {
        return Err(format!("row {}: r = {} is not a node of the uniform grid", k + 1, r[k]));
    }
    Profile::from_parts(grid, f, g, fp, gp).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub r_max: f64,
    pub n: usize,
    pub spacing: f64,
}

impl From<&RadialGrid> for GridSummary {
    fn from(g: &RadialGrid) -> Self {
        Self {
            r_max: g.r_max(),
            n: g.len(),
            spacing: g.spacing(),
        }
    }
}

/// Self-describing record of one solver run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub method: Method,
    /// `None` on success, otherwise the solver error.
    pub error: Option<String>,
    pub grid: GridSummary,
    pub solve: Option<SolveReport>,
    pub properties: Option<PropertyReport>,
    pub config: RunConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub quantity: &'static str,
    pub minimizer: f64,
    pub shooting: f64,
    pub relative_difference: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub tolerance: f64,
    pub pass: bool,
    pub rows: Vec<CompareRow>,
    pub same_clause_pattern: bool,
    pub config: RunConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub result: SweepResult,
    pub trend: ChargeTrend,
    pub terminal_ratio_limit: f64,
    pub pass: bool,
    pub config: RunConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub profile: String,
    pub properties: PropertyReport,
    pub config: RunConfig,
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    create_parent(path)?;
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    fs::write(path, text).map_err(write_err(path))
}

pub const SWEEP_HEADER: [&str; 8] = [
    "g_inf",
    "q",
    "e_total",
    "i",
    "converged",
    "nontrivial",
    "iterations",
    "error",
];

pub fn write_sweep_csv(result: &SweepResult, path: &Path) -> Result<()> {
    create_parent(path)?;
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_write_err(path, e))?;
    w.write_record(SWEEP_HEADER).map_err(|e| csv_write_err(path, e))?;
    for row in &result.rows {
        w.write_record([
            num(row.g_inf),
            num(row.q),
            num(row.e_total),
            num(row.i),
            row.converged.to_string(),
            row.nontrivial.to_string(),
            row.iterations.to_string(),
            row.error.clone().unwrap_or_default(),
        ])
        .map_err(|e| csv_write_err(path, e))?;
    }
    w.flush().map_err(write_err(path))
}

/// `(g_inf, Q, usable)` triples from a sweep CSV.
pub fn read_sweep_csv(path: &Path) -> Result<Vec<(f64, f64, bool)>> {
    let schema = |message: String| CliError::Schema {
        path: path.to_path_buf(),
        message,
    };
    let mut rd = csv::Reader::from_path(path).map_err(|e| CliError::Read {
        path: path.to_path_buf(),
        source: e.into(),
    })?;
    let header = rd.headers().map_err(|e| schema(e.to_string()))?;
    if header.iter().ne(SWEEP_HEADER) {
        return Err(schema(format!("header must be `{}`", SWEEP_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| schema(e.to_string()))?;
        let parse = |i: usize| {
            rec[i]
                .parse::<f64>()
                .map_err(|_| schema(format!("bad number `{}`", &rec[i])))
        };
        let usable = &rec[4] == "true" && &rec[5] == "true" && rec[7].is_empty();
        out.push((parse(0)?, parse(1)?, usable));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Profile {
        let grid = RadialGrid::new(7.3, 97).unwrap();
        let f = grid.sample(|r| (-r * r / 3.0).exp() / 3.0_f64.sqrt());
        let g = grid.sample(|r| 0.3 - 0.1 / (1.0 + r * std::f64::consts::PI));
        Profile::new(grid, f, g).unwrap()
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let p = sample();
        let text = profile_csv(&p);
        assert_eq!(text.lines().count(), p.grid.len() + 1);
        let back = parse_profile(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(profile_csv(&back), text);
    }

    #[test]
    fn schema_mismatch_is_reported() {
        let text = profile_csv(&sample());
        let bad = text.replacen("f_prime", "df", 1);
        assert!(parse_profile(&bad).unwrap_err().contains("header"));
        let mut lines: Vec<&str> = text.lines().collect();
        lines.remove(5);
        assert!(parse_profile(&lines.join("\n")).unwrap_err().contains("not a node"));
        let broken = text.replacen("e-1,", "x,", 1);
        assert!(parse_profile(&broken).is_err());
    }
}
