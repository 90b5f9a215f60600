//! Subcommand implementations. Each returns `Ok(())` only when every check
//! it runs passes.

use std::io::Write;
use std::path::{Path, PathBuf};

use qball_core::analysis::{analyze, sweep_row, PassPattern, PropertyReport, SweepResult};
use qball_core::functionals::Method;
use qball_core::minimizer::minimize;
use qball_core::shooting::shoot;
use qball_core::{Profile, RadialGrid, Solution};
use rayon::prelude::*;

use crate::config::{Format, RunConfig};
use crate::error::{CliError, Result, Stage};
use crate::io::{
    read_profile, read_sweep_csv, write_json, write_profile, write_sweep_csv, CompareReport, CompareRow, GridSummary,
    RunReport, SweepReport, VerifyReport,
};
use crate::plot::{Chart, Series};

/// Largest relative difference accepted by `compare`.
pub const COMPARE_TOLERANCE: f64 = 1e-3;

/// Loaded configuration plus the resolved output directory.
pub struct Run {
    pub config: RunConfig,
    pub out: PathBuf,
    pub workers: Option<usize>,
}

fn stem(method: Method) -> &'static str {
    match method {
        Method::Minimizer => "minimizer",
        Method::Shooting => "shooting",
    }
}

fn check(stage: Stage, message: impl Into<String>) -> CliError {
    CliError::Check {
        stage,
        message: message.into(),
    }
}

pub fn validate(cfg: &RunConfig, w: &mut dyn Write) -> Result<()> {
    let v = cfg.model.validate().map_err(CliError::Validation)?;
    let _ = writeln!(w, "admissibility: {:?}", v.admissibility);
    for c in &v.checks {
        let _ = writeln!(
            w,
            "{:<22} {:<5} margin {:>+14.6e}  {}{}",
            c.predicate.name(),
            if c.holds { "ok" } else { "FAIL" },
            c.margin,
            c.predicate.statement(),
            if c.required { "" } else { " (not required)" }
        );
    }
    if v.is_ok() {
        let _ = writeln!(w, "parameters admissible");
        Ok(())
    } else {
        Err(CliError::Validation(qball_core::Error::Parameter(v.violations)))
    }
}

fn grid_for(cfg: &RunConfig) -> Result<RadialGrid> {
    cfg.model.ensure_valid().map_err(CliError::Validation)?;
    cfg.radial_grid().map_err(CliError::Validation)
}

fn run_solver(cfg: &RunConfig, grid: &RadialGrid, method: Method) -> qball_core::Result<Solution> {
    match method {
        Method::Minimizer => minimize(&cfg.model, grid, &cfg.minimize),
        Method::Shooting => shoot(&cfg.model, grid, &cfg.shoot),
    }
}

/// Writes profile and report for whatever the solver produced and returns
/// the solution (if any) with its clause report.
fn persist(
    run: &Run,
    grid: &RadialGrid,
    method: Method,
    outcome: &qball_core::Result<Solution>,
) -> Result<Option<(Solution, PropertyReport)>> {
    let cfg = &run.config;
    let sol = match outcome {
        Ok(s) => Some(s.clone()),
        Err(e) => e.partial().cloned(),
    };
    let props = sol.as_ref().map(|s| analyze(&s.profile, &cfg.model, &cfg.analysis));
    let name = stem(method);
    if let Some(s) = &sol {
        if cfg.output.wants(Format::Csv) {
            write_profile(&s.profile, &run.out.join(format!("{name}.csv")))?;
        }
        if cfg.output.wants(Format::Svg) {
            plot_profiles(&[(name, &s.profile)], &run.out)?;
        }
    }
    if cfg.output.wants(Format::Json) {
        let report = RunReport {
            method,
            error: outcome.as_ref().err().map(|e| e.to_string()),
            grid: GridSummary::from(grid),
            solve: sol.as_ref().map(|s| s.report.clone()),
            properties: props.clone(),
            config: cfg.clone(),
        };
        write_json(&report, &run.out.join(format!("{name}.json")))?;
    }
    Ok(sol.zip(props))
}

fn print_solution(w: &mut dyn Write, method: Method, s: &Solution) {
    let r = &s.report;
    let _ = writeln!(w, "[{}]", stem(method));
    let _ = writeln!(w, "  f(0) = {:.10}   g(0) = {:.10}", r.f_origin, r.g_origin);
    let _ = writeln!(
        w,
        "  I = {:.10e}   E_total = {:.10e}   Q = {:.10e}",
        r.i, r.e_total, r.q
    );
    let _ = writeln!(
        w,
        "  residuals f {:.3e}  g {:.3e}   converged {}  nontrivial {}  iterations {}",
        r.residual_f, r.residual_g, r.converged, r.nontrivial, r.iterations
    );
}

fn print_pattern(w: &mut dyn Write, props: &PropertyReport) {
    let p = props.pattern();
    let flag = |b: bool| if b { "pass" } else { "FAIL" };
    let _ = writeln!(
        w,
        "  clauses: bounds {}  monotone {}  origin {}  decay {}  tail {}  charge-link {}",
        flag(p.bounds),
        flag(p.monotone),
        flag(p.origin),
        flag(p.decay),
        flag(p.tail),
        flag(p.charge_link)
    );
    if let Some(d) = &props.decay {
        let _ = writeln!(
            w,
            "  decay: sigma {:.6}  fitted {:.6} (plain {:.6})",
            d.sigma, d.sigma_coulomb, d.sigma_plain
        );
    }
    if let Some(t) = &props.tail {
        let _ = writeln!(
            w,
            "  tail: beta {:.6e}  flatness {:.2e}  charge beta {:.6e}",
            t.beta, t.deviation, t.charge_beta
        );
    }
    for n in &props.notes {
        let _ = writeln!(w, "  note: {n}");
    }
}

/// `solve` (minimiser) and `oracle` (shooting).
pub fn solve(run: &Run, method: Method, w: &mut dyn Write) -> Result<()> {
    let grid = grid_for(&run.config)?;
    let outcome = run_solver(&run.config, &grid, method);
    let kept = persist(run, &grid, method, &outcome)?;
    if let Some((s, props)) = &kept {
        print_solution(w, method, s);
        print_pattern(w, props);
    }
    let sol = outcome.map_err(CliError::Solve)?;
    if !sol.report.converged {
        return Err(check(Stage::Solve, format!("{} did not converge", stem(method))));
    }
    let (_, props) = kept.expect("successful solves are kept");
    if !props.all_ok() {
        return Err(check(Stage::Analysis, "one or more clause checks failed"));
    }
    Ok(())
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn compare(run: &Run, w: &mut dyn Write) -> Result<()> {
    let grid = grid_for(&run.config)?;
    let (m_out, s_out) = rayon::join(
        || run_solver(&run.config, &grid, Method::Minimizer),
        || run_solver(&run.config, &grid, Method::Shooting),
    );
    let m_kept = persist(run, &grid, Method::Minimizer, &m_out)?;
    let s_kept = persist(run, &grid, Method::Shooting, &s_out)?;
    let m = m_out.map_err(CliError::Solve)?;
    let s = s_out.map_err(CliError::Solve)?;
    let (a, b) = (&m.report, &s.report);
    let rows: Vec<CompareRow> = [
        ("f(0)", a.f_origin, b.f_origin),
        ("g(0)", a.g_origin, b.g_origin),
        ("E_total", a.e_total, b.e_total),
        ("Q", a.q, b.q),
        ("I", a.i, b.i),
    ]
    .into_iter()
    .map(|(quantity, x, y)| CompareRow {
        quantity,
        minimizer: x,
        shooting: y,
        relative_difference: relative(x, y),
    })
    .collect();
    let pass = rows.iter().all(|r| r.relative_difference <= COMPARE_TOLERANCE);
    let pattern =
        |k: &Option<(Solution, PropertyReport)>| -> Option<PassPattern> { k.as_ref().map(|(_, p)| p.pattern()) };
    let same_clause_pattern = pattern(&m_kept) == pattern(&s_kept);
    let _ = writeln!(
        w,
        "{:<8} {:>22} {:>22} {:>12}",
        "quantity", "minimizer", "shooting", "rel. diff"
    );
    for r in &rows {
        let _ = writeln!(
            w,
            "{:<8} {:>22.14e} {:>22.14e} {:>12.3e}",
            r.quantity, r.minimizer, r.shooting, r.relative_difference
        );
    }
    let _ = writeln!(w, "clause patterns identical: {same_clause_pattern}");
    let report = CompareReport {
        tolerance: COMPARE_TOLERANCE,
        pass,
        rows,
        same_clause_pattern,
        config: run.config.clone(),
    };
    if run.config.output.wants(Format::Json) {
        write_json(&report, &run.out.join("compare.json"))?;
    }
    if run.config.output.wants(Format::Svg) {
        plot_profiles(&[("minimizer", &m.profile), ("shooting", &s.profile)], &run.out)?;
    }
    if !pass {
        return Err(check(
            Stage::Compare,
            format!("solvers differ by more than {COMPARE_TOLERANCE:e}"),
        ));
    }
    Ok(())
}

pub fn sweep(run: &Run, w: &mut dyn Write) -> Result<()> {
    let cfg = &run.config;
    if cfg.sweep.g_inf.is_empty() {
        return Err(CliError::Usage("sweep.g_inf is empty".into()));
    }
    let workers = run
        .workers
        .or(cfg.sweep.workers)
        .unwrap_or_else(rayon::current_num_threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {workers} workers: {e}")))?;
    let policy = cfg.grid.into();
    let rows = pool.install(|| {
        cfg.sweep
            .g_inf
            .par_iter()
            .map(|&g| sweep_row(&cfg.model, g, &policy, &cfg.minimize))
            .collect::<Vec<_>>()
    });
    let result = SweepResult::from_rows(&cfg.model, rows);
    let trend = result.trend();
    let pass = trend.holds(cfg.sweep.terminal_ratio);
    let _ = writeln!(w, "{:>8} {:>18} {:>18} {:>18}  status", "g_inf", "Q", "E_total", "I");
    for r in &result.rows {
        let status = match &r.error {
            Some(e) => e.clone(),
            None if r.usable() => "ok".into(),
            None => "not converged".into(),
        };
        let _ = writeln!(
            w,
            "{:>8.4} {:>18.10e} {:>18.10e} {:>18.10e}  {status}",
            r.g_inf, r.q, r.e_total, r.i
        );
    }
    let _ = writeln!(
        w,
        "trend: terminal ratio {:.4} (limit {}), last two decreasing {}, all usable {}",
        trend.terminal_ratio, cfg.sweep.terminal_ratio, trend.last_two_decreasing, trend.all_usable
    );
    if cfg.output.wants(Format::Csv) {
        write_sweep_csv(&result, &run.out.join("sweep.csv"))?;
    }
    if cfg.output.wants(Format::Json) {
        let report = SweepReport {
            result: result.clone(),
            trend,
            terminal_ratio_limit: cfg.sweep.terminal_ratio,
            pass,
            config: cfg.clone(),
        };
        write_json(&report, &run.out.join("sweep.json"))?;
    }
    if cfg.output.wants(Format::Svg) {
        let pts = result
            .rows
            .iter()
            .filter(|r| r.usable())
            .map(|r| (r.g_inf, r.q))
            .collect();
        charge_chart(pts, &run.out)?;
    }
    if !pass {
        return Err(check(Stage::Sweep, "charge trend check failed"));
    }
    Ok(())
}

pub fn verify(profile_path: &Path, cfg: &RunConfig, out: Option<&Path>, w: &mut dyn Write) -> Result<()> {
    cfg.model.ensure_valid().map_err(CliError::Validation)?;
    let profile = read_profile(profile_path)?;
    let props = analyze(&profile, &cfg.model, &cfg.analysis);
    let _ = writeln!(w, "[verify] {}", profile_path.display());
    print_pattern(w, &props);
    if let Some(dir) = out {
        let report = VerifyReport {
            profile: profile_path.display().to_string(),
            properties: props.clone(),
            config: cfg.clone(),
        };
        write_json(&report, &dir.join("verify.json"))?;
    }
    if !props.all_ok() {
        return Err(check(Stage::Analysis, "one or more clause checks failed"));
    }
    Ok(())
}

fn write_svg(chart: &Chart, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, chart.to_svg()).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// `f(r)`, `g(r)` and `ln(r f)` figures for one or more profiles.
pub fn plot_profiles(profiles: &[(&str, &Profile)], dir: &Path) -> Result<()> {
    let series = |pick: &dyn Fn(&Profile, usize) -> Option<f64>| -> Vec<Series> {
        profiles
            .iter()
            .map(|(name, p)| {
                let pts = (0..p.grid.len())
                    .filter_map(|k| pick(p, k).map(|y| (p.grid.nodes()[k], y)))
                    .collect();
                Series::line(*name, pts)
            })
            .collect()
    };
    let charts = [
        ("profile_f.svg", "scalar profile", "f", series(&|p, k| Some(p.f[k]))),
        ("profile_g.svg", "gauge profile", "g", series(&|p, k| Some(p.g[k]))),
        (
            "tail.svg",
            "scalar tail",
            "ln(r f)",
            series(&|p, k| {
                let v = p.grid.nodes()[k] * p.f[k];
                (v > 1e-300).then(|| v.ln())
            }),
        ),
    ];
    for (file, title, y, s) in charts {
        let chart = Chart {
            title: title.into(),
            x_label: "r".into(),
            y_label: y.into(),
            series: s,
        };
        write_svg(&chart, &dir.join(file))?;
    }
    Ok(())
}

fn charge_chart(points: Vec<(f64, f64)>, dir: &Path) -> Result<()> {
    let chart = Chart {
        title: "charge against asymptotic potential".into(),
        x_label: "g_inf".into(),
        y_label: "Q".into(),
        series: vec![Series {
            label: "Q".into(),
            points,
            markers: true,
        }],
    };
    write_svg(&chart, &dir.join("charge.svg"))
}

/// Figures from the artifacts in a run directory.
pub fn plot(run_dir: &Path, out: &Path, w: &mut dyn Write) -> Result<()> {
    if !run_dir.is_dir() {
        return Err(CliError::Read {
            path: run_dir.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "run directory not found"),
        });
    }
    let mut loaded = Vec::new();
    for name in ["minimizer", "shooting"] {
        let path = run_dir.join(format!("{name}.csv"));
        if path.is_file() {
            loaded.push((name, read_profile(&path)?));
        }
    }
    let sweep_path = run_dir.join("sweep.csv");
    let sweep = if sweep_path.is_file() {
        Some(read_sweep_csv(&sweep_path)?)
    } else {
        None
    };
    if loaded.is_empty() && sweep.is_none() {
        return Err(CliError::Read {
            path: run_dir.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no profile or sweep CSV in run directory"),
        });
    }
    if !loaded.is_empty() {
        let refs: Vec<(&str, &Profile)> = loaded.iter().map(|(n, p)| (*n, p)).collect();
        plot_profiles(&refs, out)?;
        let _ = writeln!(w, "wrote profile_f.svg, profile_g.svg, tail.svg");
    }
    if let Some(rows) = sweep {
        let pts = rows.into_iter().filter(|r| r.2).map(|(g, q, _)| (g, q)).collect();
        charge_chart(pts, out)?;
        let _ = writeln!(w, "wrote charge.svg");
    }
    Ok(())
}
