//! Command bodies. Each returns the exit code of a completed run, or a
//! [`RunError`] that says whether the configuration or the computation failed.

use std::io::Write;

use nc_soliton::checks::{self, CheckOutcome};
use nc_soliton::lattice::TorusContext;
use nc_soliton::moyal::{build_moyal_projection_from_window, default_signal_grid, moyal_report, MoyalReport};
use nc_soliton::report::Assertion;
use nc_soliton::soliton::{csv_row, make_report, report_for, reports_to_csv, sweep, torus_window, SolitonReport, CSV_HEADER};
use nc_soliton::tf::default_symbol_grid;
use nc_soliton::Window;
use serde::Serialize;

use crate::config::{ConfigError, Format, RunConfig};

pub const SCHEMA: u32 = 1;

pub enum RunError {
    Config(ConfigError),
    Failed(String),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

fn setup(e: nc_soliton::Error) -> RunError {
    RunError::Config(ConfigError(e.to_string()))
}

fn failed(e: impl std::fmt::Display) -> RunError {
    RunError::Failed(e.to_string())
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), RunError> {
    match &cfg.output {
        Some(path) => std::fs::write(path, text).map_err(|e| failed(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(failed),
    }
}

fn retune(assertions: &mut [Assertion], tolerance: Option<f64>) {
    if let Some(t) = tolerance {
        for a in assertions {
            *a = a.with_tolerance(t);
        }
    }
}

fn finish(command: &str, failures: &[&str]) -> u8 {
    if failures.is_empty() {
        eprintln!("{command}: all assertions passed");
        0
    } else {
        eprintln!("{command}: failed assertions: {}", failures.join(", "));
        1
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    schema: u32,
    command: &'a str,
    config: &'a RunConfig,
    passed: bool,
    failures: Vec<&'a str>,
    report: &'a T,
}

fn json<T: Serialize>(doc: &T) -> Result<String, RunError> {
    let mut s = serde_json::to_string_pretty(doc).map_err(failed)?;
    s.push('\n');
    Ok(s)
}

const MOYAL_CSV_HEADER: &str =
    "window,projection_residual,trace_re,charge,action,bound_gap,sd_residual,eigenvalue_re,eigenvalue_im,eigen_residual,self_dual";

fn moyal_csv(r: &MoyalReport) -> String {
    let nums = [
        r.projection_residual,
        r.trace_re,
        r.charge,
        r.action,
        r.bound_gap,
        r.sd_residual,
        r.eigenvalue_re,
        r.eigenvalue_im,
        r.eigen_residual,
    ];
    let cells: Vec<String> = nums.iter().map(|v| format!("{v:.16e}")).collect();
    format!("{MOYAL_CSV_HEADER}\n\"{}\",{},{}\n", r.window.replace('"', "\"\""), cells.join(","), r.self_dual)
}

pub fn cmd_moyal(cfg: &RunConfig) -> Result<u8, RunError> {
    let w = cfg.window()?;
    let tolerance = cfg.tolerance()?;
    let grid = cfg.grid()?.unwrap_or_else(default_signal_grid);
    let reach = default_symbol_grid().half_width();
    if grid.half_width() < 2.0 * reach {
        return Err(ConfigError(format!("--grid-T must be at least {} to hold phase-space shifts up to {reach}", 2.0 * reach)).into());
    }
    w.realize(&grid).map_err(setup)?;
    let p = build_moyal_projection_from_window(&w, &grid).map_err(failed)?;
    let mut report = moyal_report(&w.to_string(), &p).map_err(failed)?;
    retune(&mut report.assertions, tolerance);
    let failures = report.failures();
    let text = match cfg.format(Format::Json) {
        Format::Json => json(&Document { schema: SCHEMA, command: "moyal", config: cfg, passed: failures.is_empty(), failures: failures.clone(), report: &report })?,
        Format::Csv => moyal_csv(&report),
    };
    emit(cfg, &text)?;
    Ok(finish("moyal", &failures))
}

fn torus_context(cfg: &RunConfig, w: &Window, theta: f64) -> Result<Option<TorusContext>, RunError> {
    let grid = cfg.grid()?;
    if grid.is_none() && cfg.k.is_none() && cfg.l.is_none() && cfg.r.is_none() {
        return Ok(None);
    }
    let k = cfg.k.unwrap_or_else(|| TorusContext::default_left_radius(theta));
    let l = cfg.l.unwrap_or(k);
    let r = cfg.r.unwrap_or_else(|| TorusContext::default_right_radius(theta, w));
    let ctx = match grid {
        Some(g) => TorusContext::new(theta, g, k, l, r),
        None => TorusContext::for_window_with(theta, w, k, l, r),
    };
    ctx.map(Some).map_err(setup)
}

pub fn cmd_torus(cfg: &RunConfig) -> Result<u8, RunError> {
    let theta = cfg.theta()?;
    let w = cfg.window()?;
    let tolerance = cfg.tolerance()?;
    let adapted = torus_window(&w, theta);
    let mut report = match torus_context(cfg, &adapted, theta)? {
        Some(ctx) => {
            adapted.realize(&ctx.grid).map_err(setup)?;
            make_report(&adapted, &ctx).map_err(failed)?
        }
        None => report_for(&w, theta).map_err(failed)?,
    };
    retune(&mut report.assertions, tolerance);
    if !report.is_frame {
        eprintln!("torus: {} is not a frame at theta = {theta}", report.window);
    }
    let failures = report.failures();
    let text = match cfg.format(Format::Json) {
        Format::Json => json(&Document { schema: SCHEMA, command: "torus", config: cfg, passed: failures.is_empty(), failures: failures.clone(), report: &report })?,
        Format::Csv => format!("{CSV_HEADER}\n{}\n", csv_row(&report)),
    };
    emit(cfg, &text)?;
    Ok(finish("torus", &failures))
}

#[derive(Serialize)]
struct SweepError {
    theta: f64,
    window: String,
    error: String,
}

#[derive(Serialize)]
struct SweepDocument<'a> {
    schema: u32,
    command: &'a str,
    config: &'a RunConfig,
    rows: Vec<&'a SolitonReport>,
    errors: Vec<SweepError>,
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<u8, RunError> {
    let thetas = cfg.sweep_thetas()?;
    let mut windows = cfg.parsed_windows()?;
    if windows.is_empty() {
        windows.push(Window::gaussian());
    }
    if cfg.lambda.is_some() || cfg.grid()?.is_some() || cfg.k.is_some() || cfg.l.is_some() || cfg.r.is_some() {
        return Err(ConfigError("sweep sizes grids and truncations per point; --lambda, --grid-*, --K, --L and --R are not accepted".into()).into());
    }
    let results = sweep(&thetas, &windows);
    let labels = thetas.iter().flat_map(|&t| windows.iter().map(move |w| (t, w.to_string())));
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for ((theta, window), r) in labels.zip(&results) {
        match r {
            Ok(report) => rows.push(report),
            Err(e) => {
                eprintln!("sweep: {window} at theta = {theta}: {e}");
                errors.push(SweepError { theta, window, error: e.to_string() });
            }
        }
    }
    let (ok, bad) = (rows.len(), errors.len());
    let text = match cfg.format(Format::Csv) {
        Format::Csv => reports_to_csv(rows.iter().copied()),
        Format::Json => json(&SweepDocument { schema: SCHEMA, command: "sweep", config: cfg, rows, errors })?,
    };
    emit(cfg, &text)?;
    eprintln!("sweep: {ok} rows, {bad} errors");
    Ok(if bad == 0 { 0 } else { 1 })
}

#[derive(Serialize)]
struct VerifyDocument<'a> {
    schema: u32,
    command: &'a str,
    config: &'a RunConfig,
    passed: bool,
    checks: &'a [CheckOutcome],
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<u8, RunError> {
    let tolerance = cfg.tolerance()?;
    let only = if cfg.only.is_empty() { None } else { Some(cfg.only.as_slice()) };
    let outcomes = checks::run_checks(only, tolerance).map_err(setup)?;
    let width = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(0);
    let mut table = String::new();
    for o in &outcomes {
        let value = match (&o.value, &o.error) {
            (Some(v), _) => format!("{v:.3e}"),
            (None, Some(e)) => format!("error: {e}"),
            (None, None) => "-".into(),
        };
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        table.push_str(&format!("{verdict}  {:<width$}  {value:>10}  (tolerance {:.1e})\n", o.name, o.tolerance));
    }
    print!("{table}");
    let passed = outcomes.iter().all(|o| o.passed);
    if cfg.output.is_some() {
        let text = match cfg.format(Format::Json) {
            Format::Json => json(&VerifyDocument { schema: SCHEMA, command: "verify", config: cfg, passed, checks: &outcomes })?,
            Format::Csv => {
                let mut s = String::from("name,value,tolerance,passed\n");
                for o in &outcomes {
                    let v = o.value.map(|v| format!("{v:.16e}")).unwrap_or_default();
                    s.push_str(&format!("{},{v},{:.16e},{}\n", o.name, o.tolerance, o.passed));
                }
                s
            }
        };
        emit(cfg, &text)?;
    }
    let failures: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name.as_str()).collect();
    Ok(finish("verify", &failures))
}
