//! Run configuration: JSON file values overlaid by command-line flags.

use std::path::{Path, PathBuf};

use nc_soliton::{Grid1D, Window, C64};
use serde::{Deserialize, Serialize};

/// Configuration or usage problem; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

pub type ConfigResult<T> = std::result::Result<T, ConfigError>;

fn bad<T>(msg: impl Into<String>) -> ConfigResult<T> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Every setting any command understands. Unset fields fall back to the
/// library defaults for the command at hand.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// `[start, stop, step]`, inclusive of `stop` up to rounding.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_range: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thetas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub windows: Vec<String>,
    /// Gaussian phase `re` or `re,im`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub only: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> ConfigResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| ConfigError(format!("invalid config {}: {e}", path.display())))
    }

    /// Fields set in `flags` win over `self`.
    pub fn overlay(self, flags: RunConfig) -> RunConfig {
        RunConfig {
            theta: flags.theta.or(self.theta),
            theta_range: flags.theta_range.or(self.theta_range),
            thetas: flags.thetas.or(self.thetas),
            windows: if flags.windows.is_empty() { self.windows } else { flags.windows },
            lambda: flags.lambda.or(self.lambda),
            grid_t: flags.grid_t.or(self.grid_t),
            grid_n: flags.grid_n.or(self.grid_n),
            k: flags.k.or(self.k),
            l: flags.l.or(self.l),
            r: flags.r.or(self.r),
            tolerance: flags.tolerance.or(self.tolerance),
            only: if flags.only.is_empty() { self.only } else { flags.only },
            output: flags.output.or(self.output),
            format: flags.format.or(self.format),
        }
    }

    pub fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    pub fn tolerance(&self) -> ConfigResult<Option<f64>> {
        match self.tolerance {
            Some(t) if !(t.is_finite() && t > 0.0) => bad(format!("tolerance must be positive, got {t}")),
            t => Ok(t),
        }
    }

    /// The single window of `moyal`/`torus`, with `--lambda` applied.
    pub fn window(&self) -> ConfigResult<Window> {
        let ws = self.parsed_windows()?;
        let w = match ws.as_slice() {
            [] => Window::gaussian(),
            [w] => w.clone(),
            _ => return bad("this command takes a single --window"),
        };
        match (&self.lambda, w) {
            (None, w) => Ok(w),
            (Some(text), w @ Window::Gaussian { .. }) => Ok(w.with_lambda(parse_lambda(text)?)),
            (Some(_), w) => bad(format!("--lambda applies to Gaussian windows only, not {w}")),
        }
    }

    pub fn parsed_windows(&self) -> ConfigResult<Vec<Window>> {
        self.windows.iter().map(|s| s.parse::<Window>().map_err(|e| ConfigError(e.to_string()))).collect()
    }

    pub fn theta(&self) -> ConfigResult<f64> {
        let Some(t) = self.theta else {
            return bad("--theta is required");
        };
        check_theta(t)?;
        Ok(t)
    }

    /// Sweep points from `thetas` or `theta_range`, in order.
    pub fn sweep_thetas(&self) -> ConfigResult<Vec<f64>> {
        let thetas = match (&self.thetas, self.theta_range, self.theta) {
            (Some(ts), None, None) => ts.clone(),
            (None, Some(range), None) => expand_range(range)?,
            (None, None, Some(t)) => vec![t],
            (None, None, None) => return bad("sweep needs --theta-range or --thetas"),
            _ => return bad("give exactly one of --theta, --theta-range and --thetas"),
        };
        if thetas.is_empty() {
            return bad("no theta values to sweep");
        }
        for &t in &thetas {
            check_theta(t)?;
        }
        Ok(thetas)
    }

    /// Grid override; both or neither of `grid_t`, `grid_n` may be given.
    pub fn grid(&self) -> ConfigResult<Option<Grid1D>> {
        match (self.grid_t, self.grid_n) {
            (None, None) => Ok(None),
            (Some(t), Some(n)) => Grid1D::new(t, n).map(Some).map_err(|e| ConfigError(format!("invalid grid: {e}"))),
            (Some(_), None) => bad("--grid-T needs --grid-N"),
            (None, Some(n)) if n == 0 => bad("--grid-N must be positive"),
            (None, Some(_)) => bad("--grid-N needs --grid-T"),
        }
    }
}

fn check_theta(t: f64) -> ConfigResult<()> {
    if !(t > 0.0 && t < 1.0) {
        return bad(format!("theta must lie strictly between 0 and 1, got {t}"));
    }
    Ok(())
}

pub fn parse_lambda(text: &str) -> ConfigResult<C64> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| ConfigError(format!("bad lambda component `{s}`")));
    let parts: Vec<&str> = text.split(',').collect();
    let c = match parts.as_slice() {
        [re] => C64::new(num(re)?, 0.0),
        [re, im] => C64::new(num(re)?, num(im)?),
        _ => return bad(format!("lambda must be `re` or `re,im`, got `{text}`")),
    };
    if !(c.re.is_finite() && c.im.is_finite()) {
        return bad("lambda must be finite");
    }
    Ok(c)
}

/// Points `start + i·step` up to `stop`, rounded to 12 decimals so that
/// decimal inputs print as typed.
pub fn expand_range([start, stop, step]: [f64; 3]) -> ConfigResult<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite() && step > 0.0 && stop >= start) {
        return bad(format!("bad theta range [{start}, {stop}, {step}]"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if n > 100_000 {
        return bad("theta range has too many points");
    }
    Ok((0..n).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect())
}
