//! The window catalog: generalized Gaussians, Hermite functions and totally
//! positive functions of finite type.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{bin_frequency, fft_inplace, Grid1D, GridFunction, C64, I};

/// Relative tail (and spectral cut-off) above which synthesis is refused.
pub const SYNTHESIS_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Window {
    /// `exp(-π t²/width² - iλt)`.
    Gaussian { lambda: C64, width: f64 },
    /// The `k`-th Hermite function for the weight `exp(-πt²)`.
    Hermite { k: usize },
    /// Fourier transform `exp(-δν²) ∏ (1 + 2πi δ_j ν)^{-1}`.
    TotallyPositive { delta: f64, deltas: Vec<f64> },
}

impl Window {
    pub fn gaussian() -> Self {
        Window::Gaussian { lambda: C64::new(0.0, 0.0), width: 1.0 }
    }

    pub fn gaussian_with(lambda: C64, width: f64) -> Self {
        Window::Gaussian { lambda, width }
    }

    pub fn hermite(k: usize) -> Self {
        Window::Hermite { k }
    }

    pub fn totally_positive(delta: f64, deltas: Vec<f64>) -> Self {
        Window::TotallyPositive { delta, deltas }
    }

    /// Same window with a different Gaussian width; other kinds are unchanged.
    pub fn with_width(self, width: f64) -> Self {
        match self {
            Window::Gaussian { lambda, .. } => Window::Gaussian { lambda, width },
            other => other,
        }
    }

    /// Same window with a different Gaussian phase; other kinds are unchanged.
    pub fn with_lambda(self, lambda: C64) -> Self {
        match self {
            Window::Gaussian { width, .. } => Window::Gaussian { lambda, width },
            other => other,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| {
            Err(Error::WindowSpec { spec: self.to_string(), reason: reason.to_string() })
        };
        match self {
            Window::Gaussian { lambda, width } => {
                if !(width.is_finite() && *width > 0.0) {
                    return bad("gaussian width must be positive");
                }
                if !(lambda.re.is_finite() && lambda.im.is_finite()) {
                    return bad("gaussian phase must be finite");
                }
            }
            Window::Hermite { .. } => {}
            Window::TotallyPositive { delta, deltas } => {
                if !(delta.is_finite() && *delta > 0.0) {
                    return bad("delta must be positive");
                }
                if deltas.is_empty() {
                    return bad("at least one delta_j is required");
                }
                if deltas.iter().any(|d| !d.is_finite() || *d == 0.0) {
                    return bad("delta_j must be finite and non-zero");
                }
            }
        }
        Ok(())
    }

    /// Half-width beyond which the window stays below `tol` times its peak.
    pub fn time_extent(&self, tol: f64) -> f64 {
        let log = (1.0 / tol).ln();
        match self {
            Window::Gaussian { lambda, width } => {
                // exp(-πt²/w² + Im(λ) t) peaks at Im(λ) w²/(2π).
                let centre = lambda.im * width * width / (2.0 * PI);
                centre.abs() + width * (log / PI).sqrt()
            }
            Window::Hermite { k } => {
                let turning = ((2 * k + 1) as f64 / (2.0 * PI)).sqrt();
                turning + (log / PI).sqrt() + 0.5
            }
            Window::TotallyPositive { delta, deltas } => {
                let tau = deltas.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
                let spread: f64 = deltas.iter().map(|d| d.abs()).sum();
                tau * (log + 2.0 * deltas.len() as f64) + spread + 4.0 * delta.sqrt()
            }
        }
    }

    /// Frequency beyond which the Fourier transform stays below `tol` times its peak.
    pub fn bandwidth(&self, tol: f64) -> f64 {
        let log = (1.0 / tol).ln();
        match self {
            Window::Gaussian { lambda, width } => {
                lambda.re.abs() / (2.0 * PI) + (log / PI).sqrt() / width + lambda.im.abs() / (2.0 * PI)
            }
            Window::Hermite { k } => {
                let turning = ((2 * k + 1) as f64 / (2.0 * PI)).sqrt();
                turning + (log / PI).sqrt() + 0.5
            }
            Window::TotallyPositive { delta, deltas } => {
                let peak = tp_spectrum(*delta, deltas, 0.0).norm();
                let mut nu = 0.0;
                while tp_spectrum(*delta, deltas, nu).norm() > tol * peak && nu < 1e4 {
                    nu += 0.25;
                }
                nu
            }
        }
    }

    /// Unnormalized samples of the window and of its derivative.
    fn raw(&self, g: &Grid1D) -> Result<(Vec<C64>, Vec<C64>)> {
        self.validate()?;
        let t = g.points();
        match self {
            Window::Gaussian { lambda, width } => {
                let w2 = width * width;
                let v: Vec<C64> = t.iter().map(|&t| (-PI * t * t / w2 - I * lambda * t).exp()).collect();
                let d = t
                    .iter()
                    .zip(&v)
                    .map(|(&t, &v)| (C64::new(-2.0 * PI * t / w2, 0.0) - I * lambda) * v)
                    .collect();
                Ok((v, d))
            }
            Window::Hermite { k } => {
                let (v, d): (Vec<_>, Vec<_>) = t
                    .iter()
                    .map(|&t| {
                        let (v, d) = hermite_with_derivative(*k, t);
                        (C64::new(v, 0.0), C64::new(d, 0.0))
                    })
                    .unzip();
                Ok((v, d))
            }
            Window::TotallyPositive { delta, deltas } => Ok(tp_synthesis(*delta, deltas, g)),
        }
    }

    /// L² norm of the unnormalized samples (the reciprocal of the normalization constant).
    pub fn normalization(&self, g: &Grid1D) -> Result<f64> {
        let (v, _) = self.raw(g)?;
        Ok(GridFunction::from_parts(*g, v).norm())
    }

    pub fn realize(&self, g: &Grid1D) -> Result<RealizedWindow> {
        let (v, d) = self.raw(g)?;
        let value = GridFunction::from_parts(*g, v);
        let peak = value.peak();
        if !(peak > 0.0) || value.tail_bound() > SYNTHESIS_LIMIT * peak {
            return Err(Error::Synthesis {
                residual: value.tail_bound() / peak,
                limit: SYNTHESIS_LIMIT,
                what: "tail on the grid boundary",
            });
        }
        if let Window::TotallyPositive { delta, deltas } = self {
            let nyquist = 0.5 / g.step();
            let cut = tp_spectrum(*delta, deltas, nyquist).norm() / tp_spectrum(*delta, deltas, 0.0).norm();
            if cut > SYNTHESIS_LIMIT {
                return Err(Error::Synthesis {
                    residual: cut,
                    limit: SYNTHESIS_LIMIT,
                    what: "spectrum at the Nyquist frequency",
                });
            }
        }
        let norm = value.norm();
        let s = C64::new(1.0 / norm, 0.0);
        Ok(RealizedWindow {
            window: self.clone(),
            value: value.scale(s),
            derivative: GridFunction::from_parts(*g, d).scale(s),
            normalization: norm,
        })
    }
}

/// A window sampled on a grid together with its derivative, both at unit L² norm.
#[derive(Debug, Clone)]
pub struct RealizedWindow {
    pub window: Window,
    pub value: GridFunction,
    pub derivative: GridFunction,
    /// L² norm of the unnormalized formula on this grid.
    pub normalization: f64,
}

/// Unit-norm samples of `w` on `g`.
pub fn realize_window(w: &Window, g: &Grid1D) -> Result<GridFunction> {
    Ok(w.realize(g)?.value)
}

/// Derivative of the unit-norm window: closed form for Gaussian and Hermite,
/// Fourier multiplier `2πiν` for totally positive windows.
pub fn window_derivative(w: &Window, g: &Grid1D) -> Result<GridFunction> {
    Ok(w.realize(g)?.derivative)
}

/// Hermite function `φ_k(t)` (weight `exp(-πt²)`, unnormalized by `π^{-1/4}` and
/// the `√(2π)` Jacobian) and its `t`-derivative.
pub fn hermite_with_derivative(k: usize, t: f64) -> (f64, f64) {
    let s = (2.0 * PI).sqrt() * t;
    let mut prev = 0.0;
    let mut cur = (-0.5 * s * s).exp();
    // After the loop `cur = φ_k`, `prev = φ_{k-1}`; one more step gives φ_{k+1}.
    for j in 0..k {
        let next = (2.0 / (j + 1) as f64).sqrt() * s * cur - (j as f64 / (j + 1) as f64).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    let next = (2.0 / (k + 1) as f64).sqrt() * s * cur - (k as f64 / (k + 1) as f64).sqrt() * prev;
    let ds = (k as f64 / 2.0).sqrt() * prev - ((k + 1) as f64 / 2.0).sqrt() * next;
    (cur, (2.0 * PI).sqrt() * ds)
}

/// `exp(-δν²) ∏ (1 + 2πi δ_j ν)^{-1}`.
pub fn tp_spectrum(delta: f64, deltas: &[f64], nu: f64) -> C64 {
    let mut v = C64::new((-delta * nu * nu).exp(), 0.0);
    for d in deltas {
        v /= C64::new(1.0, 2.0 * PI * d * nu);
    }
    v
}

/// Inverse Fourier synthesis on the FFT frequency grid matched to `g`.
fn tp_synthesis(delta: f64, deltas: &[f64], g: &Grid1D) -> (Vec<C64>, Vec<C64>) {
    let n = g.num_points();
    let h = g.step();
    let t0 = g.point(0);
    let dnu = 1.0 / (n as f64 * h);
    let mut v = vec![C64::new(0.0, 0.0); n];
    let mut d = vec![C64::new(0.0, 0.0); n];
    for m in 0..n {
        let nu = bin_frequency(m, n, h);
        let c = tp_spectrum(delta, deltas, nu) * C64::from_polar(dnu, 2.0 * PI * nu * t0);
        v[m] = c;
        d[m] = if 2 * m == n { C64::new(0.0, 0.0) } else { c * I * (2.0 * PI * nu) };
    }
    fft_inplace(&mut v, true);
    fft_inplace(&mut d, true);
    (v, d)
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Window::Gaussian { lambda, .. } => {
                if lambda.re == 0.0 && lambda.im == 0.0 {
                    write!(f, "gaussian")
                } else {
                    write!(f, "gaussian:{},{}", lambda.re, lambda.im)
                }
            }
            Window::Hermite { k } => write!(f, "hermite:{k}"),
            Window::TotallyPositive { delta, deltas } => {
                let ds: Vec<String> = deltas.iter().map(|d| d.to_string()).collect();
                write!(f, "tp:{delta}:{}", ds.join(","))
            }
        }
    }
}

/// Parses `gaussian[:re,im]`, `hermite:k` or `tp:delta:d1,d2,...`.
/// Gaussians get unit width.
impl FromStr for Window {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let err = |reason: &str| Error::WindowSpec { spec: spec.to_string(), reason: reason.to_string() };
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| err(&format!("`{s}` is not a number")));
        let parts: Vec<&str> = spec.trim().split(':').collect();
        let w = match parts.as_slice() {
            ["gaussian"] => Window::gaussian(),
            ["gaussian", phase] => {
                let xs: Vec<&str> = phase.split(',').collect();
                let lambda = match xs.as_slice() {
                    [re] => C64::new(num(re)?, 0.0),
                    [re, im] => C64::new(num(re)?, num(im)?),
                    _ => return Err(err("expected gaussian:re,im")),
                };
                Window::gaussian_with(lambda, 1.0)
            }
            ["hermite", k] => Window::hermite(k.trim().parse().map_err(|_| err("order must be a non-negative integer"))?),
            ["tp", delta, ds] => {
                let deltas = ds.split(',').map(num).collect::<Result<Vec<_>>>()?;
                Window::totally_positive(num(delta)?, deltas)
            }
            _ => return Err(err("expected gaussian[:re,im], hermite:k or tp:delta:d1,d2,...")),
        };
        w.validate()?;
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{inner_l2, make_grid};

    fn grid() -> Grid1D {
        make_grid(6.0, 512).unwrap()
    }

    #[test]
    fn gaussian_unit_norm_and_shape() {
        let g = grid();
        let psi = realize_window(&Window::gaussian(), &g).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        let c = psi.values()[256].re / (-PI * g.point(256).powi(2)).exp();
        for (j, v) in psi.values().iter().enumerate() {
            assert!((v.re - c * (-PI * g.point(j).powi(2)).exp()).abs() < 1e-13);
        }
    }

    #[test]
    fn hermite_zero_is_the_gaussian() {
        let g = grid();
        let a = realize_window(&Window::gaussian(), &g).unwrap();
        let b = realize_window(&Window::hermite(0), &g).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn hermite_orthonormal() {
        let g = grid();
        let hs: Vec<_> = (0..5).map(|k| realize_window(&Window::hermite(k), &g).unwrap()).collect();
        for j in 0..5 {
            for k in 0..5 {
                let ip = inner_l2(&hs[j], &hs[k]).unwrap();
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((ip - want).norm() < 1e-8, "{j} {k} {ip}");
            }
        }
    }

    #[test]
    fn hermite_derivative_against_finite_differences() {
        for k in 0..5 {
            for &t in &[-1.3, -0.4, 0.0, 0.25, 0.9] {
                let (_, d) = hermite_with_derivative(k, t);
                let f = |t: f64| hermite_with_derivative(k, t).0;
                let fd = |h: f64| (-f(t + 2.0 * h) + 8.0 * f(t + h) - 8.0 * f(t - h) + f(t - 2.0 * h)) / (12.0 * h);
                let (a, b) = (fd(1e-3), fd(5e-4));
                // Richardson step on the fourth-order difference.
                let rich = b + (b - a) / 15.0;
                let scale = d.abs().max(1.0);
                assert!((rich - d).abs() / scale < 1e-6, "k={k} t={t}");
            }
        }
    }

    #[test]
    fn gaussian_derivative_closed_form() {
        let g = grid();
        let w = Window::gaussian();
        let psi = realize_window(&w, &g).unwrap();
        let d = window_derivative(&w, &g).unwrap();
        for j in 0..g.num_points() {
            let want = psi.values()[j] * (-2.0 * PI * g.point(j));
            assert!((d.values()[j] - want).norm() < 1e-14);
        }
    }

    #[test]
    fn tp_is_even_and_real_with_flat_derivative_at_zero() {
        let g = make_grid(40.0, 8000).unwrap();
        let w = Window::totally_positive(0.01, vec![1.0, -1.0]);
        let r = w.realize(&g).unwrap();
        assert!((r.value.norm() - 1.0).abs() < 1e-12);
        let n = g.num_points();
        for j in 0..n {
            let a = r.value.values()[j];
            let b = r.value.values()[n - 1 - j];
            assert!(a.im.abs() < 1e-10);
            assert!((a - b).norm() < 1e-10);
        }
        // The grid has no node at 0; the derivative is odd, so the two central samples cancel.
        let mid = r.derivative.values()[n / 2] + r.derivative.values()[n / 2 - 1];
        assert!(mid.norm() < 1e-8);
    }

    #[test]
    fn tp_rejects_small_grid() {
        let g = make_grid(6.0, 512).unwrap();
        let w = Window::totally_positive(0.01, vec![1.0, -1.0]);
        assert!(matches!(w.realize(&g), Err(Error::Synthesis { .. })));
    }

    #[test]
    fn spec_roundtrip() {
        for s in ["gaussian", "gaussian:2,1", "hermite:3", "tp:0.01:1,-1"] {
            let w: Window = s.parse().unwrap();
            assert_eq!(w.to_string(), s);
        }
        assert!("tp:0:1".parse::<Window>().is_err());
        assert!("tp:0.1:0".parse::<Window>().is_err());
        assert!("hermite:-1".parse::<Window>().is_err());
        assert!("lorentz".parse::<Window>().is_err());
    }
}
