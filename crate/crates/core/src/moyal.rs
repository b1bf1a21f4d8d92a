//! Sigma-model solitons on the Moyal plane.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::Assertion;
use crate::numerics::{inner_l2, Grid1D, GridFunction, C64, I};
use crate::tf::{default_symbol_grid, stft_symbol, trace_cont, trace_of_product, twisted_convolve_cont, twisted_involution_cont, Symbol2D};
use crate::window::Window;

/// Direction of a derivation or covariant derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    First,
    Second,
}

/// `∂_j`: multiplication by `2πi x` or `2πi ω`.
pub fn moyal_derivation(axis: Axis, f: &Symbol2D) -> Symbol2D {
    match axis {
        Axis::First => f.map(|z, v| v * I * (2.0 * PI * z.x)),
        Axis::Second => f.map(|z, v| v * I * (2.0 * PI * z.omega)),
    }
}

/// `∂̄ = ∂₁ + i∂₂`.
pub fn moyal_dbar(f: &Symbol2D) -> Symbol2D {
    f.map(|z, v| v * I * 2.0 * PI * C64::new(z.x, z.omega))
}

/// `∇₁ξ = 2πi t ξ`, `∇₂ξ = ξ'` (spectral derivative).
pub fn moyal_connection(axis: Axis, xi: &GridFunction) -> GridFunction {
    scaled_connection(axis, xi, 1.0)
}

pub(crate) fn scaled_connection(axis: Axis, xi: &GridFunction, scale: f64) -> GridFunction {
    match axis {
        Axis::First => xi.map(|t, v| v * I * (2.0 * PI * scale * t)),
        Axis::Second => xi.spectral_derivative(),
    }
}

/// `∇̄ξ = ∇₁ξ + i∇₂ξ` given samples of `ξ'`.
pub(crate) fn connection_bar(xi: &GridFunction, derivative: &GridFunction, scale: f64) -> Result<GridFunction> {
    xi.map(|t, v| v * I * (2.0 * PI * scale * t)).zip(derivative, |a, b| a + I * b)
}

/// `[∇₁, ∇₂]ξ`, both orders evaluated numerically.
pub(crate) fn curvature_applied(xi: &GridFunction, derivative: &GridFunction, scale: f64) -> Result<GridFunction> {
    let d1_d2 = scaled_connection(Axis::First, derivative, scale);
    let d2_d1 = scaled_connection(Axis::First, xi, scale).spectral_derivative();
    d1_d2.sub(&d2_d1)
}

/// Relative error of `[∇₁, ∇₂]ξ = -2πi ξ`.
pub fn moyal_curvature_error(xi: &GridFunction, derivative: &GridFunction) -> Result<f64> {
    let f = curvature_applied(xi, derivative, 1.0)?;
    let want = xi.scale(C64::new(0.0, -2.0 * PI));
    crate::numerics::relative_l2_error(&f, &want)
}

/// Tolerance for the projection and hermiticity checks at build time.
pub const PROJECTION_TOLERANCE: f64 = 1e-5;

/// `p_ψ = V_ψψ` together with the window it came from.
#[derive(Debug, Clone)]
pub struct MoyalProjection {
    pub symbol: Symbol2D,
    pub window: GridFunction,
    pub window_derivative: GridFunction,
    /// Gaussian phase parameter, when the window is a generalized Gaussian.
    pub lambda: Option<C64>,
    pub projection_residual: f64,
    pub hermiticity_residual: f64,
}

impl MoyalProjection {
    pub fn is_projection(&self) -> bool {
        self.projection_residual < PROJECTION_TOLERANCE && self.hermiticity_residual < 1e-8
    }
}

/// Projection from a unit vector; `ψ'` is taken spectrally.
pub fn build_moyal_projection(psi: &GridFunction) -> Result<MoyalProjection> {
    let sg = default_symbol_grid();
    build_moyal_projection_on(psi, &psi.spectral_derivative(), None, &sg, &sg)
}

/// Projection from a catalog window with its closed-form derivative.
pub fn build_moyal_projection_from_window(w: &Window, grid: &Grid1D) -> Result<MoyalProjection> {
    let r = w.realize(grid)?;
    let lambda = match w {
        Window::Gaussian { lambda, .. } => Some(*lambda),
        _ => None,
    };
    let sg = default_symbol_grid();
    build_moyal_projection_on(&r.value, &r.derivative, lambda, &sg, &sg)
}

pub fn build_moyal_projection_on(
    psi: &GridFunction,
    derivative: &GridFunction,
    lambda: Option<C64>,
    xg: &Grid1D,
    wg: &Grid1D,
) -> Result<MoyalProjection> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized { norm });
    }
    let symbol = stft_symbol(psi, psi, xg, wg)?;
    let square = twisted_convolve_cont(&symbol, &symbol)?;
    let projection_residual = square.sup_distance(&symbol)?;
    let hermiticity_residual = twisted_involution_cont(&symbol).sup_distance(&symbol)?;
    Ok(MoyalProjection {
        symbol,
        window: psi.clone(),
        window_derivative: derivative.clone(),
        lambda,
        projection_residual,
        hermiticity_residual,
    })
}

/// `S[p] = (1/4π) tr(∂₁p ♮ ∂₁p + ∂₂p ♮ ∂₂p)` (real part; the imaginary part is returned alongside).
pub fn moyal_action_complex(p: &Symbol2D) -> Result<C64> {
    let d1 = moyal_derivation(Axis::First, p);
    let d2 = moyal_derivation(Axis::Second, p);
    Ok((trace_of_product(&d1, &d1)? + trace_of_product(&d2, &d2)?) / (4.0 * PI))
}

pub fn moyal_action(p: &Symbol2D) -> Result<f64> {
    let s = moyal_action_complex(p)?;
    if s.im.abs() > 1e-6 * s.re.abs().max(1.0) {
        return Err(Error::Domain(format!("action has imaginary part {:.3e}", s.im)));
    }
    Ok(s.re)
}

/// `c₁(p) = (1/2πi) tr(p ♮ (∂₁p ♮ ∂₂p - ∂₂p ♮ ∂₁p))`.
pub fn moyal_charge(p: &Symbol2D) -> Result<f64> {
    let d1 = moyal_derivation(Axis::First, p);
    let d2 = moyal_derivation(Axis::Second, p);
    let comm = twisted_convolve_cont(&d1, &d2)?.sub(&twisted_convolve_cont(&d2, &d1)?)?;
    Ok((trace_of_product(p, &comm)? / (2.0 * PI * I)).re)
}

/// Self-duality diagnostics: symbol level and window level side by side.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SelfDuality {
    /// `sup |∂̄(p) ♮ p|`.
    pub residual: f64,
    /// `λ = <∇̄ψ, ψ>`.
    pub eigenvalue: C64,
    /// `‖∇̄ψ - λψ‖₂`.
    pub eigen_residual: f64,
}

pub fn moyal_selfduality_residual(p: &MoyalProjection) -> Result<SelfDuality> {
    let residual = twisted_convolve_cont(&moyal_dbar(&p.symbol), &p.symbol)?.sup_norm();
    let bar = connection_bar(&p.window, &p.window_derivative, 1.0)?;
    let eigenvalue = inner_l2(&bar, &p.window)?;
    let eigen_residual = bar.sub(&p.window.scale(eigenvalue))?.norm();
    Ok(SelfDuality { residual, eigenvalue, eigen_residual })
}

/// `sup |p ♮ Δp - Δp ♮ p|` with `Δ = ∂₁² + ∂₂²`.
pub fn moyal_euler_lagrange(p: &Symbol2D) -> Result<f64> {
    let lap = p.map(|z, v| v * (-4.0 * PI * PI * (z.x * z.x + z.omega * z.omega)));
    let a = twisted_convolve_cont(p, &lap)?;
    let b = twisted_convolve_cont(&lap, p)?;
    a.sup_distance(&b)
}

/// Verification scalars for one Moyal projection.
#[derive(Debug, Clone, Serialize)]
pub struct MoyalReport {
    pub window: String,
    pub projection_residual: f64,
    pub hermiticity_residual: f64,
    pub trace_re: f64,
    pub trace_im: f64,
    pub charge: f64,
    pub action: f64,
    pub bound_gap: f64,
    pub sd_residual: f64,
    pub eigenvalue_re: f64,
    pub eigenvalue_im: f64,
    pub eigen_residual: f64,
    pub euler_lagrange: f64,
    pub symbol_tail: f64,
    pub self_dual: bool,
    /// Projection, trace, charge and Bogomolny checks. Self-duality is reported, not asserted.
    pub assertions: Vec<Assertion>,
}

impl MoyalReport {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.assertions.iter().filter(|a| !a.passed).map(|a| a.name.as_str()).collect()
    }
}

/// Tolerance for `tr p = 1`.
pub const TRACE_TOLERANCE: f64 = 1e-8;

/// Tolerance for charge integrality and the Bogomolny bound.
pub const CHARGE_TOLERANCE: f64 = 1e-3;

/// Self-duality threshold used to label a report.
pub const SELF_DUAL_TOLERANCE: f64 = 1e-5;

pub fn moyal_report(label: &str, p: &MoyalProjection) -> Result<MoyalReport> {
    let trace = trace_cont(&p.symbol)?;
    let charge = moyal_charge(&p.symbol)?;
    let action = moyal_action(&p.symbol)?;
    let sd = moyal_selfduality_residual(p)?;
    let assertions = vec![
        Assertion::below("projection_residual", p.projection_residual, PROJECTION_TOLERANCE),
        Assertion::below("hermiticity_residual", p.hermiticity_residual, 1e-8),
        Assertion::below("trace", (trace - 1.0).norm(), TRACE_TOLERANCE),
        Assertion::below("charge_integrality", (charge - charge.round()).abs(), CHARGE_TOLERANCE),
        Assertion::below("bogomolny", charge.abs() - action, CHARGE_TOLERANCE),
    ];
    Ok(MoyalReport {
        window: label.to_string(),
        projection_residual: p.projection_residual,
        hermiticity_residual: p.hermiticity_residual,
        trace_re: trace.re,
        trace_im: trace.im,
        charge,
        action,
        bound_gap: action - charge.abs(),
        sd_residual: sd.residual,
        eigenvalue_re: sd.eigenvalue.re,
        eigenvalue_im: sd.eigenvalue.im,
        eigen_residual: sd.eigen_residual,
        euler_lagrange: moyal_euler_lagrange(&p.symbol)?,
        symbol_tail: p.symbol.tail_bound() / p.symbol.peak().max(f64::MIN_POSITIVE),
        self_dual: sd.residual < SELF_DUAL_TOLERANCE,
        assertions,
    })
}

/// Signal grid used for Moyal-plane runs: shifts up to the symbol half-width 6
/// stay inside half of the grid.
pub fn default_signal_grid() -> Grid1D {
    Grid1D::new(16.0, 1024).expect("valid constants")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::make_grid;
    use crate::tf::{apply_symbol, PhasePoint};
    use crate::window::realize_window;

    fn project(w: &Window) -> MoyalProjection {
        build_moyal_projection_from_window(w, &default_signal_grid()).unwrap()
    }

    #[test]
    fn gaussian_soliton() {
        let p = project(&Window::gaussian());
        let want = Symbol2D::from_fn(*p.symbol.x_grid(), *p.symbol.w_grid(), |z| {
            C64::from_polar((-0.5 * PI * (z.x * z.x + z.omega * z.omega)).exp(), -PI * z.x * z.omega)
        });
        assert!(p.symbol.sup_distance(&want).unwrap() < 1e-8);
        assert!((trace_cont(&p.symbol).unwrap() - 1.0).norm() < 1e-8);
        assert!(p.is_projection());
        assert!((moyal_action(&p.symbol).unwrap() - 1.0).abs() < 1e-3);
        assert!((moyal_charge(&p.symbol).unwrap() - 1.0).abs() < 1e-3);
        let sd = moyal_selfduality_residual(&p).unwrap();
        assert!(sd.residual < 1e-5, "{}", sd.residual);
        assert!(sd.eigenvalue.norm() < 1e-8);
        assert!(sd.eigen_residual < 1e-8);
        assert!(moyal_euler_lagrange(&p.symbol).unwrap() < 1e-4);
    }

    #[test]
    fn shifted_gaussian_eigenvalue() {
        let lambda = C64::new(2.0, 1.0);
        let p = project(&Window::gaussian_with(lambda, 1.0));
        let sd = moyal_selfduality_residual(&p).unwrap();
        assert!(sd.residual < 1e-5, "{}", sd.residual);
        assert!((sd.eigenvalue - lambda).norm() < 1e-4);
    }

    #[test]
    fn hermite_one_is_not_self_dual() {
        let p = project(&Window::hermite(1));
        assert!(p.projection_residual < 1e-5);
        let s = moyal_action(&p.symbol).unwrap();
        let c = moyal_charge(&p.symbol).unwrap();
        assert!((c - 1.0).abs() < 1e-3, "{c}");
        assert!(s > 1.0 + 1e-2, "{s}");
        assert!(moyal_selfduality_residual(&p).unwrap().residual > 1e-2);
    }

    #[test]
    fn zero_symbol() {
        let sg = default_symbol_grid();
        let z = Symbol2D::zeros(sg, sg);
        assert_eq!(moyal_action(&z).unwrap(), 0.0);
        assert_eq!(moyal_charge(&z).unwrap(), 0.0);
        assert_eq!(moyal_derivation(Axis::First, &z).sup_norm(), 0.0);
        assert_eq!(trace_cont(&moyal_derivation(Axis::Second, &z)).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn derivations_kill_the_trace() {
        let p = project(&Window::hermite(2));
        for axis in [Axis::First, Axis::Second] {
            assert_eq!(trace_cont(&moyal_derivation(axis, &p.symbol)).unwrap().norm(), 0.0);
        }
    }

    #[test]
    fn curvature_is_constant() {
        let g = default_signal_grid();
        for w in [Window::gaussian(), Window::hermite(1), Window::hermite(3), Window::gaussian_with(C64::new(2.0, 1.0), 1.0)] {
            let r = w.realize(&g).unwrap();
            assert!(moyal_curvature_error(&r.value, &r.derivative).unwrap() < 1e-8, "{w}");
        }
    }

    #[test]
    fn connection_leibniz() {
        let g = default_signal_grid();
        let sg = default_symbol_grid();
        let a = realize_window(&Window::hermite(1), &g).unwrap();
        let b = realize_window(&Window::gaussian_with(C64::new(1.0, 0.0), 1.0), &g).unwrap();
        let k = stft_symbol(&a, &b, &sg, &sg).unwrap();
        let xi = realize_window(&Window::hermite(2), &g).unwrap();
        for axis in [Axis::First, Axis::Second] {
            let lhs = moyal_connection(axis, &apply_symbol(&k, &xi).unwrap());
            let rhs = apply_symbol(&moyal_derivation(axis, &k), &xi)
                .unwrap()
                .add(&apply_symbol(&k, &moyal_connection(axis, &xi)).unwrap())
                .unwrap();
            assert!(lhs.sub(&rhs).unwrap().norm() < 1e-4 * lhs.norm().max(1.0));
        }
    }

    #[test]
    fn derivation_leibniz() {
        let sg = Grid1D::symmetric(6.0, 49).unwrap();
        let g = make_grid(16.0, 1024).unwrap();
        let a = realize_window(&Window::gaussian(), &g).unwrap();
        let b = crate::tf::tf_shift(PhasePoint::new(0.4, -0.3), &a).unwrap();
        let f = stft_symbol(&a, &b, &sg, &sg).unwrap();
        let h = stft_symbol(&b, &b, &sg, &sg).unwrap();
        let lhs = moyal_derivation(Axis::First, &twisted_convolve_cont(&f, &h).unwrap());
        let rhs = twisted_convolve_cont(&moyal_derivation(Axis::First, &f), &h)
            .unwrap()
            .add(&twisted_convolve_cont(&f, &moyal_derivation(Axis::First, &h)).unwrap())
            .unwrap();
        assert!(lhs.sup_distance(&rhs).unwrap() < 1e-4);
    }

    #[test]
    fn rejects_unnormalized() {
        let g = default_signal_grid();
        let psi = realize_window(&Window::gaussian(), &g).unwrap().scale(C64::new(2.0, 0.0));
        assert!(matches!(build_moyal_projection(&psi), Err(Error::NotNormalized { .. })));
    }
}
