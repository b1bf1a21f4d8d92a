//! Sigma-model solitons on the noncommutative torus.
//!
//! A Parseval window `ψ` (`<ψ,ψ>_B = 1`) yields the projection `p = <ψ,ψ>` in the
//! left algebra. The certificate collects idempotency, trace, charge, action,
//! self-duality and the generalized eigenvalue `λ = <ψ, ∇̄ψ>_B`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gabor::{frame_bounds, lattice_inv_sqrt, tight_window, wexler_raz_residual, FrameDiagnostics, WR_TOLERANCE};
use crate::lattice::{
    herm_left, herm_right, lattice_dbar, lattice_derivation, lattice_involution, lattice_multiply, lattice_trace,
    lattice_trace_product, module_act_right, LatticeElement, TorusContext,
};
use crate::moyal::{connection_bar, curvature_applied, scaled_connection, Axis};
pub use crate::report::Assertion;
use crate::numerics::{relative_l2_error, GridFunction, C64, I};
use crate::window::Window;

/// Right-lattice radius of the reported `λ` table.
pub const LAMBDA_RADIUS: usize = 3;

/// Tolerance for charge integrality, the Bogomolny bound and self-duality labels.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-3;

/// Tolerance for `tr p = θ`.
pub const TRACE_TOLERANCE: f64 = 1e-6;

/// Idempotency tolerance, loosened as `θ` approaches 0 or 1.
pub fn projection_tolerance(theta: f64) -> f64 {
    1e-5 * (1.0 + 1.0 / theta.min(1.0 - theta))
}

/// `∇₁ξ = 2πi t ξ / θ`, `∇₂ξ = ξ'` (spectral).
pub fn torus_connection(axis: Axis, xi: &GridFunction, ctx: &TorusContext) -> GridFunction {
    scaled_connection(axis, xi, 1.0 / ctx.theta)
}

/// `∇̄ξ = ∇₁ξ + i∇₂ξ` given samples of `ξ'`.
pub fn torus_dbar(xi: &GridFunction, derivative: &GridFunction, ctx: &TorusContext) -> Result<GridFunction> {
    connection_bar(xi, derivative, 1.0 / ctx.theta)
}

/// `F₁₂ξ = [∇₁, ∇₂]ξ`, evaluated term by term.
pub fn torus_curvature_applied(xi: &GridFunction, derivative: &GridFunction, ctx: &TorusContext) -> Result<GridFunction> {
    curvature_applied(xi, derivative, 1.0 / ctx.theta)
}

/// Relative error of `[∇₁, ∇₂]ξ = -2πiξ/θ`.
pub fn torus_curvature_error(xi: &GridFunction, derivative: &GridFunction, ctx: &TorusContext) -> Result<f64> {
    let f = torus_curvature_applied(xi, derivative, ctx)?;
    relative_l2_error(&f, &xi.scale(C64::new(0.0, -2.0 * PI / ctx.theta)))
}

/// `p = <ψ,ψ>` with its verification residuals.
#[derive(Debug, Clone)]
pub struct TorusProjection {
    pub p: LatticeElement,
    pub wr_residual: f64,
    /// `sup |p♮p - p|`.
    pub projection_residual: f64,
    /// `sup |p* - p|`.
    pub hermiticity_residual: f64,
}

impl TorusProjection {
    pub fn is_projection(&self) -> bool {
        let tol = projection_tolerance(self.p.theta());
        self.projection_residual < tol && self.hermiticity_residual < tol
    }
}

/// Fails with [`Error::NotParseval`] unless `<ψ,ψ>_B = 1` on the Wexler–Raz box.
pub fn build_torus_projection(psi: &GridFunction, ctx: &TorusContext) -> Result<TorusProjection> {
    let wr_residual = wexler_raz_residual(psi, ctx)?;
    if !(wr_residual <= WR_TOLERANCE) {
        return Err(Error::NotParseval { wr_residual });
    }
    let p = herm_left(psi, psi, ctx)?;
    let projection_residual = lattice_multiply(&p, &p)?.sup_distance(&p)?;
    let hermiticity_residual = lattice_involution(&p).sup_distance(&p)?;
    Ok(TorusProjection { p, wr_residual, projection_residual, hermiticity_residual })
}

/// `λ ∈ B` with `∇̄ψ ≈ ψ·λ`.
#[derive(Debug, Clone)]
pub struct Eigenvalue {
    /// Full table on the right truncation radius of the context.
    pub lambda: LatticeElement,
    /// `‖∇̄ψ - ψ·λ‖₂`.
    pub residual: f64,
}

impl Eigenvalue {
    /// `λ` cut to `|k|, |l| <= LAMBDA_RADIUS`.
    pub fn reported(&self) -> LatticeElement {
        self.lambda.resized(LAMBDA_RADIUS, LAMBDA_RADIUS)
    }

    /// Largest coefficient outside the reported box.
    pub fn reported_tail(&self) -> f64 {
        let r = LAMBDA_RADIUS as i64;
        self.lambda
            .iter()
            .filter(|(k, l, _)| k.abs() > r || l.abs() > r)
            .fold(0.0, |m, (_, _, c)| m.max(c.norm()))
    }
}

/// `λ = <ψ, ∇̄ψ>_B` for a Parseval `ψ`, with `ψ'` taken spectrally.
pub fn extract_lambda(psi: &GridFunction, ctx: &TorusContext) -> Result<Eigenvalue> {
    extract_lambda_with(psi, &psi.spectral_derivative(), ctx)
}

pub fn extract_lambda_with(psi: &GridFunction, derivative: &GridFunction, ctx: &TorusContext) -> Result<Eigenvalue> {
    let wr_residual = wexler_raz_residual(psi, ctx)?;
    if !(wr_residual <= WR_TOLERANCE) {
        return Err(Error::NotParseval { wr_residual });
    }
    let bar = torus_dbar(psi, derivative, ctx)?;
    let lambda = herm_right(psi, &bar, ctx)?;
    let residual = bar.sub(&module_act_right(psi, &lambda)?)?.norm();
    Ok(Eigenvalue { lambda, residual })
}

/// Eigenvalue of an arbitrary frame window: `λ₀ = <η,η>_B^{-1} <η, ∇̄η>_B`,
/// the least-squares solution of `∇̄η = η·λ₀`.
pub fn window_eigenvalue(eta: &GridFunction, derivative: &GridFunction, ctx: &TorusContext) -> Result<Eigenvalue> {
    let b = herm_right(eta, eta, ctx)?;
    window_eigenvalue_with(eta, derivative, &lattice_inv_sqrt(&b)?.inv_sqrt, ctx)
}

/// [`window_eigenvalue`] with `<η,η>_B^{-1/2}` already at hand.
pub fn window_eigenvalue_with(eta: &GridFunction, derivative: &GridFunction, inv_sqrt: &LatticeElement, ctx: &TorusContext) -> Result<Eigenvalue> {
    let inv = lattice_multiply(inv_sqrt, inv_sqrt)?;
    let bar = torus_dbar(eta, derivative, ctx)?;
    let lambda = lattice_multiply(&inv, &herm_right(eta, &bar, ctx)?)?;
    let residual = bar.sub(&module_act_right(eta, &lambda)?)?.norm();
    Ok(Eigenvalue { lambda, residual })
}

/// `S[p] = (1/4π) tr(∂₁p♮∂₁p + ∂₂p♮∂₂p)`, real and imaginary parts.
pub fn torus_action_complex(p: &LatticeElement) -> C64 {
    let d1 = lattice_derivation(Axis::First, p);
    let d2 = lattice_derivation(Axis::Second, p);
    let s = lattice_trace_product(&d1, &d1).expect("same algebra") + lattice_trace_product(&d2, &d2).expect("same algebra");
    s / (4.0 * PI)
}

/// Real action; fails if the imaginary part exceeds `1e-8` (relative to `max(1, S)`).
pub fn torus_action(p: &LatticeElement) -> Result<f64> {
    let s = torus_action_complex(p);
    if s.im.abs() > 1e-8 * s.re.abs().max(1.0) {
        return Err(Error::Domain(format!("action has imaginary part {:.3e}", s.im)));
    }
    Ok(s.re)
}

/// `c₁(p) = (1/2πi) tr(p♮(∂₁p♮∂₂p - ∂₂p♮∂₁p))`.
pub fn torus_charge(p: &LatticeElement) -> Result<f64> {
    let d1 = lattice_derivation(Axis::First, p);
    let d2 = lattice_derivation(Axis::Second, p);
    let comm = lattice_multiply(&d1, &d2)?.sub(&lattice_multiply(&d2, &d1)?)?;
    Ok((lattice_trace_product(p, &comm)? / (2.0 * PI * I)).re)
}

/// Charge through the curvature of the connection: `-(1/2πi) tr <ψ, F₁₂ψ>_B`.
pub fn torus_charge_curvature(psi: &GridFunction, derivative: &GridFunction, ctx: &TorusContext) -> Result<f64> {
    let f = torus_curvature_applied(psi, derivative, ctx)?;
    let c = lattice_trace(&herm_right(psi, &f, ctx)?);
    Ok((-c / (2.0 * PI * I)).re)
}

/// `sup |∂̄(p)♮p|`.
pub fn selfduality_residual_torus(p: &LatticeElement) -> Result<f64> {
    Ok(lattice_multiply(&lattice_dbar(p), p)?.max_abs())
}

/// `sup |p♮Δp - Δp♮p|` with `Δ = ∂₁² + ∂₂²`.
pub fn euler_lagrange(p: &LatticeElement) -> Result<f64> {
    let lap = lattice_derivation(Axis::First, &lattice_derivation(Axis::First, p))
        .add(&lattice_derivation(Axis::Second, &lattice_derivation(Axis::Second, p)))?;
    lattice_multiply(p, &lap)?.sup_distance(&lattice_multiply(&lap, p)?)
}

/// Catalog windows adapted to the torus: Gaussian widths are scaled by `√θ`, so
/// the unit Gaussian becomes `exp(-πt²/θ)`, the kernel of `∇̄`.
pub fn torus_window(w: &Window, theta: f64) -> Window {
    match w {
        Window::Gaussian { lambda, width } => Window::gaussian_with(*lambda, width * theta.sqrt()),
        other => other.clone(),
    }
}

/// Coefficients `(k, l, re, im)` of the reported `λ` table above `1e-14`.
pub type CoefficientTable = Vec<(i64, i64, f64, f64)>;

/// Certificate for one `(window, θ)` pair.
///
/// Fields after `is_frame` are `None` when the window is not a frame.
#[derive(Debug, Clone, Serialize)]
pub struct SolitonReport {
    pub theta: f64,
    pub window: String,
    pub window_params: Window,
    pub is_frame: bool,
    pub frame: FrameDiagnostics,
    pub context: TorusContext,
    pub note: Option<String>,
    pub wr_residual: Option<f64>,
    pub projection_residual: Option<f64>,
    pub hermiticity_residual: Option<f64>,
    /// Largest boundary coefficient of `p`, relative to its largest coefficient.
    pub projection_tail: Option<f64>,
    /// Same for `<η,η>_B^{-1/2}`.
    pub inv_sqrt_tail: Option<f64>,
    pub trace_re: Option<f64>,
    pub trace_im: Option<f64>,
    pub c1: Option<f64>,
    pub c1_curvature: Option<f64>,
    pub action: Option<f64>,
    pub bound_gap: Option<f64>,
    pub selfduality_residual: Option<f64>,
    pub euler_lagrange: Option<f64>,
    pub eigen_residual: Option<f64>,
    pub lambda_coeffs: Option<CoefficientTable>,
    pub lambda_tail: Option<f64>,
    /// `<η,η>_B^{-1}<η,∇̄η>_B` for the input window.
    pub window_lambda_coeffs: Option<CoefficientTable>,
    pub window_eigen_residual: Option<f64>,
    pub self_dual: Option<bool>,
    pub assertions: Vec<Assertion>,
}

impl SolitonReport {
    /// True when every assertion passed; non-frame reports carry none and pass.
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.assertions.iter().filter(|a| !a.passed).map(|a| a.name.as_str()).collect()
    }
}

fn table(e: &LatticeElement) -> CoefficientTable {
    e.iter().filter(|(_, _, c)| c.norm() >= 1e-14).map(|(k, l, c)| (k, l, c.re, c.im)).collect()
}

/// Full pipeline: realize, frame bounds, tighten, project, certify.
///
/// Non-frame windows produce a report with `is_frame = false`; only grid and
/// synthesis problems are errors.
pub fn make_report(w: &Window, ctx: &TorusContext) -> Result<SolitonReport> {
    let realized = w.realize(&ctx.grid)?;
    let eta = &realized.value;
    let tight = tight_window(eta, ctx);
    let mut frame = match &tight {
        Ok(t) => t.frame.clone(),
        Err(_) => frame_bounds(eta, ctx)?,
    };
    frame.window = w.to_string();
    let mut report = SolitonReport {
        theta: ctx.theta,
        window: w.to_string(),
        window_params: w.clone(),
        is_frame: frame.is_frame,
        frame,
        context: *ctx,
        note: None,
        wr_residual: None,
        projection_residual: None,
        hermiticity_residual: None,
        projection_tail: None,
        inv_sqrt_tail: None,
        trace_re: None,
        trace_im: None,
        c1: None,
        c1_curvature: None,
        action: None,
        bound_gap: None,
        selfduality_residual: None,
        euler_lagrange: None,
        eigen_residual: None,
        lambda_coeffs: None,
        lambda_tail: None,
        window_lambda_coeffs: None,
        window_eigen_residual: None,
        self_dual: None,
        assertions: Vec::new(),
    };
    let tight = match tight {
        Ok(t) => t,
        Err(e @ (Error::NotAFrame { .. } | Error::NotPositiveDefinite { .. } | Error::NoConvergence(_))) => {
            report.is_frame = false;
            report.note = Some(e.to_string());
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    let psi = &tight.window;
    let dpsi = psi.spectral_derivative();
    report.wr_residual = Some(tight.wr_residual);
    report.assertions.push(Assertion::below("wr_residual", tight.wr_residual, WR_TOLERANCE));
    if tight.wr_residual > WR_TOLERANCE {
        report.note = Some(Error::NotParseval { wr_residual: tight.wr_residual }.to_string());
        return Ok(report);
    }

    let proj = build_torus_projection(psi, ctx)?;
    let p = &proj.p;
    let trace = lattice_trace(p);
    let c1 = torus_charge(p)?;
    let action_c = torus_action_complex(p);
    let action = action_c.re;
    let sd = selfduality_residual_torus(p)?;
    let lambda = extract_lambda_with(psi, &dpsi, ctx)?;
    let window_lambda = window_eigenvalue_with(eta, &realized.derivative, &tight.inv_sqrt, ctx)?;

    let ptol = projection_tolerance(ctx.theta);
    report.projection_residual = Some(proj.projection_residual);
    report.hermiticity_residual = Some(proj.hermiticity_residual);
    report.projection_tail = Some(p.tail_bound() / p.max_abs().max(f64::MIN_POSITIVE));
    report.inv_sqrt_tail = Some(tight.inv_sqrt.tail_bound() / tight.inv_sqrt.max_abs().max(f64::MIN_POSITIVE));
    report.trace_re = Some(trace.re);
    report.trace_im = Some(trace.im);
    report.c1 = Some(c1);
    report.c1_curvature = Some(torus_charge_curvature(psi, &dpsi, ctx)?);
    report.action = Some(action);
    report.bound_gap = Some(action - c1.abs());
    report.selfduality_residual = Some(sd);
    report.euler_lagrange = Some(euler_lagrange(p)?);
    report.eigen_residual = Some(lambda.residual);
    report.lambda_coeffs = Some(table(&lambda.reported()));
    report.lambda_tail = Some(lambda.reported_tail());
    report.window_lambda_coeffs = Some(table(&window_lambda.reported()));
    report.window_eigen_residual = Some(window_lambda.residual);
    report.self_dual = Some(sd < CERTIFICATE_TOLERANCE);

    report.assertions.extend([
        Assertion::below("projection_residual", proj.projection_residual, ptol),
        Assertion::below("hermiticity_residual", proj.hermiticity_residual, ptol),
        Assertion::below("trace", (trace - ctx.theta).norm(), TRACE_TOLERANCE),
        Assertion::below("c1_integrality", (c1 - c1.round()).abs(), CERTIFICATE_TOLERANCE),
        Assertion::below("bogomolny", -(action - c1.abs()), CERTIFICATE_TOLERANCE),
        Assertion::below("action_imaginary", action_c.im.abs(), 1e-8 * action.abs().max(1.0)),
    ]);
    Ok(report)
}

/// Relative truncation tail aimed for by [`report_for`].
pub const TRUNCATION_TARGET: f64 = 1e-6;

/// Radius caps for automatic refinement.
pub const MAX_AUTO_LEFT: usize = 64;
pub const MAX_AUTO_RIGHT: usize = 48;

/// Radius at which a geometrically decaying tail reaches the target.
fn refined_radius(r: usize, tail: f64, cap: usize) -> usize {
    if !(tail > TRUNCATION_TARGET) || r >= cap {
        return r;
    }
    if tail >= 1.0 {
        return cap;
    }
    // Decay is often slower than geometric from the first radius; overshoot by 25%.
    let want = (1.25 * r as f64 * TRUNCATION_TARGET.ln() / tail.ln()).ceil() as usize;
    want.max(r + r.div_ceil(4)).min(cap)
}

/// [`make_report`] on a context sized by [`TorusContext::for_window`], with
/// Gaussians adapted through [`torus_window`].
///
/// When the projection or `<η,η>_B^{-1/2}` is cut above [`TRUNCATION_TARGET`]
/// (relative), the radii are enlarged once from the observed decay and the
/// report is recomputed.
pub fn report_for(w: &Window, theta: f64) -> Result<SolitonReport> {
    let w = torus_window(w, theta);
    let ctx = TorusContext::for_window(theta, &w)?;
    let report = make_report(&w, &ctx)?;
    let (Some(pt), Some(it)) = (report.projection_tail, report.inv_sqrt_tail) else {
        return Ok(report);
    };
    let k = refined_radius(ctx.k_max, pt, MAX_AUTO_LEFT);
    let r = refined_radius(ctx.r_max, it, MAX_AUTO_RIGHT);
    if k == ctx.k_max && r == ctx.r_max {
        return Ok(report);
    }
    log::debug!("refining truncation for {w} at theta {theta}: K {} -> {k}, R {} -> {r}", ctx.k_max, ctx.r_max);
    make_report(&w, &TorusContext::for_window_with(theta, &w, k, k, r)?)
}

/// Reports for every `(θ, window)` pair, in row-major order of `thetas × windows`.
///
/// Pairs run concurrently; the output order does not depend on scheduling.
pub fn sweep(thetas: &[f64], windows: &[Window]) -> Vec<Result<SolitonReport>> {
    let pairs: Vec<(f64, &Window)> = thetas.iter().flat_map(|&t| windows.iter().map(move |w| (t, w))).collect();
    pairs.par_iter().map(|(t, w)| report_for(w, *t)).collect()
}

/// Column header of [`csv_row`].
pub const CSV_HEADER: &str = "theta,window,is_frame,c1,action,bound_gap,proj_residual,sd_residual,eigen_residual,trace_re";

fn csv_float(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v:.16e}"),
        None => String::new(),
    }
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One CSV line (17 significant digits; empty cells on the non-frame pathway).
pub fn csv_row(r: &SolitonReport) -> String {
    [
        format!("{:.16e}", r.theta),
        csv_text(&r.window),
        r.is_frame.to_string(),
        csv_float(r.c1),
        csv_float(r.action),
        csv_float(r.bound_gap),
        csv_float(r.projection_residual),
        csv_float(r.selfduality_residual),
        csv_float(r.eigen_residual),
        csv_float(r.trace_re),
    ]
    .join(",")
}

/// Header plus one line per report, newline-terminated.
pub fn reports_to_csv<'a>(reports: impl IntoIterator<Item = &'a SolitonReport>) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&csv_row(r));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{module_act_left, Side};
    use crate::numerics::inner_l2;
    use crate::window::realize_window;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gaussian_setup(theta: f64) -> (TorusContext, GridFunction, GridFunction) {
        let w = torus_window(&Window::gaussian(), theta);
        let ctx = TorusContext::for_window(theta, &w).unwrap();
        let eta = realize_window(&w, &ctx.grid).unwrap();
        let psi = tight_window(&eta, &ctx).unwrap().window;
        (ctx, eta, psi)
    }

    #[test]
    fn curvature_is_constant() {
        let ctx = TorusContext::for_window(0.5, &Window::hermite(2)).unwrap();
        for w in [Window::gaussian(), Window::gaussian_with(C64::new(1.0, 2.0), 0.8), Window::hermite(1), Window::hermite(2)] {
            let r = w.realize(&ctx.grid).unwrap();
            let err = torus_curvature_error(&r.value, &r.derivative, &ctx).unwrap();
            assert!(err < 1e-8, "{w}: {err:e}");
        }
    }

    #[test]
    fn gaussian_is_in_the_kernel_of_dbar() {
        let theta = 0.5;
        let w = torus_window(&Window::gaussian(), theta);
        let ctx = TorusContext::for_window(theta, &w).unwrap();
        let r = w.realize(&ctx.grid).unwrap();
        assert!(torus_dbar(&r.value, &r.derivative, &ctx).unwrap().norm() < 1e-8);
        // Spectral derivative agrees.
        assert!(torus_dbar(&r.value, &r.value.spectral_derivative(), &ctx).unwrap().norm() < 1e-8);
    }

    #[test]
    fn connection_leibniz_rules() {
        let (ctx, eta, _) = gaussian_setup(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut coeff = |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let a = LatticeElement::from_fn(0.5, Side::Left, 3, 3, &mut coeff);
        let b = LatticeElement::from_fn(0.5, Side::Right, 2, 2, &mut coeff);
        for axis in [Axis::First, Axis::Second] {
            let lhs = torus_connection(axis, &module_act_left(&a, &eta).unwrap(), &ctx);
            let rhs = module_act_left(&lattice_derivation(axis, &a), &eta)
                .unwrap()
                .add(&module_act_left(&a, &torus_connection(axis, &eta, &ctx)).unwrap())
                .unwrap();
            assert!(lhs.sub(&rhs).unwrap().norm() < 1e-5 * rhs.norm());
            let lhs = torus_connection(axis, &module_act_right(&eta, &b).unwrap(), &ctx);
            let rhs = module_act_right(&torus_connection(axis, &eta, &ctx), &b)
                .unwrap()
                .add(&module_act_right(&eta, &lattice_derivation(axis, &b)).unwrap())
                .unwrap();
            assert!(lhs.sub(&rhs).unwrap().norm() < 1e-5 * rhs.norm());
        }
    }

    #[test]
    fn gaussian_projection_certificate() {
        let (ctx, eta, psi) = gaussian_setup(0.5);
        let proj = build_torus_projection(&psi, &ctx).unwrap();
        assert!(proj.is_projection() && proj.projection_residual < 1e-5);
        assert!((lattice_trace(&proj.p) - 0.5).norm() < 1e-6);
        assert!((torus_charge(&proj.p).unwrap() - 1.0).abs() < 1e-3);
        assert!((torus_action(&proj.p).unwrap() - 1.0).abs() < 1e-3);
        assert!(selfduality_residual_torus(&proj.p).unwrap() < 1e-4);
        assert!(euler_lagrange(&proj.p).unwrap() < 1e-3);
        let curv = torus_charge_curvature(&psi, &psi.spectral_derivative(), &ctx).unwrap();
        assert!((curv - 1.0).abs() < 1e-6);
        // The raw Gaussian has unit L² norm but is not Parseval.
        assert!(matches!(build_torus_projection(&eta, &ctx), Err(Error::NotParseval { .. })));
    }

    #[test]
    fn zero_element_has_no_action_or_charge() {
        let z = LatticeElement::zeros(0.5, Side::Left, 4, 4);
        assert_eq!(torus_action(&z).unwrap(), 0.0);
        assert_eq!(torus_charge(&z).unwrap(), 0.0);
    }

    #[test]
    fn lambda_of_a_tightened_gaussian() {
        // ψ = η·z with z = b^{-1/2} and ∇̄η = λ₀η gives λ = λ₀ + b^{1/2} ♮ ∂̄z.
        let theta = 0.5;
        for lambda0 in [C64::new(0.0, 0.0), C64::new(1.0, 2.0)] {
            let w = torus_window(&Window::gaussian_with(lambda0, 1.0), theta);
            let ctx = TorusContext::for_window(theta, &w).unwrap();
            let r = w.realize(&ctx.grid).unwrap();
            let t = tight_window(&r.value, &ctx).unwrap();
            let got = extract_lambda(&t.window, &ctx).unwrap();
            assert!(got.residual < 1e-6, "{:e}", got.residual);
            let b = herm_right(&r.value, &r.value, &ctx).unwrap();
            let ns = lattice_inv_sqrt(&b).unwrap();
            let want = ctx.unit_right().scale(lambda0).add(&lattice_multiply(&ns.sqrt, &lattice_dbar(&ns.inv_sqrt)).unwrap()).unwrap();
            assert!(got.reported().sup_distance(&want.resized(LAMBDA_RADIUS, LAMBDA_RADIUS)).unwrap() < 1e-6);
            // The window itself is an exact eigenvector.
            let w0 = window_eigenvalue(&r.value, &r.derivative, &ctx).unwrap();
            assert!(w0.residual < 1e-8);
            assert!(w0.lambda.sup_distance(&ctx.unit_right().scale(lambda0)).unwrap() < 1e-6);
        }
    }

    #[test]
    fn lambda_solves_the_least_squares_problem() {
        // ∇̄ψ - ψ·λ is orthogonal to every ψ·δ_kl.
        let (ctx, _, psi) = gaussian_setup(0.5);
        let e = extract_lambda(&psi, &ctx).unwrap();
        let bar = torus_dbar(&psi, &psi.spectral_derivative(), &ctx).unwrap();
        let res = bar.sub(&module_act_right(&psi, &e.lambda).unwrap()).unwrap();
        for (k, l) in [(0, 0), (1, 0), (0, 1), (-1, 2)] {
            let d = LatticeElement::delta(0.5, Side::Right, 2, 2, k, l, C64::new(1.0, 0.0));
            let v = module_act_right(&psi, &d).unwrap();
            assert!(inner_l2(&res, &v).unwrap().norm() < 1e-8);
        }
    }

    #[test]
    fn reports_cover_the_non_frame_pathway() {
        // Odd windows cannot generate frames at θ = 1/2.
        let r = report_for(&Window::hermite(1), 0.5).unwrap();
        assert!(!r.is_frame && r.c1.is_none() && r.passed(), "{:?}", r.frame);
        assert!(csv_row(&r).ends_with(",false,,,,,,,"));
    }

    #[test]
    fn gaussian_report_and_csv() {
        let r = report_for(&Window::gaussian(), 0.5).unwrap();
        assert!(r.passed(), "{:?}", r.failures());
        assert!(r.bound_gap.unwrap().abs() < 1e-3 && r.self_dual == Some(true));
        let near_one = report_for(&Window::gaussian(), 0.97).unwrap();
        assert!(near_one.passed() && near_one.context.k_max > r.context.k_max);
        let csv = reports_to_csv([&r, &near_one]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1].split(',').count(), 10);
        assert!(lines[1].starts_with("5.0000000000000000e-1,gaussian,true,"));
    }

    #[test]
    fn sweep_preserves_order() {
        let thetas = [0.3, 0.5];
        let windows = [Window::gaussian(), Window::hermite(1)];
        let rows: Vec<SolitonReport> = sweep(&thetas, &windows).into_iter().map(|r| r.unwrap()).collect();
        let keys: Vec<(f64, String)> = rows.iter().map(|r| (r.theta, r.window.clone())).collect();
        assert_eq!(
            keys,
            vec![(0.3, "gaussian".into()), (0.3, "hermite:1".into()), (0.5, "gaussian".into()), (0.5, "hermite:1".into())]
        );
    }

    #[test]
    fn refinement_grows_radii() {
        assert_eq!(refined_radius(16, 1e-9, 64), 16);
        assert_eq!(refined_radius(16, 1.0, 64), 64);
        assert!(refined_radius(16, 1e-3, 64) > 16);
        assert_eq!(refined_radius(64, 1e-3, 64), 64);
    }
}
