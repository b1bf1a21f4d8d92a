//! Gabor frames over `θℤ × ℤ`: frame bounds, canonical tight and dual windows.
//!
//! Everything is expressed through the commutant algebra: with
//! `b = <η,η>_B` the frame operator satisfies `θSξ = ξ·b`, so Parseval-ization
//! is `η·b^{-1/2}` and the dual window is `η·b^{-1}`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{herm_left, herm_right, herm_right_radius, lattice_multiply, module_act_left, module_act_right, LatticeElement, Side, TorusContext};
use crate::numerics::{herm_inv_sqrt, hermitian_eigenvalues, translate_bandlimited, GridFunction, C64};

/// Relative lower frame bound below which a window is not certified as a frame.
pub const FRAME_FLOOR: f64 = 1e-6;

/// Adjoint-lattice radius for Wexler–Raz checks.
pub const WR_RADIUS: usize = 3;

/// Wexler–Raz tolerance for calling a window Parseval.
pub const WR_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Serialize)]
pub struct FrameDiagnostics {
    pub theta: f64,
    pub window: String,
    /// Extreme spectral values of `θS`; Parseval means both equal 1.
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub is_frame: bool,
    /// `max |<η, π(k, l/θ) η> - δ_k0 δ_l0|` over `|k|, |l| <= 3`.
    pub wr_residual: f64,
    pub bound_method: BoundMethod,
    /// Compression radius, used when the bound method is [`BoundMethod::Compression`].
    pub frame_radius: usize,
    pub right_radius: usize,
    pub grid_half_width: f64,
    pub grid_points: usize,
}

/// Matrix of `c ↦ b ♮ c` on coefficients supported in the box of the given radius.
///
/// For self-adjoint `b` this is Hermitian, and its spectrum approximates that of `b`
/// from inside.
pub fn regular_representation(b: &LatticeElement, radius: usize) -> DMatrix<C64> {
    let r = radius as i64;
    let side = (2 * radius + 1) as i64;
    let n = (side * side) as usize;
    let rate = match b.side() {
        Side::Left => -b.theta(),
        Side::Right => 1.0 / b.theta(),
    };
    let idx = |k: i64, l: i64| ((k + r) * side + (l + r)) as usize;
    let mut m = DMatrix::<C64>::zeros(n, n);
    for k in -r..=r {
        for l in -r..=r {
            for p in -r..=r {
                for q in -r..=r {
                    let c = b.get(k - p, l - q);
                    if c.re == 0.0 && c.im == 0.0 {
                        continue;
                    }
                    m[(idx(k, l), idx(p, q))] = c * C64::from_polar(1.0, 2.0 * PI * rate * ((k - p) * q) as f64);
                }
            }
        }
    }
    m
}

/// Reads `f(b)` off the compressed regular representation: `f(b) = f(L_b) δ_00`.
pub fn lattice_function_dense(b: &LatticeElement, radius: usize, fm: &DMatrix<C64>) -> LatticeElement {
    let r = radius as i64;
    let side = (2 * radius + 1) as i64;
    let col = (r * side + r) as usize;
    LatticeElement::from_fn(b.theta(), b.side(), radius, radius, |k, l| fm[(((k + r) * side + (l + r)) as usize, col)])
}

/// `b^{-1/2}` through [`herm_inv_sqrt`] of the compressed regular representation.
pub fn lattice_inv_sqrt_dense(b: &LatticeElement, radius: usize) -> Result<LatticeElement> {
    let m = regular_representation(b, radius);
    let r = herm_inv_sqrt(&m, None)?;
    Ok(lattice_function_dense(b, radius, &r))
}

/// Extreme eigenvalues of the symmetrized regular representation compressed to `radius`;
/// they lie inside the spectrum and approach its ends as the radius grows.
pub fn compression_bounds(b: &LatticeElement, radius: usize) -> (f64, f64) {
    let m = regular_representation(b, radius);
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let values = hermitian_eigenvalues(&m);
    (values[0], values[values.len() - 1])
}

/// How the spectral range of `<η,η>_B` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    /// Sampling finite-dimensional representations (rational rotation number).
    Symbol,
    /// Extreme eigenvalues of the compressed regular representation.
    Compression,
}

/// Largest denominator of the rotation number for which [`BoundMethod::Symbol`] is used.
pub const MAX_SYMBOL_DENOMINATOR: i64 = 48;

/// `p/q` with `q <= max_den` and `|x - p/q| < 1e-10 max(1, |x|)`, by continued fractions.
pub fn rational_approximation(x: f64, max_den: i64) -> Option<(i64, i64)> {
    let (mut h0, mut h1) = (0_i64, 1_i64);
    let (mut k0, mut k1) = (1_i64, 0_i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e12 {
            return None;
        }
        let a = a as i64;
        (h0, h1) = (h1, a * h1 + h0);
        (k0, k1) = (k1, a * k1 + k0);
        if k1 > max_den {
            return None;
        }
        if (x - h1 as f64 / k1 as f64).abs() < 1e-10 * x.abs().max(1.0) {
            return Some((h1, k1));
        }
        let frac = r - a as f64;
        if frac == 0.0 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

/// Image of `b` under `U ↦ e^{2πix} C`, `V ↦ e^{2πiy} S` on `ℂⁿ`, where `C` is the
/// clock `diag(e^{2πi a j / n})`, `S` the cyclic shift and `δ_kl ↦ V^l U^k`.
/// Requires the rotation number of `b` to be `a/n` (mod 1).
pub fn symbol_matrix(b: &LatticeElement, a: i64, n: i64, x: f64, y: f64) -> DMatrix<C64> {
    let nu = n as usize;
    let mut m = DMatrix::<C64>::zeros(nu, nu);
    let clock: Vec<C64> = (0..n).map(|j| C64::from_polar(1.0, 2.0 * PI * ((a * j).rem_euclid(n)) as f64 / n as f64)).collect();
    for (k, l, c) in b.iter() {
        if c.re == 0.0 && c.im == 0.0 {
            continue;
        }
        let phase = c * C64::from_polar(1.0, 2.0 * PI * (x * k as f64 + y * l as f64));
        let shift = l.rem_euclid(n) as usize;
        let power = k.rem_euclid(n) as usize;
        for j in 0..nu {
            m[((j + shift) % nu, j)] += phase * clock[(power * j) % nu];
        }
    }
    m
}

/// Spectral range of self-adjoint `b` over the representations `(x, y)`:
/// a `24 × 24` sweep of the torus, then three rounds of local refinement
/// around the extreme points.
fn symbol_bounds(b: &LatticeElement, a: i64, n: i64) -> (f64, f64) {
    let b = b.trimmed(1e-16);
    let extremes = |x: f64, y: f64| {
        let m = symbol_matrix(&b, a, n, x, y);
        let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let v = hermitian_eigenvalues(&m);
        (v[0], v[v.len() - 1])
    };
    let g = 24;
    let samples: Vec<(f64, f64, f64, f64)> = (0..g * g)
        .into_par_iter()
        .map(|i| {
            let (x, y) = ((i / g) as f64 / g as f64, (i % g) as f64 / g as f64);
            let (lo, hi) = extremes(x, y);
            (x, y, lo, hi)
        })
        .collect();
    let refine = |start: (f64, f64, f64), pick: &dyn Fn(f64, f64) -> f64, better: &dyn Fn(f64, f64) -> bool| {
        let (mut x, mut y, mut best) = start;
        let mut h = 1.0 / g as f64;
        for _ in 0..3 {
            h /= 3.0;
            let (cx, cy) = (x, y);
            for i in -3..=3 {
                for j in -3..=3 {
                    let (px, py) = (cx + i as f64 * h, cy + j as f64 * h);
                    let (lo, hi) = extremes(px, py);
                    let v = pick(lo, hi);
                    if better(v, best) {
                        (x, y, best) = (px, py, v);
                    }
                }
            }
        }
        best
    };
    let lo0 = samples.iter().fold((0.0, 0.0, f64::INFINITY), |m, s| if s.2 < m.2 { (s.0, s.1, s.2) } else { m });
    let hi0 = samples.iter().fold((0.0, 0.0, f64::NEG_INFINITY), |m, s| if s.3 > m.2 { (s.0, s.1, s.3) } else { m });
    let lower = refine(lo0, &|lo, _| lo, &|v, b| v < b);
    let upper = refine(hi0, &|_, hi| hi, &|v, b| v > b);
    (lower, upper)
}

/// Extreme spectral values of self-adjoint `b`, by [`BoundMethod::Symbol`] when the
/// rotation number is a fraction with denominator at most
/// [`MAX_SYMBOL_DENOMINATOR`], otherwise by compression at `radius`.
pub fn spectral_bounds(b: &LatticeElement, radius: usize) -> (f64, f64, BoundMethod) {
    let rate = match b.side() {
        Side::Left => -b.theta(),
        Side::Right => 1.0 / b.theta(),
    };
    match rational_approximation(rate, MAX_SYMBOL_DENOMINATOR) {
        Some((a, n)) => {
            let (lo, hi) = symbol_bounds(b, a, n);
            (lo, hi, BoundMethod::Symbol)
        }
        None => {
            let (lo, hi) = compression_bounds(b, radius);
            (lo, hi, BoundMethod::Compression)
        }
    }
}

fn wr_deviation(b: &LatticeElement) -> f64 {
    let r = WR_RADIUS as i64;
    let mut dev: f64 = 0.0;
    for k in -r..=r {
        for l in -r..=r {
            let want = if k == 0 && l == 0 { 1.0 } else { 0.0 };
            dev = dev.max((b.get(k, l) - want).norm());
        }
    }
    dev
}

/// Wexler–Raz residual of `ψ` on `|k|, |l| <= 3` of the adjoint lattice.
pub fn wexler_raz_residual(psi: &GridFunction, ctx: &TorusContext) -> Result<f64> {
    Ok(wr_deviation(&herm_right_radius(psi, psi, ctx.theta, WR_RADIUS.max(ctx.r_max))?))
}

fn diagnostics_from(b: &LatticeElement, ctx: &TorusContext) -> FrameDiagnostics {
    let (lower, upper, bound_method) = spectral_bounds(b, ctx.frame_radius);
    FrameDiagnostics {
        theta: ctx.theta,
        window: String::new(),
        lower_bound: lower,
        upper_bound: upper,
        is_frame: lower > FRAME_FLOOR * upper,
        wr_residual: wr_deviation(b),
        bound_method,
        frame_radius: ctx.frame_radius,
        right_radius: ctx.r_max,
        grid_half_width: ctx.grid.half_width(),
        grid_points: ctx.grid.num_points(),
    }
}

/// Frame bounds of `{π(θk, l)η}` as the spectral range of `<η,η>_B`.
pub fn frame_bounds(eta: &GridFunction, ctx: &TorusContext) -> Result<FrameDiagnostics> {
    let b = herm_right(eta, eta, ctx)?;
    Ok(diagnostics_from(&b, ctx))
}

/// `θSξ = Σ θ <ξ, π(θk,l)η> π(θk,l)η`, evaluated as `<ξ,η>·η`.
pub fn frame_operator_apply(eta: &GridFunction, ctx: &TorusContext, xi: &GridFunction) -> Result<GridFunction> {
    module_act_left(&herm_left(xi, eta, ctx)?, eta)
}

/// Largest grid accepted by [`frame_operator_matrix`].
pub const DENSE_FRAME_LIMIT: usize = 4096;

/// Grid matrix of the frame operator `S = Σ_{k,l} π(θk,l)η ⊗ π(θk,l)η*`.
///
/// Requires `1/h` to be an integer `M`. Summing the modulations over one period
/// of `M` consecutive `l` then leaves the Walnut form
/// `S_ij = Σ_k η(t_i - θk) conj(η(t_j - θk))` for `i ≡ j (mod M)` and zero
/// otherwise, so integer time shifts are exact index shifts. Every lattice
/// translate that overlaps the grid is included.
pub fn frame_operator_matrix(eta: &GridFunction, ctx: &TorusContext) -> Result<DMatrix<C64>> {
    let g = *eta.grid();
    if g != ctx.grid {
        return Err(Error::GridMismatch);
    }
    let n = g.num_points();
    if n > DENSE_FRAME_LIMIT {
        return Err(Error::Domain(format!("dense frame operator limited to {DENSE_FRAME_LIMIT} grid points, got {n}")));
    }
    let h = g.step();
    let m = (1.0 / h).round();
    if (1.0 / h - m).abs() > 1e-9 * m || m < 1.0 {
        return Err(Error::Domain(format!("frame operator grid needs an integer number of points per unit length, got 1/h = {}", 1.0 / h)));
    }
    let m = m as usize;
    let k_s = (2.0 * g.half_width() / ctx.theta).floor() as i64;
    let peak = eta.peak();
    let shifts: Vec<Vec<C64>> = (-k_s..=k_s)
        .into_par_iter()
        .map(|k| translate_bandlimited(eta.values(), h, ctx.theta * k as f64))
        .filter(|v| v.iter().any(|x| x.norm() > 1e-14 * peak))
        .collect();
    let mut s = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        for j in (i % m..n).step_by(m) {
            let mut acc = C64::new(0.0, 0.0);
            for v in &shifts {
                acc += v[i] * v[j].conj();
            }
            s[(i, j)] = acc;
        }
    }
    Ok(s)
}

/// `b^{-1/2}` and `b^{1/2}` in the truncated algebra.
#[derive(Debug, Clone)]
pub struct InverseSqrt {
    pub inv_sqrt: LatticeElement,
    pub sqrt: LatticeElement,
    /// Polynomial degree (Chebyshev) or iteration count (Newton–Schulz).
    pub iterations: usize,
    /// Consistency residual of the route (see the constructors).
    pub residual: f64,
}

/// Residual above which an inverse square root is rejected.
pub const INV_SQRT_LIMIT: f64 = 1e-2;

/// Chebyshev coefficients of `f` on `[lo, hi]`, cut where they drop below `1e-14`
/// of the largest. The first coefficient is already halved.
fn chebyshev_coefficients(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut n = 32;
    loop {
        let samples: Vec<f64> = (0..n)
            .map(|j| {
                let x = (PI * (j as f64 + 0.5) / n as f64).cos();
                f(0.5 * (hi + lo) + 0.5 * (hi - lo) * x)
            })
            .collect();
        let mut c: Vec<f64> = (0..n)
            .map(|k| {
                let sum: f64 = samples.iter().enumerate().map(|(j, v)| v * (PI * k as f64 * (j as f64 + 0.5) / n as f64).cos()).sum();
                2.0 * sum / n as f64
            })
            .collect();
        c[0] *= 0.5;
        let peak = c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let tail = c[n - 4..].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if tail < 1e-14 * peak || n >= 4096 {
            let last = c.iter().rposition(|v| v.abs() >= 1e-14 * peak).unwrap_or(0);
            c.truncate(last + 1);
            return c;
        }
        n *= 2;
    }
}

/// A Chebyshev expansion of a scalar function, applied through left
/// multiplication by `b` restricted to the box of `b`.
struct ChebyshevCalculus {
    x2: LatticeElement,
    coeffs: Vec<f64>,
}

impl ChebyshevCalculus {
    fn new(b: &LatticeElement, f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::Domain(format!("empty spectral interval [{lo}, {hi}]")));
        }
        let unit = LatticeElement::unit(b.theta(), b.side(), b.k_max(), b.l_max());
        // 2x with x = (2b - (lo + hi)) / (hi - lo); b is trimmed so products stay narrow.
        let x2 = b
            .trimmed(1e-14)
            .scale(C64::new(4.0 / (hi - lo), 0.0))
            .sub(&unit.scale(C64::new(2.0 * (hi + lo) / (hi - lo), 0.0)))?;
        Ok(Self { x2, coeffs: chebyshev_coefficients(f, lo, hi) })
    }

    /// `f(M) v` by Clenshaw's recurrence, `M = P L_b P`.
    fn apply(&self, v: &LatticeElement) -> Result<LatticeElement> {
        let c = &self.coeffs;
        let mut y1 = LatticeElement::zeros(v.theta(), v.side(), v.k_max(), v.l_max());
        let mut y2 = y1.clone();
        for &ck in c.iter().skip(1).rev() {
            let y = lattice_multiply(&self.x2, &y1)?.sub(&y2)?.add(&v.scale(C64::new(ck, 0.0)))?;
            y2 = y1;
            y1 = y;
        }
        lattice_multiply(&self.x2, &y1)?
            .scale(C64::new(0.5, 0.0))
            .sub(&y2)?
            .add(&v.scale(C64::new(c[0], 0.0)))
    }
}

/// `f(b)` for self-adjoint `b` with spectrum in `[lo, hi]`, with the polynomial degree used.
///
/// Every step multiplies by `b` (narrow support) and truncates to the box of `b`,
/// so the result is `f(P L_b P) δ_00`, the same compression as the dense route.
pub fn lattice_chebyshev(b: &LatticeElement, f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<(LatticeElement, usize)> {
    let calc = ChebyshevCalculus::new(b, f, lo, hi)?;
    let unit = LatticeElement::unit(b.theta(), b.side(), b.k_max(), b.l_max());
    Ok((calc.apply(&unit)?, calc.coeffs.len()))
}

/// `b^{-1/2}`, by whichever of [`lattice_inv_sqrt_chebyshev`] and
/// [`lattice_inv_sqrt_newton`] is cheaper for this `b`.
///
/// Chebyshev costs about `3d` products by `b` (narrow when the window is well
/// localized), Newton–Schulz about `2n` full products; `d` and `n` are
/// estimated from the condition number.
pub fn lattice_inv_sqrt(b: &LatticeElement) -> Result<InverseSqrt> {
    let radius = b.k_max().min(b.l_max()).min(10);
    let (lower, upper, _) = spectral_bounds(b, radius);
    inv_sqrt_within(b, lower, upper)
}

/// [`lattice_inv_sqrt`] with spectral estimates already computed.
fn inv_sqrt_within(b: &LatticeElement, lower: f64, upper: f64) -> Result<InverseSqrt> {
    if !(lower > 0.0) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: lower });
    }
    let kappa = 1.375 * upper / lower;
    let rho = (kappa.sqrt() + 1.0) / (kappa.sqrt() - 1.0);
    let degree = 14.0 * 10f64.ln() / rho.ln();
    let iterations = kappa.log2() + 8.0;
    let (sk, sl) = b.trimmed(1e-14).support_radii();
    let narrow = ((2 * sk + 1) * (2 * sl + 1)) as f64;
    let full = ((2 * b.k_max() + 1) * (2 * b.l_max() + 1)) as f64;
    if 3.0 * degree * narrow <= 2.0 * iterations * full {
        chebyshev_inv_sqrt(b, lower, upper)
    } else {
        lattice_inv_sqrt_newton(b)
    }
}

/// `b^{-1/2}` by a Chebyshev expansion of `x^{-1/2}` on the compressed
/// regular representation `M`.
///
/// The interval comes from the spectrum of `M` at radius `min(radius, 10)`,
/// widened by 20% below and 10% above. The check `f(M)² M δ_00 = δ_00` does not
/// see truncation, only the polynomial and the interval; if it misses `1e-10`
/// the lower end is halved and the expansion repeated (at most 6 times).
/// `residual` is that check.
pub fn lattice_inv_sqrt_chebyshev(b: &LatticeElement) -> Result<InverseSqrt> {
    let radius = b.k_max().min(b.l_max()).min(10);
    let (lower, upper, _) = spectral_bounds(b, radius);
    if !(lower > 0.0) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: lower });
    }
    chebyshev_inv_sqrt(b, lower, upper)
}

fn chebyshev_inv_sqrt(b: &LatticeElement, lower: f64, upper: f64) -> Result<InverseSqrt> {
    let l1: f64 = b.iter().map(|(_, _, v)| v.norm()).sum();
    let unit = LatticeElement::unit(b.theta(), b.side(), b.k_max(), b.l_max());
    let narrow = b.trimmed(1e-14);
    let hi = (1.1 * upper).min(l1).max(upper);
    let mut lo = 0.8 * lower;
    let mut best: Option<InverseSqrt> = None;
    for _ in 0..6 {
        let calc = ChebyshevCalculus::new(b, |x| x.powf(-0.5), lo, hi)?;
        let z = calc.apply(&unit)?;
        let sqrt = lattice_multiply(&narrow, &z)?;
        let err = calc.apply(&sqrt)?.sup_distance(&unit)?;
        if best.as_ref().is_none_or(|r| err < r.residual) {
            best = Some(InverseSqrt { inv_sqrt: z, sqrt, iterations: calc.coeffs.len(), residual: err });
        }
        if err < 1e-10 {
            break;
        }
        lo *= 0.5;
    }
    let best = best.expect("at least one attempt");
    if !best.residual.is_finite() || best.residual > INV_SQRT_LIMIT {
        return Err(Error::NoConvergence(format!("Chebyshev inverse square root residual {:.3e}", best.residual)));
    }
    Ok(best)
}

/// Coupled Newton–Schulz iteration `T = (3 - ZY)/2, Y ← YT, Z ← TZ` started from
/// `Y = b/c`, `Z = 1` with `c` the ℓ¹ norm of the coefficients (an upper bound
/// for the operator norm). Independent of any spectral estimate; used as a
/// cross-check of [`lattice_inv_sqrt`].
pub fn lattice_inv_sqrt_newton(b: &LatticeElement) -> Result<InverseSqrt> {
    let c: f64 = b.iter().map(|(_, _, v)| v.norm()).sum();
    if c == 0.0 {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: 0.0 });
    }
    let unit = LatticeElement::unit(b.theta(), b.side(), b.k_max(), b.l_max());
    let mut y = b.scale(C64::new(1.0 / c, 0.0));
    let mut z = unit.clone();
    let mut best: Option<(f64, LatticeElement, LatticeElement, usize)> = None;
    let mut stalls = 0;
    for it in 0..200 {
        let zy = lattice_multiply(&z, &y)?;
        let err = zy.sup_distance(&unit)?;
        if best.as_ref().is_none_or(|(e, ..)| err < *e) {
            best = Some((err, y.clone(), z.clone(), it));
            stalls = 0;
        } else {
            stalls += 1;
        }
        if err < 1e-14 || stalls >= 3 {
            break;
        }
        let t = unit.scale(C64::new(1.5, 0.0)).sub(&zy.scale(C64::new(0.5, 0.0)))?;
        y = lattice_multiply(&y, &t)?;
        z = lattice_multiply(&t, &z)?;
    }
    let (err, y, z, it) = best.expect("at least one iterate");
    if !err.is_finite() || err > INV_SQRT_LIMIT {
        return Err(Error::NoConvergence(format!("Newton-Schulz residual {err:.3e}")));
    }
    Ok(InverseSqrt {
        inv_sqrt: z.scale(C64::new(c.powf(-0.5), 0.0)),
        sqrt: y.scale(C64::new(c.sqrt(), 0.0)),
        iterations: it,
        residual: err,
    })
}

/// A Parseval window with the data that produced it.
#[derive(Debug, Clone)]
pub struct TightWindow {
    pub window: GridFunction,
    /// `<η,η>_B^{-1/2}`.
    pub inv_sqrt: LatticeElement,
    /// Diagnostics of the input window.
    pub frame: FrameDiagnostics,
    /// Wexler–Raz residual of the output.
    pub wr_residual: f64,
}

fn require_frame(b: &LatticeElement, ctx: &TorusContext) -> Result<FrameDiagnostics> {
    let d = diagnostics_from(b, ctx);
    if !d.is_frame {
        return Err(Error::NotAFrame { lower_bound: d.lower_bound, upper_bound: d.upper_bound });
    }
    Ok(d)
}

/// `ψ = η·<η,η>_B^{-1/2}`; equivalently `(θS)^{-1/2} η`.
pub fn tight_window(eta: &GridFunction, ctx: &TorusContext) -> Result<TightWindow> {
    let b = herm_right(eta, eta, ctx)?;
    let frame = require_frame(&b, ctx)?;
    let ns = inv_sqrt_within(&b, frame.lower_bound, frame.upper_bound)?;
    let window = module_act_right(eta, &ns.inv_sqrt)?;
    let wr_residual = wexler_raz_residual(&window, ctx)?;
    Ok(TightWindow { window, inv_sqrt: ns.inv_sqrt, frame, wr_residual })
}

pub fn canonical_tight_window(eta: &GridFunction, ctx: &TorusContext) -> Result<GridFunction> {
    Ok(tight_window(eta, ctx)?.window)
}

/// `η° = η·<η,η>_B^{-1}`, biorthogonal to `η` on the adjoint lattice.
pub fn dual_window(eta: &GridFunction, ctx: &TorusContext) -> Result<GridFunction> {
    let b = herm_right(eta, eta, ctx)?;
    let frame = require_frame(&b, ctx)?;
    let ns = inv_sqrt_within(&b, frame.lower_bound, frame.upper_bound)?;
    let inv = lattice_multiply(&ns.inv_sqrt, &ns.inv_sqrt)?;
    module_act_right(eta, &inv)
}

/// `max |<η°, π(k, l/θ) η> - δ|` over `|k|, |l| <= 3`.
pub fn biorthogonality_residual(dual: &GridFunction, eta: &GridFunction, ctx: &TorusContext) -> Result<f64> {
    Ok(wr_deviation(&herm_right_radius(dual, eta, ctx.theta, WR_RADIUS)?))
}
