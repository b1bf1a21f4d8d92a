//! Truncated smooth noncommutative tori acting on `L²(ℝ)`.
//!
//! `Left` elements act by `a·ξ = Σ a_kl π(θk, l) ξ`; `Right` elements act by
//! `ξ·b = Σ b_kl π(k, l/θ)* ξ` and form the commutant algebra.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ensure_same_grid, translate_bandlimited, Grid1D, GridFunction, C64, I};
use crate::window::Window;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Coefficients `a_kl`, `|k| <= K`, `|l| <= L`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeElement {
    theta: f64,
    side: Side,
    k_max: usize,
    l_max: usize,
    coeffs: Vec<C64>,
    tail_bound: f64,
}

/// Coefficients below this modulus are omitted from JSON.
pub const SERIALIZATION_CUTOFF: f64 = 1e-14;

/// Relative boundary size above which truncation is reported as lossy.
pub const TAIL_WARNING: f64 = 1e-8;

impl LatticeElement {
    pub fn zeros(theta: f64, side: Side, k_max: usize, l_max: usize) -> Self {
        let n = (2 * k_max + 1) * (2 * l_max + 1);
        Self::from_parts(theta, side, k_max, l_max, vec![C64::new(0.0, 0.0); n])
    }

    pub fn unit(theta: f64, side: Side, k_max: usize, l_max: usize) -> Self {
        Self::delta(theta, side, k_max, l_max, 0, 0, C64::new(1.0, 0.0))
    }

    pub fn delta(theta: f64, side: Side, k_max: usize, l_max: usize, k: i64, l: i64, c: C64) -> Self {
        let mut e = Self::zeros(theta, side, k_max, l_max);
        e.set(k, l, c);
        e
    }

    /// Builds an element from `f(k, l)`.
    pub fn from_fn(theta: f64, side: Side, k_max: usize, l_max: usize, mut f: impl FnMut(i64, i64) -> C64) -> Self {
        let (kk, ll) = (k_max as i64, l_max as i64);
        let coeffs = (-kk..=kk).flat_map(|k| (-ll..=ll).map(move |l| (k, l))).map(|(k, l)| f(k, l)).collect();
        Self::from_parts(theta, side, k_max, l_max, coeffs)
    }

    fn from_parts(theta: f64, side: Side, k_max: usize, l_max: usize, coeffs: Vec<C64>) -> Self {
        let mut e = Self { theta, side, k_max, l_max, coeffs, tail_bound: 0.0 };
        e.refresh_tail();
        e
    }

    fn refresh_tail(&mut self) {
        let (kk, ll) = (self.k_max as i64, self.l_max as i64);
        let mut tail: f64 = 0.0;
        for k in -kk..=kk {
            for l in -ll..=ll {
                if k.abs() == kk || l.abs() == ll {
                    tail = tail.max(self.get(k, l).norm());
                }
            }
        }
        self.tail_bound = tail;
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// Largest modulus on the boundary ring `|k| = K` or `|l| = L`.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Whether the boundary ring exceeds `1e-8` of the largest coefficient.
    pub fn tail_warning(&self) -> bool {
        self.tail_bound > TAIL_WARNING * self.max_abs()
    }

    fn index(&self, k: i64, l: i64) -> Option<usize> {
        let (kk, ll) = (self.k_max as i64, self.l_max as i64);
        (k.abs() <= kk && l.abs() <= ll).then(|| ((k + kk) * (2 * ll + 1) + (l + ll)) as usize)
    }

    /// `a_kl`, zero outside the box.
    pub fn get(&self, k: i64, l: i64) -> C64 {
        self.index(k, l).map_or(C64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    /// Sets `a_kl`; panics outside the box.
    pub fn set(&mut self, k: i64, l: i64, c: C64) {
        let i = self.index(k, l).expect("index inside the truncation box");
        self.coeffs[i] = c;
        self.refresh_tail();
    }

    /// `(k, l, a_kl)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, C64)> + '_ {
        let (kk, ll) = (self.k_max as i64, self.l_max as i64);
        (-kk..=kk).flat_map(move |k| (-ll..=ll).map(move |l| (k, l, self.get(k, l))))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Same element in a different box (dropping or zero-filling coefficients).
    pub fn resized(&self, k_max: usize, l_max: usize) -> Self {
        Self::from_fn(self.theta, self.side, k_max, l_max, |k, l| self.get(k, l))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.side != other.side || self.theta != other.theta {
            return Err(Error::AlgebraMismatch);
        }
        Ok(())
    }

    fn zip(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        self.check_compatible(other)?;
        let (k, l) = (self.k_max.max(other.k_max), self.l_max.max(other.l_max));
        Ok(Self::from_fn(self.theta, self.side, k, l, |a, b| f(self.get(a, b), other.get(a, b))))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, c: C64) -> Self {
        let coeffs = self.coeffs.iter().map(|v| v * c).collect();
        Self::from_parts(self.theta, self.side, self.k_max, self.l_max, coeffs)
    }

    /// `sup_kl |a_kl - b_kl|` over the union of both boxes.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Smallest `(K', L')` such that all non-zero coefficients satisfy `|k| <= K'`, `|l| <= L'`.
    pub fn support_radii(&self) -> (i64, i64) {
        self.iter()
            .filter(|(_, _, c)| c.re != 0.0 || c.im != 0.0)
            .fold((0, 0), |(a, b), (k, l, _)| (a.max(k.abs()), b.max(l.abs())))
    }

    /// Copy with coefficients below `cutoff` times the largest set to zero.
    pub fn trimmed(&self, cutoff: f64) -> Self {
        let floor = cutoff * self.max_abs();
        let coeffs = self.coeffs.iter().map(|&c| if c.norm() < floor { C64::new(0.0, 0.0) } else { c }).collect();
        Self::from_parts(self.theta, self.side, self.k_max, self.l_max, coeffs)
    }

    /// `-θ` for the Left side, `1/θ` for the Right side: the phase rate of the product.
    fn product_rate(&self) -> f64 {
        match self.side {
            Side::Left => -self.theta,
            Side::Right => 1.0 / self.theta,
        }
    }
}

/// Twisted convolution of coefficient arrays.
///
/// Left: `(a♮b)_kl = Σ a_mn b_{k-m,l-n} exp(-2πiθ m(l-n))`, from
/// `π(θm,n)π(θm',n') = exp(-2πiθ m n') π(θ(m+m'), n+n')`.
///
/// Right: `(a♮b)_kl = Σ a_mn b_{k-m,l-n} exp(+2πi m(l-n)/θ)`, so that
/// `ξ·(a♮b) = (ξ·a)·b`.
pub fn lattice_multiply(a: &LatticeElement, b: &LatticeElement) -> Result<LatticeElement> {
    a.check_compatible(b)?;
    let (ka, la) = (a.k_max as i64, a.l_max as i64);
    let (kb, lb) = (b.k_max as i64, b.l_max as i64);
    let (kk, ll) = (ka.max(kb), la.max(lb));
    let rate = a.product_rate();
    // Only the support of `a` contributes; narrow left factors are cheap.
    let (sk, sl) = a.support_radii();
    let span = (2 * lb + 1) as usize;
    let phase: Vec<C64> = (-ka..=ka)
        .flat_map(|m| (-lb..=lb).map(move |d| C64::from_polar(1.0, 2.0 * PI * rate * (m * d) as f64)))
        .collect();
    let rows: Vec<Vec<C64>> = (-kk..=kk)
        .into_par_iter()
        .map(|k| {
            (-ll..=ll)
                .map(|l| {
                    let mut acc = C64::new(0.0, 0.0);
                    for m in (-sk).max(k - kb)..=sk.min(k + kb) {
                        let prow = ((m + ka) as usize) * span;
                        for n in (-sl).max(l - lb)..=sl.min(l + lb) {
                            let av = a.get(m, n);
                            if av.re == 0.0 && av.im == 0.0 {
                                continue;
                            }
                            let d = l - n;
                            acc += av * b.get(k - m, d) * phase[prow + (d + lb) as usize];
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    Ok(LatticeElement::from_parts(a.theta, a.side, kk as usize, ll as usize, rows.concat()))
}

/// Left: `(a*)_kl = exp(-2πiθkl) conj(a_{-k,-l})`; Right: phase `exp(+2πikl/θ)`.
pub fn lattice_involution(a: &LatticeElement) -> LatticeElement {
    let rate = a.product_rate();
    LatticeElement::from_fn(a.theta, a.side, a.k_max, a.l_max, |k, l| {
        C64::from_polar(1.0, 2.0 * PI * rate * (k * l) as f64) * a.get(-k, -l).conj()
    })
}

/// Left: `a_00`; Right: `θ b_00`.
pub fn lattice_trace(a: &LatticeElement) -> C64 {
    match a.side {
        Side::Left => a.get(0, 0),
        Side::Right => a.get(0, 0) * a.theta,
    }
}

/// `tr(a ♮ b)` without forming the product.
pub fn lattice_trace_product(a: &LatticeElement, b: &LatticeElement) -> Result<C64> {
    a.check_compatible(b)?;
    let rate = a.product_rate();
    let mut acc = C64::new(0.0, 0.0);
    for (m, n, av) in a.iter() {
        let bv = b.get(-m, -n);
        if bv.re == 0.0 && bv.im == 0.0 {
            continue;
        }
        acc += av * bv * C64::from_polar(1.0, -2.0 * PI * rate * (m * n) as f64);
    }
    Ok(match a.side {
        Side::Left => acc,
        Side::Right => acc * a.theta,
    })
}

/// Left: multiply by `2πik` (first) or `2πil` (second); Right: by `-2πik/θ` or `-2πil/θ`.
pub fn lattice_derivation(axis: crate::moyal::Axis, a: &LatticeElement) -> LatticeElement {
    let scale = match a.side {
        Side::Left => 2.0 * PI,
        Side::Right => -2.0 * PI / a.theta,
    };
    LatticeElement::from_fn(a.theta, a.side, a.k_max, a.l_max, |k, l| {
        let m = match axis {
            crate::moyal::Axis::First => k,
            crate::moyal::Axis::Second => l,
        };
        a.get(k, l) * I * (scale * m as f64)
    })
}

/// `∂̄ = ∂₁ + i∂₂`.
pub fn lattice_dbar(a: &LatticeElement) -> LatticeElement {
    use crate::moyal::Axis;
    lattice_derivation(Axis::First, a)
        .add(&lattice_derivation(Axis::Second, a).scale(I))
        .expect("same algebra")
}

/// `Σ_l c_l exp(2πi s t l)` for `l = -L..=L`, evaluated by a running product.
fn modulation_sum(c: &[C64], s: f64, t: f64) -> C64 {
    let l_max = (c.len() / 2) as f64;
    let step = C64::from_polar(1.0, 2.0 * PI * s * t);
    let mut cur = C64::from_polar(1.0, -2.0 * PI * s * t * l_max);
    let mut acc = C64::new(0.0, 0.0);
    for &cl in c {
        acc += cl * cur;
        cur *= step;
    }
    acc
}

/// `Σ_l w_j g_j exp(-2πi s t_j l)` for every `l`, i.e. the per-row Fourier sums
/// used by both hermitian products.
fn fourier_row(g: &[C64], ts: &[f64], s: f64, l_max: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); 2 * l_max + 1];
    for (&gj, &t) in g.iter().zip(ts) {
        if gj.re == 0.0 && gj.im == 0.0 {
            continue;
        }
        let step = C64::from_polar(1.0, -2.0 * PI * s * t);
        let mut cur = gj * C64::from_polar(1.0, 2.0 * PI * s * t * l_max as f64);
        for o in out.iter_mut() {
            *o += cur;
            cur *= step;
        }
    }
    out
}

fn check_span(shift: f64, grid: &Grid1D) -> Result<()> {
    if shift >= 0.5 * grid.half_width() {
        return Err(Error::TruncationOverflow { shift, required: 2.0 * shift, half_width: grid.half_width() });
    }
    Ok(())
}

fn row(a: &LatticeElement, k: i64) -> Vec<C64> {
    let ll = a.l_max as i64;
    (-ll..=ll).map(|l| a.get(k, l)).collect()
}

/// `a·ξ = Σ a_kl π(θk, l) ξ`.
pub fn module_act_left(a: &LatticeElement, xi: &GridFunction) -> Result<GridFunction> {
    if a.side != Side::Left {
        return Err(Error::AlgebraMismatch);
    }
    let g = *xi.grid();
    check_span(a.theta * a.k_max as f64, &g)?;
    let ts = g.points();
    let kk = a.k_max as i64;
    let parts: Vec<Option<Vec<C64>>> = (-kk..=kk)
        .into_par_iter()
        .map(|k| {
            let c = row(a, k);
            if c.iter().all(|v| v.norm() == 0.0) {
                return None;
            }
            let shifted = translate_bandlimited(xi.values(), g.step(), a.theta * k as f64);
            Some(ts.iter().zip(&shifted).map(|(&t, &s)| s * modulation_sum(&c, 1.0, t)).collect())
        })
        .collect();
    Ok(GridFunction::from_parts(g, accumulate(parts, ts.len())))
}

/// `ξ·b = Σ b_kl π(k, l/θ)* ξ`, with `π(k, l/θ)*ξ(t) = exp(-2πi kl/θ) exp(-2πi t l/θ) ξ(t + k)`.
pub fn module_act_right(xi: &GridFunction, b: &LatticeElement) -> Result<GridFunction> {
    if b.side != Side::Right {
        return Err(Error::AlgebraMismatch);
    }
    let g = *xi.grid();
    check_span(b.k_max as f64, &g)?;
    let ts = g.points();
    let kk = b.k_max as i64;
    let ll = b.l_max as i64;
    let inv = 1.0 / b.theta;
    let parts: Vec<Option<Vec<C64>>> = (-kk..=kk)
        .into_par_iter()
        .map(|k| {
            let c: Vec<C64> = (-ll..=ll)
                .map(|l| b.get(k, l) * C64::from_polar(1.0, -2.0 * PI * (k * l) as f64 * inv))
                .collect();
            if c.iter().all(|v| v.norm() == 0.0) {
                return None;
            }
            let shifted = translate_bandlimited(xi.values(), g.step(), -(k as f64));
            Some(ts.iter().zip(&shifted).map(|(&t, &s)| s * modulation_sum(&c, -inv, t)).collect())
        })
        .collect();
    Ok(GridFunction::from_parts(g, accumulate(parts, ts.len())))
}

fn accumulate(parts: Vec<Option<Vec<C64>>>, n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n];
    for p in parts.into_iter().flatten() {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    out
}

/// A-valued product: coefficients `θ V_η ξ(θk, l) = θ <ξ, π(θk, l) η>`.
pub fn herm_left(xi: &GridFunction, eta: &GridFunction, ctx: &TorusContext) -> Result<LatticeElement> {
    ensure_same_grid(xi.grid(), eta.grid())?;
    let g = *xi.grid();
    check_span(ctx.theta * ctx.k_max as f64, &g)?;
    let ts = g.points();
    let w = g.weights();
    let kk = ctx.k_max as i64;
    let rows: Vec<Vec<C64>> = (-kk..=kk)
        .into_par_iter()
        .map(|k| {
            let shifted = translate_bandlimited(eta.values(), g.step(), ctx.theta * k as f64);
            let prod: Vec<C64> = xi.values().iter().zip(&shifted).zip(&w).map(|((&a, b), &q)| a * b.conj() * (q * ctx.theta)).collect();
            fourier_row(&prod, &ts, 1.0, ctx.l_max)
        })
        .collect();
    Ok(LatticeElement::from_parts(ctx.theta, Side::Left, ctx.k_max, ctx.l_max, rows.concat()))
}

/// B-valued product: coefficients `<π(k, l/θ) η, ξ>`.
///
/// With this convention `<ξ,η>·ζ = ξ·<η,ζ>_B`, the product is B-linear in the
/// second slot and `tr <ξ,η>_B = θ <η,ξ>`.
pub fn herm_right(xi: &GridFunction, eta: &GridFunction, ctx: &TorusContext) -> Result<LatticeElement> {
    herm_right_radius(xi, eta, ctx.theta, ctx.r_max)
}

pub(crate) fn herm_right_radius(xi: &GridFunction, eta: &GridFunction, theta: f64, radius: usize) -> Result<LatticeElement> {
    ensure_same_grid(xi.grid(), eta.grid())?;
    let g = *xi.grid();
    check_span(radius as f64, &g)?;
    let ts = g.points();
    let w = g.weights();
    let kk = radius as i64;
    let rows: Vec<Vec<C64>> = (-kk..=kk)
        .into_par_iter()
        .map(|k| {
            let shifted = translate_bandlimited(eta.values(), g.step(), k as f64);
            // conj of Σ w ξ conj(η(t-k)) e^{-2πi t l/θ}.
            let prod: Vec<C64> = xi.values().iter().zip(&shifted).zip(&w).map(|((&a, b), &q)| a * b.conj() * q).collect();
            fourier_row(&prod, &ts, 1.0 / theta, radius).into_iter().map(|v| v.conj()).collect()
        })
        .collect();
    Ok(LatticeElement::from_parts(theta, Side::Right, radius, radius, rows.concat()))
}

/// Parameters shared by torus computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorusContext {
    pub theta: f64,
    /// Left truncation radii.
    pub k_max: usize,
    pub l_max: usize,
    /// Right truncation radius (both indices).
    pub r_max: usize,
    /// Box radius for the compressed regular representation used for frame bounds.
    pub frame_radius: usize,
    pub grid: Grid1D,
}

/// Largest truncation radius chosen automatically.
pub const MAX_RADIUS: usize = 24;

impl TorusContext {
    pub fn new(theta: f64, grid: Grid1D, k_max: usize, l_max: usize, r_max: usize) -> Result<Self> {
        check_theta(theta)?;
        let ctx = Self { theta, k_max, l_max, r_max, frame_radius: r_max.min(10), grid };
        check_span(theta * k_max as f64, &grid)?;
        check_span(r_max as f64, &grid)?;
        Ok(ctx)
    }

    /// `ceil(8 / min(θ, 1-θ))`, capped.
    pub fn default_left_radius(theta: f64) -> usize {
        ((8.0 / theta.min(1.0 - theta)).ceil() as usize).min(MAX_RADIUS)
    }

    pub fn default_right_radius(theta: f64, w: &Window) -> usize {
        let base = (4.0 / (1.0 - theta)).ceil() as usize;
        let r = match w {
            Window::Gaussian { .. } => base,
            Window::Hermite { k } => base + 4 * k,
            Window::TotallyPositive { .. } => base.max(16),
        };
        r.clamp(4, MAX_RADIUS)
    }

    /// Radii and a signal grid sized for `w` at this `θ`.
    pub fn for_window(theta: f64, w: &Window) -> Result<Self> {
        check_theta(theta)?;
        let k = Self::default_left_radius(theta);
        Self::for_window_with(theta, w, k, k, Self::default_right_radius(theta, w))
    }

    pub fn for_window_with(theta: f64, w: &Window, k_max: usize, l_max: usize, r_max: usize) -> Result<Self> {
        check_theta(theta)?;
        w.validate()?;
        let grid = Self::suggest_grid(theta, w, k_max, l_max, r_max);
        Self::new(theta, grid, k_max, l_max, r_max)
    }

    /// Half-width covering twice the largest shift plus the window,
    /// step resolving the largest modulation plus the window band.
    pub fn suggest_grid(theta: f64, w: &Window, k_max: usize, l_max: usize, r_max: usize) -> Grid1D {
        let shift = (theta * k_max as f64).max(r_max as f64);
        let extent = w.time_extent(1e-13);
        let half_width = (2.0 * shift + 2.0).max(shift + extent + 0.5 * r_max as f64);
        let freq = (l_max as f64).max(r_max as f64 / theta);
        let inv_h = 2.0 * (freq + w.bandwidth(1e-13)) + 4.0;
        let n = (2.0 * half_width * inv_h).ceil() as usize + 1;
        let n = (n + n % 2).max(16);
        Grid1D::new(half_width, n).expect("positive half-width")
    }

    pub fn with_frame_radius(mut self, radius: usize) -> Self {
        self.frame_radius = radius;
        self
    }

    pub fn unit_left(&self) -> LatticeElement {
        LatticeElement::unit(self.theta, Side::Left, self.k_max, self.l_max)
    }

    pub fn unit_right(&self) -> LatticeElement {
        LatticeElement::unit(self.theta, Side::Right, self.r_max, self.r_max)
    }
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain(format!("theta must lie strictly between 0 and 1, got {theta}")));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct LatticeJson {
    theta: f64,
    side: Side,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "L")]
    l: usize,
    coeffs: Vec<(i64, i64, f64, f64)>,
}

impl Serialize for LatticeElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LatticeJson {
            theta: self.theta,
            side: self.side,
            k: self.k_max,
            l: self.l_max,
            coeffs: self
                .iter()
                .filter(|(_, _, c)| c.norm() >= SERIALIZATION_CUTOFF)
                .map(|(k, l, c)| (k, l, c.re, c.im))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LatticeElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = LatticeJson::deserialize(d)?;
        let mut e = LatticeElement::zeros(j.theta, j.side, j.k, j.l);
        for (k, l, re, im) in j.coeffs {
            let i = e
                .index(k, l)
                .ok_or_else(|| serde::de::Error::custom(format!("coefficient ({k}, {l}) outside the box")))?;
            e.coeffs[i] = C64::new(re, im);
        }
        e.refresh_tail();
        Ok(e)
    }
}
