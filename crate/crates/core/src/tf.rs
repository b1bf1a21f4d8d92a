//! Time-frequency shifts, short-time Fourier transforms and the twisted
//! convolution algebra of phase-space symbols.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ensure_same_grid, tail_band, translate_bandlimited, weighted_dot, Grid1D, GridFunction, C64};

/// Phase-space point `z = (x, ω)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub omega: f64,
}

impl PhasePoint {
    pub const ORIGIN: PhasePoint = PhasePoint { x: 0.0, omega: 0.0 };

    pub fn new(x: f64, omega: f64) -> Self {
        Self { x, omega }
    }
}

impl std::ops::Add for PhasePoint {
    type Output = PhasePoint;
    fn add(self, o: PhasePoint) -> PhasePoint {
        PhasePoint::new(self.x + o.x, self.omega + o.omega)
    }
}

impl std::ops::Neg for PhasePoint {
    type Output = PhasePoint;
    fn neg(self) -> PhasePoint {
        PhasePoint::new(-self.x, -self.omega)
    }
}

/// Group 2-cocycle `c(z, z') = exp(-2πi x ω')`.
pub fn cocycle(z: PhasePoint, zp: PhasePoint) -> C64 {
    C64::from_polar(1.0, -2.0 * PI * z.x * zp.omega)
}

fn check_shift(x: f64, grid: &Grid1D) -> Result<()> {
    if x.abs() >= 0.5 * grid.half_width() {
        return Err(Error::ShiftTooLarge { shift: x, half_width: grid.half_width() });
    }
    Ok(())
}

/// `(π(z)ξ)(t) = exp(2πi t ω) ξ(t - x)`.
pub fn tf_shift(z: PhasePoint, xi: &GridFunction) -> Result<GridFunction> {
    check_shift(z.x, xi.grid())?;
    Ok(tf_shift_unchecked(z, xi))
}

pub(crate) fn tf_shift_unchecked(z: PhasePoint, xi: &GridFunction) -> GridFunction {
    let g = *xi.grid();
    let mut v = translate_bandlimited(xi.values(), g.step(), z.x);
    if z.omega != 0.0 {
        for (j, vj) in v.iter_mut().enumerate() {
            *vj *= C64::from_polar(1.0, 2.0 * PI * g.point(j) * z.omega);
        }
    }
    GridFunction::from_parts(g, v)
}

/// `π(z)* = exp(-2πi x ω) π(-z)`.
pub fn tf_shift_adjoint(z: PhasePoint, xi: &GridFunction) -> Result<GridFunction> {
    Ok(tf_shift(-z, xi)?.scale(C64::from_polar(1.0, -2.0 * PI * z.x * z.omega)))
}

/// `V_η ξ(z) = <ξ, π(z)η>`.
pub fn stft(xi: &GridFunction, eta: &GridFunction, z: PhasePoint) -> Result<C64> {
    ensure_same_grid(xi.grid(), eta.grid())?;
    let shifted = tf_shift(z, eta)?;
    Ok(weighted_dot(&xi.grid().weights(), xi.values(), shifted.values()))
}

/// Complex samples of a phase-space function on `x_grid × ω_grid`, row-major in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol2D {
    x_grid: Grid1D,
    w_grid: Grid1D,
    values: Vec<C64>,
    tail_bound: f64,
}

impl Symbol2D {
    pub fn new(x_grid: Grid1D, w_grid: Grid1D, values: Vec<C64>) -> Result<Self> {
        if values.len() != x_grid.num_points() * w_grid.num_points() {
            return Err(Error::Domain("symbol size does not match its grids".into()));
        }
        Ok(Self::from_parts(x_grid, w_grid, values))
    }

    pub(crate) fn from_parts(x_grid: Grid1D, w_grid: Grid1D, values: Vec<C64>) -> Self {
        let (nx, nw) = (x_grid.num_points(), w_grid.num_points());
        let (mx, mw) = (tail_band(nx), tail_band(nw));
        let mut tail: f64 = 0.0;
        for i in 0..nx {
            for j in 0..nw {
                if i < mx || i >= nx - mx || j < mw || j >= nw - mw {
                    tail = tail.max(values[i * nw + j].norm());
                }
            }
        }
        Self { x_grid, w_grid, values, tail_bound: tail }
    }

    pub fn from_fn(x_grid: Grid1D, w_grid: Grid1D, f: impl Fn(PhasePoint) -> C64) -> Self {
        let xs = x_grid.points();
        let ws = w_grid.points();
        let values = xs.iter().flat_map(|&x| ws.iter().map(move |&w| (x, w))).map(|(x, w)| f(PhasePoint::new(x, w))).collect();
        Self::from_parts(x_grid, w_grid, values)
    }

    pub fn zeros(x_grid: Grid1D, w_grid: Grid1D) -> Self {
        Self::from_parts(x_grid, w_grid, vec![C64::new(0.0, 0.0); x_grid.num_points() * w_grid.num_points()])
    }

    pub fn x_grid(&self) -> &Grid1D {
        &self.x_grid
    }

    pub fn w_grid(&self) -> &Grid1D {
        &self.w_grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.w_grid.num_points() + j]
    }

    pub fn point(&self, i: usize, j: usize) -> PhasePoint {
        PhasePoint::new(self.x_grid.point(i), self.w_grid.point(j))
    }

    /// Largest modulus on the outer 5% band of either axis.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(PhasePoint, C64) -> C64) -> Self {
        let nw = self.w_grid.num_points();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(n, &v)| f(self.point(n / nw, n % nw), v))
            .collect();
        Self::from_parts(self.x_grid, self.w_grid, values)
    }

    pub fn zip(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        self.ensure_same_grids(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self::from_parts(self.x_grid, self.w_grid, values))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|_, v| v * c)
    }

    /// Largest pointwise modulus of the difference.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        self.ensure_same_grids(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    pub fn sup_norm(&self) -> f64 {
        self.peak()
    }

    fn ensure_same_grids(&self, other: &Self) -> Result<()> {
        ensure_same_grid(&self.x_grid, &other.x_grid)?;
        ensure_same_grid(&self.w_grid, &other.w_grid)
    }

    /// Trapezoidal `∬ f ḡ` over the symbol grids.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.ensure_same_grids(other)?;
        let wx = self.x_grid.weights();
        let ww = self.w_grid.weights();
        let nw = ww.len();
        let mut acc = C64::new(0.0, 0.0);
        for (i, &a) in wx.iter().enumerate() {
            acc += weighted_dot(&ww, &self.values[i * nw..(i + 1) * nw], &other.values[i * nw..(i + 1) * nw]) * a;
        }
        Ok(acc)
    }
}

/// Default phase-space grid: 65 nodes on `[-6, 6]`, origin included.
pub fn default_symbol_grid() -> Grid1D {
    Grid1D::symmetric(6.0, 65).expect("valid constants")
}

/// Samples of `V_η ξ` on `xg × wg`.
pub fn stft_symbol(xi: &GridFunction, eta: &GridFunction, xg: &Grid1D, wg: &Grid1D) -> Result<Symbol2D> {
    ensure_same_grid(xi.grid(), eta.grid())?;
    let g = *xi.grid();
    for x in [xg.point(0), xg.point(xg.num_points() - 1)] {
        check_shift(x, &g)?;
    }
    let weights = g.weights();
    let ts = g.points();
    let ws = wg.points();
    // e^{-2πi t ω} folded with quadrature weights and ξ, one row per ω.
    let kernels: Vec<Vec<C64>> = ws
        .par_iter()
        .map(|&w| {
            ts.iter()
                .zip(&weights)
                .zip(xi.values())
                .map(|((&t, &q), &v)| v * C64::from_polar(q, -2.0 * PI * t * w))
                .collect()
        })
        .collect();
    let rows: Vec<Vec<C64>> = xg
        .points()
        .par_iter()
        .map(|&x| {
            let shifted = translate_bandlimited(eta.values(), g.step(), x);
            kernels
                .iter()
                .map(|k| k.iter().zip(&shifted).map(|(&a, b)| a * b.conj()).sum())
                .collect()
        })
        .collect();
    Ok(Symbol2D::from_parts(*xg, *wg, rows.concat()))
}

/// `|<V_η ξ, V_ψ φ> - <ξ, φ> conj(<η, ψ>)|` on the default symbol grid.
pub fn moyal_identity_residual(xi: &GridFunction, eta: &GridFunction, phi: &GridFunction, psi: &GridFunction) -> Result<f64> {
    let sg = default_symbol_grid();
    moyal_identity_residual_on(xi, eta, phi, psi, &sg, &sg)
}

pub fn moyal_identity_residual_on(
    xi: &GridFunction,
    eta: &GridFunction,
    phi: &GridFunction,
    psi: &GridFunction,
    xg: &Grid1D,
    wg: &Grid1D,
) -> Result<f64> {
    let a = stft_symbol(xi, eta, xg, wg)?;
    let b = stft_symbol(phi, psi, xg, wg)?;
    let lhs = a.inner(&b)?;
    let rhs = crate::numerics::inner_l2(xi, phi)? * crate::numerics::inner_l2(eta, psi)?.conj();
    Ok((lhs - rhs).norm())
}

struct Lattice2 {
    nx: usize,
    nw: usize,
    cx: isize,
    cw: isize,
    /// `phase[(a + cx) * (4cw + 1) + (d + 2cw)] = exp(-2πi hx hw a d)`.
    phase: Vec<C64>,
    wx: Vec<f64>,
    ww: Vec<f64>,
}

impl Lattice2 {
    fn new(xg: &Grid1D, wg: &Grid1D) -> Result<Self> {
        let (Some(cx), Some(cw)) = (xg.origin_index(), wg.origin_index()) else {
            return Err(Error::Domain("symbol grids need a node at the origin (odd point count)".into()));
        };
        let (cx, cw) = (cx as isize, cw as isize);
        let hh = xg.step() * wg.step();
        let span = (4 * cw + 1) as usize;
        let mut phase = Vec::with_capacity((2 * cx + 1) as usize * span);
        for a in -cx..=cx {
            for d in -2 * cw..=2 * cw {
                phase.push(C64::from_polar(1.0, -2.0 * PI * hh * (a * d) as f64));
            }
        }
        Ok(Self {
            nx: xg.num_points(),
            nw: wg.num_points(),
            cx,
            cw,
            phase,
            wx: xg.weights(),
            ww: wg.weights(),
        })
    }

    fn phase(&self, a: isize, d: isize) -> C64 {
        self.phase[((a + self.cx) * (4 * self.cw + 1) + d + 2 * self.cw) as usize]
    }

    /// `(f ♮ g)` at node `(i, j)`.
    fn product_at(&self, f: &[C64], g: &[C64], i: usize, j: usize) -> C64 {
        let (i, j) = (i as isize, j as isize);
        let (nx, nw) = (self.nx as isize, self.nw as isize);
        let mut acc = C64::new(0.0, 0.0);
        // z' = node (p, q); z - z' = node (i - p + c, j - q + c).
        let plo = (i - self.cx).max(0);
        let phi = (i + self.cx).min(nx - 1);
        let qlo = (j - self.cw).max(0);
        let qhi = (j + self.cw).min(nw - 1);
        for p in plo..=phi {
            let a = p - self.cx;
            let gi = i - p + self.cx;
            let mut row = C64::new(0.0, 0.0);
            for q in qlo..=qhi {
                let fv = f[(p * nw + q) as usize];
                if fv.re == 0.0 && fv.im == 0.0 {
                    continue;
                }
                let gj = j - q + self.cw;
                let d = (j - self.cw) - (q - self.cw);
                row += fv * g[(gi * nw + gj) as usize] * self.phase(a, d) * self.ww[q as usize];
            }
            acc += row * self.wx[p as usize];
        }
        acc
    }
}

/// `(f ♮ g)(z) = ∬ f(z') g(z - z') c(z', z - z') dz'`.
///
/// On grids with a node at the origin `z - z'` is again a node, so values of
/// `g` are read directly; points that leave the grid contribute zero.
pub fn twisted_convolve_cont(f: &Symbol2D, g: &Symbol2D) -> Result<Symbol2D> {
    f.ensure_same_grids(g)?;
    let lat = Lattice2::new(&f.x_grid, &f.w_grid)?;
    let rows: Vec<Vec<C64>> = (0..lat.nx)
        .into_par_iter()
        .map(|i| (0..lat.nw).map(|j| lat.product_at(&f.values, &g.values, i, j)).collect())
        .collect();
    Ok(Symbol2D::from_parts(f.x_grid, f.w_grid, rows.concat()))
}

/// `tr(f ♮ g) = (f ♮ g)(0)` without forming the full product.
pub fn trace_of_product(f: &Symbol2D, g: &Symbol2D) -> Result<C64> {
    f.ensure_same_grids(g)?;
    let lat = Lattice2::new(&f.x_grid, &f.w_grid)?;
    Ok(lat.product_at(&f.values, &g.values, lat.cx as usize, lat.cw as usize))
}

/// `f^⋆(z) = exp(-2πi x ω) conj(f(-z))`.
pub fn twisted_involution_cont(f: &Symbol2D) -> Symbol2D {
    let (nx, nw) = (f.x_grid.num_points(), f.w_grid.num_points());
    let mut values = Vec::with_capacity(nx * nw);
    for i in 0..nx {
        for j in 0..nw {
            let z = f.point(i, j);
            values.push(C64::from_polar(1.0, -2.0 * PI * z.x * z.omega) * f.at(nx - 1 - i, nw - 1 - j).conj());
        }
    }
    Symbol2D::from_parts(f.x_grid, f.w_grid, values)
}

/// `tr(f) = f(0)`.
pub fn trace_cont(f: &Symbol2D) -> Result<C64> {
    match (f.x_grid.origin_index(), f.w_grid.origin_index()) {
        (Some(i), Some(j)) => Ok(f.at(i, j)),
        _ => Err(Error::Domain("origin is not a grid node".into())),
    }
}

/// The integrated operator `∬ k(z) π(z) ξ dz`.
pub fn apply_symbol(k: &Symbol2D, xi: &GridFunction) -> Result<GridFunction> {
    let g = *xi.grid();
    for x in [k.x_grid.point(0), k.x_grid.point(k.x_grid.num_points() - 1)] {
        check_shift(x, &g)?;
    }
    let ts = g.points();
    let ws = k.w_grid.points();
    let wx = k.x_grid.weights();
    let ww = k.w_grid.weights();
    let nw = ws.len();
    let modulations: Vec<Vec<C64>> = ws
        .iter()
        .zip(&ww)
        .map(|(&w, &q)| ts.iter().map(|&t| C64::from_polar(q, 2.0 * PI * t * w)).collect())
        .collect();
    let parts: Vec<Vec<C64>> = (0..k.x_grid.num_points())
        .into_par_iter()
        .map(|i| {
            let row = &k.values[i * nw..(i + 1) * nw];
            if row.iter().all(|v| v.norm() == 0.0) {
                return vec![C64::new(0.0, 0.0); ts.len()];
            }
            let shifted = translate_bandlimited(xi.values(), g.step(), k.x_grid.point(i));
            (0..ts.len())
                .map(|n| {
                    let mut m = C64::new(0.0, 0.0);
                    for (b, &kv) in row.iter().enumerate() {
                        m += kv * modulations[b][n];
                    }
                    m * shifted[n] * wx[i]
                })
                .collect()
        })
        .collect();
    let mut out = vec![C64::new(0.0, 0.0); ts.len()];
    for p in &parts {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    Ok(GridFunction::from_parts(g, out))
}

/// `<ψ, η>^{-1} ∬ V_η ξ(z) π(z) ψ dz` on the default symbol grid.
pub fn reconstruct(xi: &GridFunction, eta: &GridFunction, psi: &GridFunction) -> Result<GridFunction> {
    let overlap = crate::numerics::inner_l2(psi, eta)?;
    if overlap.norm() <= 1e-6 {
        return Err(Error::DegeneratePair { overlap: overlap.norm() });
    }
    let sg = default_symbol_grid();
    let v = stft_symbol(xi, eta, &sg, &sg)?;
    Ok(apply_symbol(&v, psi)?.scale(overlap.inv()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{inner_l2, make_grid, relative_l2_error};
    use crate::window::{realize_window, Window};

    fn signal_grid() -> Grid1D {
        make_grid(16.0, 1024).unwrap()
    }

    fn gauss() -> GridFunction {
        realize_window(&Window::gaussian(), &signal_grid()).unwrap()
    }

    fn herm(k: usize) -> GridFunction {
        realize_window(&Window::hermite(k), &signal_grid()).unwrap()
    }

    fn gaussian_symbol(z: PhasePoint) -> C64 {
        C64::from_polar((-0.5 * PI * (z.x * z.x + z.omega * z.omega)).exp(), -PI * z.x * z.omega)
    }

    #[test]
    fn shift_identity_and_norm() {
        let g = herm(2);
        let s = tf_shift(PhasePoint::ORIGIN, &g).unwrap();
        assert_eq!(s.values(), g.values());
        let s = tf_shift(PhasePoint::new(1.7, -2.3), &g).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-8);
        assert!(tf_shift(PhasePoint::new(8.0, 0.0), &g).is_err());
    }

    #[test]
    fn shift_composition_cocycle() {
        let xi = herm(1);
        let (z, zp) = (PhasePoint::new(0.7, -1.1), PhasePoint::new(-1.3, 0.45));
        let lhs = tf_shift(z, &tf_shift(zp, &xi).unwrap()).unwrap();
        let rhs = tf_shift(z + zp, &xi).unwrap().scale(cocycle(z, zp));
        assert!(lhs.sub(&rhs).unwrap().peak() < 1e-8);
    }

    #[test]
    fn shifted_gaussian_closed_form() {
        let g = signal_grid();
        let s = tf_shift(PhasePoint::new(1.0, 0.0), &gauss()).unwrap();
        let c = 2f64.powf(0.25);
        for (j, v) in s.values().iter().enumerate() {
            let t = g.point(j) - 1.0;
            assert!((v - C64::new(c * (-PI * t * t).exp(), 0.0)).norm() < 1e-8);
        }
    }

    #[test]
    fn gaussian_overlap() {
        let s = tf_shift(PhasePoint::new(1.0, 0.0), &gauss()).unwrap();
        let ip = inner_l2(&gauss(), &s).unwrap();
        assert!((ip - C64::new((-PI / 2.0).exp(), 0.0)).norm() < 1e-8);
    }

    #[test]
    fn stft_gaussian_closed_form() {
        let sg = default_symbol_grid();
        let v = stft_symbol(&gauss(), &gauss(), &sg, &sg).unwrap();
        let want = Symbol2D::from_fn(sg, sg, gaussian_symbol);
        assert!(v.sup_distance(&want).unwrap() < 1e-8);
        assert!(v.tail_bound() < 1e-10 * v.peak());
        assert!((trace_cont(&v).unwrap() - 1.0).norm() < 1e-12);
        assert_eq!(stft(&gauss(), &gauss(), PhasePoint::ORIGIN).unwrap(), inner_l2(&gauss(), &gauss()).unwrap());
    }

    #[test]
    fn stft_grid_refinement() {
        let z = PhasePoint::new(0.3, -0.7);
        let coarse = stft(&herm(1), &herm(0), z).unwrap();
        let g2 = make_grid(16.0, 2048).unwrap();
        let a = realize_window(&Window::hermite(1), &g2).unwrap();
        let b = realize_window(&Window::hermite(0), &g2).unwrap();
        let fine = stft(&a, &b, z).unwrap();
        assert!((coarse - fine).norm() < 1e-8);
    }

    #[test]
    fn stft_star_swaps_roles() {
        let sg = default_symbol_grid();
        let a = stft_symbol(&herm(1), &herm(2), &sg, &sg).unwrap();
        let b = stft_symbol(&herm(2), &herm(1), &sg, &sg).unwrap();
        assert!(twisted_involution_cont(&a).sup_distance(&b).unwrap() < 1e-8);
    }

    #[test]
    fn moyal_identity_on_catalog() {
        assert!(moyal_identity_residual(&gauss(), &gauss(), &gauss(), &gauss()).unwrap() < 1e-6);
        assert!(moyal_identity_residual(&herm(1), &herm(2), &herm(1), &herm(2)).unwrap() < 1e-6);
        assert!(moyal_identity_residual(&herm(1), &herm(2), &herm(3), &herm(0)).unwrap() < 1e-6);
    }

    #[test]
    fn gaussian_symbol_is_a_projection() {
        let sg = default_symbol_grid();
        let v = stft_symbol(&gauss(), &gauss(), &sg, &sg).unwrap();
        let vv = twisted_convolve_cont(&v, &v).unwrap();
        assert!(vv.sup_distance(&v).unwrap() < 1e-5);
        assert!(twisted_involution_cont(&v).sup_distance(&v).unwrap() < 1e-8);
    }

    #[test]
    fn matrix_coefficient_products() {
        let sg = default_symbol_grid();
        let (x1, e1, x2, e2) = (herm(0), herm(1), herm(2), herm(1));
        let a = stft_symbol(&x2, &e2, &sg, &sg).unwrap();
        let b = stft_symbol(&x1, &e1, &sg, &sg).unwrap();
        let lhs = twisted_convolve_cont(&a, &b).unwrap();
        let rhs = stft_symbol(&x2, &e1, &sg, &sg).unwrap().scale(inner_l2(&x1, &e2).unwrap());
        assert!(lhs.sup_distance(&rhs).unwrap() < 1e-5);
    }

    #[test]
    fn reconstruction() {
        let r = reconstruct(&gauss(), &gauss(), &gauss()).unwrap();
        assert!(relative_l2_error(&r, &gauss()).unwrap() < 1e-4);
        let r = reconstruct(&herm(2), &gauss(), &gauss()).unwrap();
        assert!(relative_l2_error(&r, &herm(2)).unwrap() < 1e-4);
        assert!(matches!(reconstruct(&gauss(), &herm(0), &herm(1)), Err(Error::DegeneratePair { .. })));
    }

    #[test]
    fn trace_of_zero() {
        let sg = default_symbol_grid();
        assert_eq!(trace_cont(&Symbol2D::zeros(sg, sg)).unwrap(), C64::new(0.0, 0.0));
    }
}
