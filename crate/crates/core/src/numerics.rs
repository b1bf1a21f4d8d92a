//! Grids, quadrature, Fourier resampling and Hermitian matrix functions.

use std::cell::RefCell;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = num_complex::Complex64;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Fraction of grid points (split evenly between both ends) used for tail bounds.
pub const TAIL_FRACTION: f64 = 0.05;

/// Uniform grid `t_j = -T + j h` with `h = 2T / (N - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    half_width: f64,
    num_points: usize,
}

/// Signal grid constructor: `T > 0`, `N >= 16`, `N` even.
pub fn make_grid(half_width: f64, num_points: usize) -> Result<Grid1D> {
    Grid1D::new(half_width, num_points)
}

impl Grid1D {
    pub fn new(half_width: f64, num_points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Domain(format!("grid half-width must be positive, got {half_width}")));
        }
        if num_points < 16 || num_points % 2 != 0 {
            return Err(Error::Domain(format!(
                "grid needs an even number of points >= 16, got {num_points}"
            )));
        }
        Ok(Self { half_width, num_points })
    }

    /// Grid with an odd number of points, so that the origin is a node.
    /// Used for phase-space (symbol) axes.
    pub fn symmetric(half_width: f64, num_points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Domain(format!("grid half-width must be positive, got {half_width}")));
        }
        if num_points < 3 || num_points % 2 == 0 {
            return Err(Error::Domain(format!(
                "symmetric grid needs an odd number of points >= 3, got {num_points}"
            )));
        }
        Ok(Self { half_width, num_points })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / (self.num_points - 1) as f64
    }

    /// `t_j`, computed so that `t_{N-1-j} = -t_j` holds exactly.
    pub fn point(&self, j: usize) -> f64 {
        let n1 = (self.num_points - 1) as f64;
        self.half_width * ((2 * j) as f64 - n1) / n1
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.num_points).map(|j| self.point(j)).collect()
    }

    /// Index of the node at `t = 0`, if there is one.
    pub fn origin_index(&self) -> Option<usize> {
        (self.num_points % 2 == 1).then_some(self.num_points / 2)
    }

    /// Trapezoidal weights.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.step();
        let mut w = vec![h; self.num_points];
        w[0] = 0.5 * h;
        w[self.num_points - 1] = 0.5 * h;
        w
    }

    /// Index of the node nearest to `t` (clamped to the grid).
    pub fn nearest_index(&self, t: f64) -> usize {
        let j = ((t + self.half_width) / self.step()).round();
        j.clamp(0.0, (self.num_points - 1) as f64) as usize
    }

    fn same_as(&self, other: &Grid1D) -> bool {
        self.num_points == other.num_points && self.half_width == other.half_width
    }
}

pub(crate) fn ensure_same_grid(a: &Grid1D, b: &Grid1D) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Number of points in each outer band used for tail bounds.
pub(crate) fn tail_band(n: usize) -> usize {
    ((TAIL_FRACTION * n as f64) / 2.0).ceil().max(1.0) as usize
}

/// Complex samples of a function on a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid1D,
    values: Vec<C64>,
    tail_bound: f64,
}

impl GridFunction {
    pub fn new(grid: Grid1D, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.num_points() {
            return Err(Error::Domain(format!(
                "expected {} samples, got {}",
                grid.num_points(),
                values.len()
            )));
        }
        Ok(Self::from_parts(grid, values))
    }

    pub(crate) fn from_parts(grid: Grid1D, values: Vec<C64>) -> Self {
        debug_assert_eq!(values.len(), grid.num_points());
        let m = tail_band(values.len());
        let n = values.len();
        let tail_bound = values[..m]
            .iter()
            .chain(&values[n - m..])
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        Self { grid, values, tail_bound }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> C64) -> Self {
        let values = grid.points().into_iter().map(f).collect();
        Self::from_parts(grid, values)
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self::from_parts(grid, vec![C64::new(0.0, 0.0); grid.num_points()])
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    /// Largest modulus on the outer 5% of the grid.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn norm(&self) -> f64 {
        inner_l2(self, self).expect("same grid").re.max(0.0).sqrt()
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|_, v| v * c)
    }

    /// Pointwise map with access to the grid point.
    pub fn map(&self, f: impl Fn(f64, C64) -> C64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(j, &v)| f(self.grid.point(j), v))
            .collect();
        Self::from_parts(self.grid, values)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn zip(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        ensure_same_grid(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self::from_parts(self.grid, values))
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::NotNormalized { norm: 0.0 });
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    /// `t ↦ ξ(t - x)` by band-limited interpolation (zero padded, so nothing wraps).
    pub fn translate(&self, x: f64) -> Self {
        let values = translate_bandlimited(&self.values, self.grid.step(), x);
        Self::from_parts(self.grid, values)
    }

    /// Derivative computed with the Fourier multiplier `2πiν`.
    pub fn spectral_derivative(&self) -> Self {
        let values = spectral_derivative(&self.values, self.grid.step());
        Self::from_parts(self.grid, values)
    }
}

/// Trapezoidal `∫ f ḡ`.
pub fn inner_l2(f: &GridFunction, g: &GridFunction) -> Result<C64> {
    ensure_same_grid(&f.grid, &g.grid)?;
    Ok(weighted_dot(&f.grid.weights(), &f.values, &g.values))
}

pub(crate) fn weighted_dot(w: &[f64], f: &[C64], g: &[C64]) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for ((&wj, &a), &b) in w.iter().zip(f).zip(g) {
        acc += a * b.conj() * wj;
    }
    acc
}

/// Relative L² distance `‖f - g‖ / ‖g‖`.
pub fn relative_l2_error(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    let d = f.sub(g)?.norm();
    let n = g.norm();
    Ok(if n == 0.0 { d } else { d / n })
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn fft_inplace(buf: &mut [C64], inverse: bool) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        let plan = if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        };
        plan.process(buf);
    });
}

/// Signed frequency of FFT bin `m` for `n` samples spaced by `h`.
pub(crate) fn bin_frequency(m: usize, n: usize, h: f64) -> f64 {
    let m = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
    m / (n as f64 * h)
}

/// Samples of `t ↦ f(t - x)`, by Fourier interpolation on a zero-padded copy.
pub(crate) fn translate_bandlimited(values: &[C64], h: f64, x: f64) -> Vec<C64> {
    let n = values.len();
    if x == 0.0 {
        return values.to_vec();
    }
    let m = 2 * n;
    let mut buf = vec![C64::new(0.0, 0.0); m];
    buf[..n].copy_from_slice(values);
    fft_inplace(&mut buf, false);
    for (k, b) in buf.iter_mut().enumerate() {
        let factor = if 2 * k == m {
            // Split the Nyquist bin evenly between ±ν.
            C64::new((2.0 * PI * bin_frequency(k, m, h) * x).cos(), 0.0)
        } else {
            C64::from_polar(1.0, -2.0 * PI * bin_frequency(k, m, h) * x)
        };
        *b *= factor;
    }
    fft_inplace(&mut buf, true);
    let scale = 1.0 / m as f64;
    buf.truncate(n);
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

pub(crate) fn spectral_derivative(values: &[C64], h: f64) -> Vec<C64> {
    let n = values.len();
    let mut buf = values.to_vec();
    fft_inplace(&mut buf, false);
    for (k, b) in buf.iter_mut().enumerate() {
        if 2 * k == n {
            *b = C64::new(0.0, 0.0);
        } else {
            *b *= I * (2.0 * PI * bin_frequency(k, n, h));
        }
    }
    fft_inplace(&mut buf, true);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// Largest entrywise deviation from Hermitian symmetry.
pub fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigenvalues (ascending) of a Hermitian matrix, without eigenvectors.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut values: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_function(m: &DMatrix<C64>, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
    let (values, vectors) = hermitian_eigen(m);
    let n = m.nrows();
    let mut scaled = vectors.clone();
    for (c, &lam) in values.iter().enumerate() {
        let s = f(lam);
        for r in 0..n {
            scaled[(r, c)] *= s;
        }
    }
    &scaled * vectors.adjoint()
}

/// `M^{-1/2}` for a Hermitian positive definite `M`.
///
/// `floor` defaults to `1e-8` times the largest eigenvalue; an eigenvalue at or
/// below it yields [`Error::NotPositiveDefinite`].
pub fn herm_inv_sqrt(m: &DMatrix<C64>, floor: Option<f64>) -> Result<DMatrix<C64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::Domain("matrix is not square".into()));
    }
    let scale = m.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    let dev = hermitian_deviation(m);
    if dev > 1e-10 * scale {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let (values, vectors) = hermitian_eigen(&sym);
    let max = values.last().copied().unwrap_or(0.0);
    let min = values.first().copied().unwrap_or(0.0);
    let floor = floor.unwrap_or(1e-8 * max.abs());
    if min <= floor || max <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    let n = m.nrows();
    let mut scaled = vectors.clone();
    for (c, &lam) in values.iter().enumerate() {
        let s = lam.powf(-0.5);
        for r in 0..n {
            scaled[(r, c)] *= s;
        }
    }
    let r = &scaled * vectors.adjoint();
    Ok((&r + r.adjoint()) * C64::new(0.5, 0.0))
}
