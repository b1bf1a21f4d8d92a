//! Named end-to-end verification checks.
//!
//! Each check reduces one identity to a scalar residual and compares it with
//! a default tolerance that callers may override. Random data comes from a
//! seeded ChaCha stream, so repeated runs agree bit for bit.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gabor::{canonical_tight_window, wexler_raz_residual};
use crate::lattice::{herm_left, lattice_multiply, module_act_left, module_act_right, LatticeElement, Side, TorusContext};
use crate::moyal::{build_moyal_projection_from_window, default_signal_grid, moyal_curvature_error};
use crate::numerics::{relative_l2_error, Grid1D, GridFunction, C64};
use crate::soliton::{torus_curvature_error, torus_window};
use crate::tf::{apply_symbol, default_symbol_grid, moyal_identity_residual, stft_symbol, twisted_convolve_cont, Symbol2D};
use crate::window::{realize_window, Window};

const SEED: u64 = 0x5eed;

/// A named residual check with its default tolerance.
#[derive(Clone, Copy)]
pub struct Check {
    pub name: &'static str,
    pub description: &'static str,
    pub tolerance: f64,
    run: fn() -> Result<f64>,
}

impl Check {
    pub fn run(&self, tolerance: Option<f64>) -> CheckOutcome {
        let tolerance = tolerance.unwrap_or(self.tolerance);
        match (self.run)() {
            Ok(value) => CheckOutcome { name: self.name.into(), value: Some(value), tolerance, passed: value <= tolerance, error: None },
            Err(e) => CheckOutcome { name: self.name.into(), value: None, tolerance, passed: false, error: Some(e.to_string()) },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub value: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    pub error: Option<String>,
}

/// Every check, in execution order.
pub fn catalog() -> Vec<Check> {
    vec![
        Check {
            name: "stft-closed-form",
            description: "Gaussian matrix coefficient against its closed form on a 64x64 grid",
            tolerance: 1e-8,
            run: stft_closed_form,
        },
        Check {
            name: "moyal-identity",
            description: "orthogonality relations on 20 random catalog mixtures",
            tolerance: 1e-6,
            run: moyal_identity,
        },
        Check {
            name: "twisted-convolution",
            description: "continuous twisted convolution against operator composition",
            tolerance: 1e-5,
            run: twisted_convolution,
        },
        Check {
            name: "lattice-left-product",
            description: "left lattice product against composition of time-frequency shifts",
            tolerance: 1e-5,
            run: || lattice_product(Side::Left),
        },
        Check {
            name: "lattice-right-product",
            description: "right lattice product against composition of right actions",
            tolerance: 1e-5,
            run: || lattice_product(Side::Right),
        },
        Check {
            name: "moyal-projection",
            description: "idempotency of the Gaussian rank-one symbol",
            tolerance: 1e-5,
            run: moyal_projection,
        },
        Check {
            name: "moyal-curvature",
            description: "relative error of [D1, D2] = -2 pi i on catalog windows",
            tolerance: 1e-8,
            run: moyal_curvature,
        },
        Check {
            name: "torus-curvature",
            description: "relative error of [D1, D2] = -2 pi i / theta on catalog windows",
            tolerance: 1e-8,
            run: torus_curvature,
        },
        Check {
            name: "wexler-raz",
            description: "biorthogonality of the tight Gaussian window at theta = 1/2",
            tolerance: 1e-4,
            run: wexler_raz,
        },
        Check {
            name: "frame-expansion",
            description: "reconstruction of Hermite(2) through the tight Gaussian window at theta = 1/2",
            tolerance: 1e-4,
            run: frame_expansion,
        },
    ]
}

pub fn check_names() -> Vec<&'static str> {
    catalog().iter().map(|c| c.name).collect()
}

/// Runs the checks named in `only` (all when `None`), in catalog order.
pub fn run_checks(only: Option<&[String]>, tolerance: Option<f64>) -> Result<Vec<CheckOutcome>> {
    let all = catalog();
    if let Some(names) = only {
        if let Some(bad) = names.iter().find(|n| !all.iter().any(|c| c.name == n.as_str())) {
            return Err(Error::Domain(format!("unknown check `{bad}` (known: {})", check_names().join(", "))));
        }
    }
    Ok(all
        .iter()
        .filter(|c| only.is_none_or(|names| names.iter().any(|n| n == c.name)))
        .map(|c| {
            let out = c.run(tolerance);
            log::debug!("check {}: {:?}", c.name, out.value);
            out
        })
        .collect())
}

/// Catalog windows with unit norm: Gaussians, generalized Gaussians, Hermite
/// functions and a totally positive window.
pub fn catalog_windows() -> Vec<Window> {
    vec![
        Window::gaussian(),
        Window::gaussian_with(C64::new(2.0, 1.0), 1.0),
        Window::gaussian_with(C64::new(-1.0, 0.5), 0.8),
        Window::hermite(1),
        Window::hermite(2),
        Window::hermite(3),
        Window::totally_positive(0.01, vec![1.0, -1.0]),
    ]
}

fn random_mixture(rng: &mut ChaCha8Rng, basis: &[GridFunction]) -> Result<GridFunction> {
    let mut acc = GridFunction::zeros(*basis[0].grid());
    for b in basis {
        let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        acc = acc.add(&b.scale(c))?;
    }
    acc.normalized()
}

fn smooth_basis(g: &Grid1D) -> Result<Vec<GridFunction>> {
    [Window::gaussian(), Window::hermite(1), Window::hermite(2), Window::hermite(3), Window::gaussian_with(C64::new(1.0, -0.5), 1.2)]
        .iter()
        .map(|w| realize_window(w, g))
        .collect()
}

fn stft_closed_form() -> Result<f64> {
    let g = default_signal_grid();
    let psi = realize_window(&Window::gaussian(), &g)?;
    let sg = Grid1D::new(4.0, 64)?;
    let v = stft_symbol(&psi, &psi, &sg, &sg)?;
    let want = Symbol2D::from_fn(sg, sg, |z| C64::from_polar((-0.5 * PI * (z.x * z.x + z.omega * z.omega)).exp(), -PI * z.x * z.omega));
    v.sup_distance(&want)
}

fn moyal_identity() -> Result<f64> {
    let g = default_signal_grid();
    let basis = smooth_basis(&g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let q: Vec<GridFunction> = (0..4).map(|_| random_mixture(&mut rng, &basis)).collect::<Result<_>>()?;
        worst = worst.max(moyal_identity_residual(&q[0], &q[1], &q[2], &q[3])?);
    }
    Ok(worst)
}

fn twisted_convolution() -> Result<f64> {
    let g = default_signal_grid();
    let sg = default_symbol_grid();
    let basis = smooth_basis(&g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut worst: f64 = 0.0;
    for _ in 0..2 {
        let q: Vec<GridFunction> = (0..5).map(|_| random_mixture(&mut rng, &basis)).collect::<Result<_>>()?;
        let f = stft_symbol(&q[0], &q[1], &sg, &sg)?;
        let h = stft_symbol(&q[2], &q[3], &sg, &sg)?;
        let fh = twisted_convolve_cont(&f, &h)?;
        let lhs = apply_symbol(&fh, &q[4])?;
        let rhs = apply_symbol(&f, &apply_symbol(&h, &q[4])?)?;
        worst = worst.max(lhs.sub(&rhs)?.norm() / rhs.norm().max(1e-300));
    }
    Ok(worst)
}

fn lattice_product(side: Side) -> Result<f64> {
    let theta = 0.45;
    let g = default_signal_grid();
    let basis = smooth_basis(&g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let element = |rng: &mut ChaCha8Rng| {
        LatticeElement::from_fn(theta, side, 2, 2, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).resized(4, 4)
    };
    let (a, b) = (element(&mut rng), element(&mut rng));
    let ab = lattice_multiply(&a, &b)?;
    let mut worst: f64 = 0.0;
    for xi in &basis {
        let (lhs, rhs) = match side {
            Side::Left => (module_act_left(&ab, xi)?, module_act_left(&a, &module_act_left(&b, xi)?)?),
            Side::Right => (module_act_right(xi, &ab)?, module_act_right(&module_act_right(xi, &a)?, &b)?),
        };
        worst = worst.max(relative_l2_error(&lhs, &rhs)?);
    }
    Ok(worst)
}

fn moyal_projection() -> Result<f64> {
    let p = build_moyal_projection_from_window(&Window::gaussian(), &default_signal_grid())?;
    Ok(p.projection_residual.max(p.hermiticity_residual))
}

fn moyal_curvature() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for w in catalog_windows() {
        // The totally positive window needs a finer grid than the default.
        let g = TorusContext::for_window(0.5, &w)?.grid;
        let r = w.realize(&g)?;
        worst = worst.max(moyal_curvature_error(&r.value, &r.derivative)?);
    }
    Ok(worst)
}

fn torus_curvature() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for theta in [0.3, 0.5, 0.75] {
        for w in catalog_windows() {
            let w = torus_window(&w, theta);
            let ctx = TorusContext::for_window(theta, &w)?;
            let r = w.realize(&ctx.grid)?;
            worst = worst.max(torus_curvature_error(&r.value, &r.derivative, &ctx)?);
        }
    }
    Ok(worst)
}

fn tight_gaussian_half() -> Result<(TorusContext, GridFunction)> {
    let w = torus_window(&Window::gaussian(), 0.5);
    let ctx = TorusContext::for_window(0.5, &w)?;
    let eta = realize_window(&w, &ctx.grid)?;
    let psi = canonical_tight_window(&eta, &ctx)?;
    Ok((ctx, psi))
}

fn wexler_raz() -> Result<f64> {
    let (ctx, psi) = tight_gaussian_half()?;
    wexler_raz_residual(&psi, &ctx)
}

fn frame_expansion() -> Result<f64> {
    let (ctx, psi) = tight_gaussian_half()?;
    let xi = realize_window(&Window::hermite(2), &ctx.grid)?;
    let rec = module_act_left(&herm_left(&xi, &psi, &ctx)?, &psi)?;
    relative_l2_error(&rec, &xi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        let mut names = check_names();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), catalog().len());
    }

    #[test]
    fn filtering_and_overrides() {
        let only = vec!["moyal-curvature".to_string(), "stft-closed-form".to_string()];
        let out = run_checks(Some(&only), None).unwrap();
        // Catalog order, not request order.
        assert_eq!(out.iter().map(|o| o.name.as_str()).collect::<Vec<_>>(), ["stft-closed-form", "moyal-curvature"]);
        assert!(out.iter().all(|o| o.passed), "{out:?}");
        let strict = run_checks(Some(&only), Some(1e-18)).unwrap();
        assert!(strict.iter().all(|o| !o.passed && o.tolerance == 1e-18));
        assert!(run_checks(Some(&["nope".to_string()]), None).is_err());
    }

    #[test]
    fn default_run_passes() {
        let out = run_checks(None, None).unwrap();
        for o in &out {
            assert!(o.passed, "{o:?}");
        }
    }
}
