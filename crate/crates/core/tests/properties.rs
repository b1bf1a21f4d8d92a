use nalgebra::DMatrix;
use nc_soliton::gabor::{compression_bounds, spectral_bounds, symbol_matrix, rational_approximation};
use nc_soliton::lattice::{
    lattice_derivation, lattice_involution, lattice_multiply, lattice_trace, lattice_trace_product, LatticeElement, Side,
};
use nc_soliton::moyal::Axis;
use nc_soliton::{herm_inv_sqrt, Window, C64};
use proptest::prelude::*;

fn side() -> impl Strategy<Value = Side> {
    prop_oneof![Just(Side::Left), Just(Side::Right)]
}

fn theta() -> impl Strategy<Value = f64> {
    0.05f64..0.95
}

/// Coefficients on `|k|, |l| <= 1`, padded to radius 3 so triple products are not truncated.
fn element(theta: f64, side: Side) -> impl Strategy<Value = LatticeElement> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 9).prop_map(move |c| {
        LatticeElement::from_fn(theta, side, 1, 1, |k, l| {
            let (re, im) = c[((k + 1) * 3 + l + 1) as usize];
            C64::new(re, im)
        })
        .resized(3, 3)
    })
}

fn triple() -> impl Strategy<Value = (LatticeElement, LatticeElement, LatticeElement)> {
    (theta(), side()).prop_flat_map(|(t, s)| (element(t, s), element(t, s), element(t, s)))
}

fn close(a: &LatticeElement, b: &LatticeElement, tol: f64) -> bool {
    a.sup_distance(b).unwrap() <= tol * (1.0 + a.max_abs().max(b.max_abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lattice_product_is_associative((a, b, c) in triple()) {
        let left = lattice_multiply(&lattice_multiply(&a, &b).unwrap(), &c).unwrap();
        let right = lattice_multiply(&a, &lattice_multiply(&b, &c).unwrap()).unwrap();
        prop_assert!(close(&left, &right, 1e-12));
    }

    #[test]
    fn involution_reverses_products((a, b, _) in triple()) {
        let lhs = lattice_involution(&lattice_multiply(&a, &b).unwrap());
        let rhs = lattice_multiply(&lattice_involution(&b), &lattice_involution(&a)).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-12));
        prop_assert!(close(&lattice_involution(&lattice_involution(&a)), &a, 1e-14));
    }

    #[test]
    fn derivations_obey_leibniz((a, b, _) in triple()) {
        for axis in [Axis::First, Axis::Second] {
            let lhs = lattice_derivation(axis, &lattice_multiply(&a, &b).unwrap());
            let rhs = lattice_multiply(&lattice_derivation(axis, &a), &b)
                .unwrap()
                .add(&lattice_multiply(&a, &lattice_derivation(axis, &b)).unwrap())
                .unwrap();
            prop_assert!(close(&lhs, &rhs, 1e-11));
        }
    }

    #[test]
    fn trace_is_tracial((a, b, _) in triple()) {
        let ab = lattice_trace_product(&a, &b).unwrap();
        let ba = lattice_trace_product(&b, &a).unwrap();
        prop_assert!((ab - ba).norm() < 1e-12);
        prop_assert!((ab - lattice_trace(&lattice_multiply(&a, &b).unwrap())).norm() < 1e-12);
        for axis in [Axis::First, Axis::Second] {
            prop_assert!(lattice_trace(&lattice_derivation(axis, &a)).norm() == 0.0);
        }
    }

    #[test]
    fn positive_elements_have_nonnegative_spectrum((a, _, _) in triple()) {
        // a* a is positive; its symbol or compression spectrum must be too.
        let p = lattice_multiply(&lattice_involution(&a), &a).unwrap();
        let (lo, hi, _) = spectral_bounds(&p, 4);
        let scale = p.max_abs().max(1.0);
        prop_assert!(lo >= -1e-10 * scale && lo <= hi);
        let (clo, chi) = compression_bounds(&p, 4);
        prop_assert!(clo >= -1e-10 * scale && clo <= chi);
    }

    #[test]
    fn symbol_matrices_are_representations(num in 1i64..12, den in 1i64..12, x in 0.0f64..1.0, y in 0.0f64..1.0, seed in 0u64..1000) {
        let theta = num as f64 / (num + den) as f64;
        let side = if seed % 2 == 0 { Side::Left } else { Side::Right };
        let rate = if side == Side::Left { -theta } else { 1.0 / theta };
        let (p, n) = rational_approximation(rate, 48).unwrap();
        let mut s = seed;
        let mut next = move || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5 };
        let a = LatticeElement::from_fn(theta, side, 1, 1, |_, _| C64::new(next(), next())).resized(2, 2);
        let b = LatticeElement::from_fn(theta, side, 1, 1, |_, _| C64::new(next(), next())).resized(2, 2);
        let ab = lattice_multiply(&a, &b).unwrap();
        let lhs = symbol_matrix(&ab, p, n, x, y);
        let rhs = symbol_matrix(&a, p, n, x, y) * symbol_matrix(&b, p, n, x, y);
        prop_assert!((lhs - rhs).iter().all(|v| v.norm() < 1e-12));
        let star = symbol_matrix(&lattice_involution(&a), p, n, x, y);
        prop_assert!((star - symbol_matrix(&a, p, n, x, y).adjoint()).iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn inverse_square_root_whitens(entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 36), shift in 0.1f64..2.0) {
        let g = DMatrix::from_fn(6, 6, |r, c| C64::new(entries[r * 6 + c].0, entries[r * 6 + c].1));
        let m = &g * g.adjoint() + DMatrix::<C64>::identity(6, 6) * C64::new(shift, 0.0);
        let z = herm_inv_sqrt(&m, None).unwrap();
        let whitened = &z * &m * &z;
        let err = (whitened - DMatrix::<C64>::identity(6, 6)).iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-10, "{}", err);
        prop_assert!((&z - z.adjoint()).iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn window_specs_round_trip(w in window()) {
        let text = w.to_string();
        let back: Window = text.parse().unwrap();
        prop_assert_eq!(back, w);
    }
}

fn window() -> impl Strategy<Value = Window> {
    prop_oneof![
        Just(Window::gaussian()),
        (-1e3f64..1e3, -1e3f64..1e3).prop_map(|(re, im)| Window::gaussian_with(C64::new(re, im), 1.0)),
        (0usize..64).prop_map(Window::hermite),
        (1e-4f64..1.0, prop::collection::vec(prop_oneof![-5.0f64..-1e-3, 1e-3f64..5.0], 1..5))
            .prop_map(|(d, ds)| Window::totally_positive(d, ds)),
    ]
}

#[test]
fn malformed_window_specs_are_rejected() {
    for bad in ["", "gauss", "hermite", "hermite:-1", "hermite:x", "gaussian:1,2,3", "tp:0:1", "tp:0.1:", "tp:0.1:0", "tp:-1:1"] {
        assert!(bad.parse::<Window>().is_err(), "{bad}");
    }
}
