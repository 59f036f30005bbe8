use ipm_core::spectral::{self, Axis, Grid, RealField, SpectralField};
use proptest::prelude::*;

fn grid() -> Grid {
    Grid::new(16, 32, 3.0).unwrap()
}

fn field() -> impl Strategy<Value = RealField> {
    let g = grid();
    prop::collection::vec(-1.0f64..1.0, g.len()).prop_map(move |v| RealField::new(g, v).unwrap())
}

fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

proptest! {
    #[test]
    fn parseval(f in field()) {
        let c = spectral::forward(&f);
        prop_assert!((c.l2_norm() - f.l2_norm()).abs() <= 1e-12 * f.l2_norm().max(1.0));
    }

    #[test]
    fn round_trip(f in field()) {
        let back = spectral::inverse(&spectral::forward(&f));
        let err = f.values().iter().zip(back.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!(err < 1e-13);
    }

    #[test]
    fn velocity_is_divergence_free(f in field()) {
        let (u1, u2) = spectral::velocity(&spectral::forward(&f));
        let div = spectral::d1(&u1).add(&spectral::d2(&u2)).unwrap();
        prop_assert!(div.l2_norm() < 1e-12);
    }

    #[test]
    fn stream_function_has_no_horizontal_mean(f in field()) {
        let psi = spectral::stream_function(&spectral::forward(&f));
        let g = grid();
        for j in 0..g.n2() {
            prop_assert_eq!(psi.mode(0, g.mode_m(j)).norm(), 0.0);
        }
    }

    #[test]
    fn fractional_derivatives_compose(f in field(), a in 0.0f64..2.0, b in 0.0f64..2.0) {
        let c = spectral::forward(&f);
        for axis in [Axis::Horizontal, Axis::Vertical] {
            let lhs = spectral::frac_deriv(&spectral::frac_deriv(&c, axis, a).unwrap(), axis, b).unwrap();
            let rhs = spectral::frac_deriv(&c, axis, a + b).unwrap();
            prop_assert!(max_diff(&lhs, &rhs) <= 1e-10 * rhs.l2_norm().max(1.0));
        }
    }

    #[test]
    fn fractional_derivative_commutes_with_velocity(f in field(), s in 0.0f64..2.0) {
        let c = spectral::forward(&f);
        let (u1, u2) = spectral::velocity(&spectral::frac_deriv(&c, Axis::Both, s).unwrap());
        let v1 = spectral::frac_deriv(&spectral::velocity(&c).0, Axis::Both, s).unwrap();
        let v2 = spectral::frac_deriv(&spectral::velocity(&c).1, Axis::Both, s).unwrap();
        prop_assert!(max_diff(&u1, &v1) < 1e-11);
        prop_assert!(max_diff(&u2, &v2) < 1e-11);
    }

    #[test]
    fn dealias_is_idempotent(f in field()) {
        let once = spectral::dealias(&spectral::forward(&f));
        prop_assert_eq!(max_diff(&once, &spectral::dealias(&once)), 0.0);
    }

    #[test]
    fn sobolev_norm_is_monotone_in_k(f in field(), k in 0.0f64..3.0) {
        let c = spectral::forward(&f);
        // every retained nonzero mode has |n| ≥ 1 or |ξ| ≥ π/L ≈ 1.05
        let lo = spectral::sobolev_norm(&c, k).unwrap();
        let hi = spectral::sobolev_norm(&c, k + 0.5).unwrap();
        prop_assert!(hi >= lo * (1.0 - 1e-12) || c.mode(0, 0).norm() > 0.0);
    }
}

#[test]
fn zero_order_norm_convention() {
    let g = grid();
    let c = spectral::forward(&RealField::from_fn(g, |x1, x2| x1.cos() + (x2 * 2.0).sin()));
    let h0 = spectral::sobolev_norm(&c, 0.0).unwrap();
    assert!((h0 - 2f64.sqrt() * c.l2_norm()).abs() < 1e-12);
    let both = spectral::frac_deriv(&c, Axis::Both, 0.0).unwrap();
    assert!(max_diff(&both, &c.scale(2.0)) < 1e-14);
}
