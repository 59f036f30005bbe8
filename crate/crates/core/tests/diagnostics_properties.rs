use ipm_core::diagnostics::{self, Column, NormSeries};
use proptest::prelude::*;

fn dissipating_series(corrupt: Option<usize>) -> NormSeries {
    let mut s = NormSeries::new(3.0, &[Column::L2U, Column::EnergyE]);
    for i in 0..=1000 {
        let t = i as f64 * 0.01;
        let mut e = (1.0 + t).powi(-2);
        if corrupt == Some(i) {
            e *= 1.01;
        }
        let u = (2.0 * (1.0 + t).powi(-3)).sqrt();
        s.push(t, &[u, e]).unwrap();
    }
    s
}

#[test]
fn energy_balance_detects_a_corrupted_sample() {
    assert!(diagnostics::energy_balance(&dissipating_series(None)).unwrap() < 1e-3);
    assert!(diagnostics::energy_balance(&dissipating_series(Some(700))).unwrap() > 1e-3);
}

proptest! {
    #[test]
    fn exact_power_laws_are_recovered(p in -5.0f64..-0.5, c in 0.1f64..10.0) {
        let t: Vec<f64> = (0..40).map(|i| 5.0 * 1.1f64.powi(i)).collect();
        let y: Vec<f64> = t.iter().map(|t| c * t.powf(p)).collect();
        let fit = diagnostics::fit_power_law(&t, &y, (5.0, t[39]), false).unwrap();
        prop_assert!((fit.exponent - p).abs() < 1e-9);
        prop_assert!((fit.prefactor / c - 1.0).abs() < 1e-8);
    }

    #[test]
    fn time_average_of_constant(c in -10.0f64..10.0, t in 2.0f64..50.0) {
        let ts: Vec<f64> = (0..=200).map(|i| i as f64 * 0.25).collect();
        let vs = vec![c; ts.len()];
        prop_assert!((diagnostics::time_average(&ts, &vs, t).unwrap() - c).abs() < 1e-12 * c.abs().max(1.0));
    }
}
