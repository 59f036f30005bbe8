//! Fourier multipliers: fractional derivatives, Sobolev norms and the Darcy inversion.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{inverse, SpectralError, SpectralField};

/// Direction of a fractional derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Horizontal,
    Vertical,
    Both,
}

fn check_exponent(name: &'static str, value: f64) -> Result<(), SpectralError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(SpectralError::NegativeExponent { name, value })
    }
}

/// `|D1|^s`, `|D2|^s` or `|D1|^s + |D2|^s` as a multiplier; `0^0 = 1`.
pub fn frac_deriv(f: &SpectralField, axis: Axis, s: f64) -> Result<SpectralField, SpectralError> {
    check_exponent("s", s)?;
    Ok(f.map_modes(|n, xi| {
        let a = (n.abs() as f64).powf(s);
        let b = xi.abs().powf(s);
        match axis {
            Axis::Horizontal => a,
            Axis::Vertical => b,
            Axis::Both => a + b,
        }
    }))
}

/// Weight of the homogeneous `Ḣ^k` seminorm.
///
/// At `k = 0` the homogeneous part is taken to be the `L²` norm, so that
/// `‖f‖_{H⁰} = √2 ‖f‖_{L²}`.
fn homogeneous_weight(n: i64, xi: f64, k: f64) -> f64 {
    if k == 0.0 {
        1.0
    } else {
        (n.abs() as f64).powf(2.0 * k) + xi.abs().powf(2.0 * k)
    }
}

/// `‖f‖²_{Ḣ^k} = Σ (|n|^{2k} + |ξ|^{2k}) |f̂|²`.
pub fn homogeneous_sq(f: &SpectralField, k: f64) -> Result<f64, SpectralError> {
    check_exponent("k", k)?;
    Ok(f.weighted_energy(|n, xi| homogeneous_weight(n, xi, k)))
}

/// `‖f‖_{H^k} = (‖f‖²_{L²} + ‖f‖²_{Ḣ^k})^{1/2}`, an exact discrete sum.
pub fn sobolev_norm(f: &SpectralField, k: f64) -> Result<f64, SpectralError> {
    check_exponent("k", k)?;
    Ok(
        f.weighted_energy(|n, xi| 1.0 + homogeneous_weight(n, xi, k))
            .sqrt(),
    )
}

/// `‖ |D1|^{s1} f ‖_{Ḣ^{s2}}` with the literal weight `|n|^{2s1} (|n|^{2s2} + |ξ|^{2s2})`.
pub fn aniso_seminorm(f: &SpectralField, s1: f64, s2: f64) -> Result<f64, SpectralError> {
    check_exponent("s1", s1)?;
    check_exponent("s2", s2)?;
    Ok(f.weighted_energy(|n, xi| {
        let an = n.abs() as f64;
        an.powf(2.0 * s1) * (an.powf(2.0 * s2) + xi.abs().powf(2.0 * s2))
    })
    .sqrt())
}

fn zero_nyquist(f: &mut SpectralField) {
    let g = *f.grid();
    let coeffs = f.coeffs_mut();
    for j in 0..g.n2() {
        for i in 0..g.n1() {
            if g.is_nyquist_n(i) || g.is_nyquist_m(j) {
                coeffs[g.index(i, j)] = Complex64::default();
            }
        }
    }
}

/// Spectral `∂1`, with the Nyquist modes removed.
pub fn d1(f: &SpectralField) -> SpectralField {
    let mut out = f.map_modes_complex(|n, _| Complex64::new(0.0, n as f64));
    zero_nyquist(&mut out);
    out
}

/// Spectral `∂2`, with the Nyquist modes removed.
pub fn d2(f: &SpectralField) -> SpectralField {
    let mut out = f.map_modes_complex(|_, xi| Complex64::new(0.0, xi));
    zero_nyquist(&mut out);
    out
}

/// Stream function solving `−ΔΨ = ∂1θ`; every `n = 0` mode is zero.
pub fn stream_function(theta: &SpectralField) -> SpectralField {
    let mut out = theta.map_modes_complex(|n, xi| {
        if n == 0 {
            Complex64::default()
        } else {
            let nf = n as f64;
            Complex64::new(0.0, nf / (nf * nf + xi * xi))
        }
    });
    zero_nyquist(&mut out);
    out
}

/// Darcy velocity `u = ∇⊥Ψ = (−∂2Ψ, ∂1Ψ)`.
pub fn velocity(theta: &SpectralField) -> (SpectralField, SpectralField) {
    let psi = stream_function(theta);
    let u1 = psi.map_modes_complex(|_, xi| Complex64::new(0.0, -xi));
    let u2 = psi.map_modes_complex(|n, _| Complex64::new(0.0, n as f64));
    (u1, u2)
}

/// Vertical velocity alone, `û2 = −n² θ̂ / (n² + ξ²)`.
pub fn vertical_velocity(theta: &SpectralField) -> SpectralField {
    velocity(theta).1
}

/// Whether mode `(n, m)` survives the 2/3 rule.
#[inline]
pub fn retained(n: i64, m: i64, n1: usize, n2: usize) -> bool {
    3 * n.unsigned_abs() as usize <= n1 && 3 * m.unsigned_abs() as usize <= n2
}

/// 2/3-rule truncation: zero `|n| > n1/3` or `|m| > n2/3`.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    dealias_in_place(&mut out);
    out
}

pub fn dealias_in_place(f: &mut SpectralField) {
    let g = *f.grid();
    let coeffs = f.coeffs_mut();
    for j in 0..g.n2() {
        let m = g.mode_m(j);
        for i in 0..g.n1() {
            if !retained(g.wavenumber_n(i), m, g.n1(), g.n2()) {
                coeffs[g.index(i, j)] = Complex64::default();
            }
        }
    }
}

/// `max |∇f|` over the collocation points.
pub fn grad_linf(f: &SpectralField) -> f64 {
    let gx = inverse(&d1(f));
    let gy = inverse(&d2(f));
    gx.values()
        .iter()
        .zip(gy.values())
        .fold(0.0_f64, |m, (a, b)| m.max(a.hypot(*b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{forward, Grid, RealField};
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(32, 64, 4.0 * PI).unwrap()
    }

    fn close(a: &SpectralField, b: &SpectralField, tol: f64) -> bool {
        a.sub(b).unwrap().l2_norm() <= tol * b.l2_norm().max(1e-300)
    }

    #[test]
    fn zero_exponent_is_identity_per_axis() {
        let g = grid();
        let f = forward(&RealField::from_fn(g, |x1, x2| x1.sin() * (-x2 * x2).exp()));
        for axis in [Axis::Horizontal, Axis::Vertical] {
            assert_eq!(frac_deriv(&f, axis, 0.0).unwrap(), f);
        }
    }

    #[test]
    fn horizontal_fractional_derivative_of_single_mode() {
        let g = grid();
        let f = forward(&RealField::from_fn(g, |x1, _| (2.0 * x1).sin()));
        let expected = forward(&RealField::from_fn(g, |x1, _| {
            2f64.powf(1.5) * (2.0 * x1).sin()
        }));
        assert!(close(
            &frac_deriv(&f, Axis::Horizontal, 1.5).unwrap(),
            &expected,
            1e-12
        ));
    }

    #[test]
    fn both_axes_add_multipliers() {
        let g = grid();
        let xi1 = g.dxi();
        let s = 0.7;
        let f = forward(&RealField::from_fn(g, |x1, x2| x1.sin() * (xi1 * x2).sin()));
        let expected = f.scale(1.0 + xi1.powf(s));
        assert!(close(
            &frac_deriv(&f, Axis::Both, s).unwrap(),
            &expected,
            1e-12
        ));
    }

    #[test]
    fn mean_mode_is_annihilated_for_positive_order() {
        let g = grid();
        let f = forward(&RealField::from_fn(g, |_, _| 3.0));
        assert!(frac_deriv(&f, Axis::Both, 0.5).unwrap().l2_norm() < 1e-12);
    }

    #[test]
    fn negative_exponents_are_errors() {
        let f = SpectralField::zeros(grid());
        assert!(frac_deriv(&f, Axis::Both, -1.0).is_err());
        assert!(sobolev_norm(&f, -0.5).is_err());
        assert!(aniso_seminorm(&f, 1.0, -1.0).is_err());
    }

    #[test]
    fn sobolev_norm_conventions() {
        let g = grid();
        let f = forward(&RealField::from_fn(g, |x1, _| x1.sin()));
        let a = f.l2_norm().powi(2);
        assert!((a - 2.0 * PI * 4.0 * PI * 0.5 * 2.0).abs() < 1e-9);
        assert!((sobolev_norm(&f, 0.0).unwrap() - (2.0 * a).sqrt()).abs() < 1e-12);
        assert!((sobolev_norm(&f, 2.0).unwrap() - (a + a).sqrt()).abs() < 1e-12);
        assert_eq!(sobolev_norm(&SpectralField::zeros(g), 3.0).unwrap(), 0.0);
    }

    #[test]
    fn anisotropic_seminorm_examples() {
        let g = grid();
        let f = forward(&RealField::from_fn(g, |x1, x2| x1.sin() + (-x2 * x2).exp()));
        let s = forward(&RealField::from_fn(g, |x1, _| x1.sin()));
        assert!((aniso_seminorm(&f, 0.0, 0.0).unwrap() - 2f64.sqrt() * f.l2_norm()).abs() < 1e-10);
        assert!((aniso_seminorm(&s, 1.0, 0.0).unwrap() - 2f64.sqrt() * s.l2_norm()).abs() < 1e-10);
        let mean_only = forward(&RealField::from_fn(g, |_, x2| (-x2 * x2).exp()));
        assert!(aniso_seminorm(&mean_only, 0.5, 1.0).unwrap() < 1e-12);
    }

    #[test]
    fn stream_function_single_modes() {
        let g = grid();
        let xi1 = g.dxi();
        let theta = forward(&RealField::from_fn(g, |x1, _| x1.sin()));
        let psi = forward(&RealField::from_fn(g, |x1, _| x1.cos()));
        assert!(close(&stream_function(&theta), &psi, 1e-12));

        let theta = forward(&RealField::from_fn(g, |x1, x2| x1.sin() * (xi1 * x2).cos()));
        let psi = forward(&RealField::from_fn(g, |x1, x2| {
            x1.cos() * (xi1 * x2).cos() / (1.0 + xi1 * xi1)
        }));
        assert!(close(&stream_function(&theta), &psi, 1e-12));

        let layered = forward(&RealField::from_fn(g, |_, x2| (xi1 * x2).sin()));
        assert_eq!(stream_function(&layered).l2_norm(), 0.0);
    }

    #[test]
    fn velocity_single_modes() {
        let g = grid();
        let xi1 = g.dxi();
        let theta = forward(&RealField::from_fn(g, |x1, _| x1.sin()));
        let (u1, u2) = velocity(&theta);
        assert!(u1.l2_norm() < 1e-12);
        assert!(close(&u2, &theta.scale(-1.0), 1e-12));

        let theta = forward(&RealField::from_fn(g, |x1, x2| x1.sin() * (xi1 * x2).cos()));
        let u2 = vertical_velocity(&theta);
        assert!(close(&u2, &theta.scale(-1.0 / (1.0 + xi1 * xi1)), 1e-12));

        let (u1, u2) = velocity(&SpectralField::zeros(g));
        assert_eq!(u1.l2_norm() + u2.l2_norm(), 0.0);
    }

    #[test]
    fn dealias_removes_top_third() {
        let g = grid();
        let mut f = SpectralField::zeros(g);
        f.set_real_mode(15, 0, Complex64::new(1.0, 0.0));
        assert_eq!(dealias(&f).l2_norm(), 0.0);
        let mut kept = SpectralField::zeros(g);
        kept.set_real_mode(10, 21, Complex64::new(0.3, 0.2));
        assert_eq!(dealias(&kept), kept);
    }

    #[test]
    fn grad_linf_examples() {
        let g = grid();
        assert_eq!(grad_linf(&SpectralField::zeros(g)), 0.0);
        let f = forward(&RealField::from_fn(g, |x1, _| x1.sin()));
        assert!((grad_linf(&f) - 1.0).abs() < 1e-10);

        let xi1 = g.dxi();
        let f = forward(&RealField::from_fn(g, |x1, x2| x1.sin() + (xi1 * x2).sin()));
        let mut oracle: f64 = 0.0;
        for j in 0..g.n2() {
            for i in 0..g.n1() {
                let (a, b) = (g.x1(i).cos(), xi1 * (xi1 * g.x2(j)).cos());
                oracle = oracle.max((a * a + b * b).sqrt());
            }
        }
        assert!((grad_linf(&f) - oracle).abs() < 1e-10);
    }
}
