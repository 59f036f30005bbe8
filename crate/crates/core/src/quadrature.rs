//! Adaptive Gauss–Kronrod (7/15) quadrature on finite and half-infinite intervals.

#[derive(Debug, thiserror::Error)]
pub enum QuadratureError {
    #[error("quadrature did not converge: error estimate {estimate:e} vs tolerance {tolerance:e} after {intervals} intervals")]
    NotConverged {
        estimate: f64,
        tolerance: f64,
        intervals: usize,
    },
    #[error("non-finite integrand value")]
    NonFinite,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]` to relative tolerance `rel_tol`, bisecting the
/// interval with the largest error estimate first.
pub fn integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<Estimate, QuadratureError> {
    integrate_pieces(&f, &[a, b], rel_tol)
}

/// Integrates over consecutive pieces `[b0, b1], [b1, b2], …`, refining adaptively.
pub fn integrate_pieces(
    f: &impl Fn(f64) -> f64,
    breaks: &[f64],
    rel_tol: f64,
) -> Result<Estimate, QuadratureError> {
    let mut intervals: Vec<(f64, f64, f64, f64)> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (v, e) = gk15(f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let value: f64 = intervals.iter().map(|iv| iv.2).sum();
        let error: f64 = intervals.iter().map(|iv| iv.3).sum();
        if !value.is_finite() || !error.is_finite() {
            return Err(QuadratureError::NonFinite);
        }
        let tolerance = rel_tol * value.abs();
        if error <= tolerance || error < f64::MIN_POSITIVE {
            return Ok(Estimate { value, error });
        }
        if intervals.len() >= MAX_INTERVALS {
            return Err(QuadratureError::NotConverged {
                estimate: error,
                tolerance,
                intervals: intervals.len(),
            });
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("at least one interval");
        let (a, b, _, _) = intervals.swap_remove(worst);
        let m = 0.5 * (a + b);
        let (v1, e1) = gk15(f, a, m);
        let (v2, e2) = gk15(f, m, b);
        intervals.push((a, m, v1, e1));
        intervals.push((m, b, v2, e2));
    }
}

/// Integrates `f` over `[a, ∞)` through `x = a + u/(1 − u)`.
///
/// `f` must decay faster than `x^{-2}`.
pub fn integrate_to_infinity(
    f: impl Fn(f64) -> f64,
    a: f64,
    rel_tol: f64,
) -> Result<Estimate, QuadratureError> {
    let g = |u: f64| {
        let v = 1.0 - u;
        f(a + u / v) / (v * v)
    };
    integrate_pieces(&g, &[0.0, 0.5, 1.0], rel_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, 1e-14).unwrap();
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn peaked_integrand_refines() {
        let r = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((r.value - exact).abs() / exact < 1e-11);
    }

    #[test]
    fn power_tail() {
        // ∫_1^∞ x^{-7} dx = 1/6
        let r = integrate_to_infinity(|x| x.powf(-7.0), 1.0, 1e-13).unwrap();
        assert!((r.value - 1.0 / 6.0).abs() < 1e-13);
    }

    #[test]
    fn gaussian_tail() {
        let r = integrate_to_infinity(|x| (-x * x).exp(), 0.0, 1e-13).unwrap();
        assert!((r.value - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }
}
