//! Exact evolution of the linearized equation `Θ_t = U2` around `ρ_s = −x2`,
//! the decay weight `W`, and the slow-decay (sharpness) data with its 1D
//! quadrature oracle.

use std::f64::consts::E;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::profile::StratifiedProfile;
use crate::quadrature::{self, QuadratureError};
use crate::spectral::{self, Complex64, Grid, SpectralField};

#[derive(Debug, thiserror::Error)]
pub enum LinearError {
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("exact evolution needs the affine profile rho_s = -x2")]
    NonAffineProfile,
    #[error("weight W is undefined for n = 0")]
    ZeroMode,
    #[error(
        "exponents must satisfy 0 <= s1, 0 <= s2, s1 + s2 <= k (got s1 = {s1}, s2 = {s2}, k = {k})"
    )]
    BadExponents { s1: f64, s2: f64, k: f64 },
    #[error("sharpness parameters out of range: {0}")]
    BadSpec(String),
    #[error("grid too coarse in xi: dxi = {0} > 0.5")]
    CoarseGrid(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Spectral(#[from] spectral::SpectralError),
}

/// `e^{−t n²/(n²+ξ²)}`, equal to 1 on the `n = 0` slice.
pub fn multiplier(n: i64, xi: f64, t: f64) -> Result<f64, LinearError> {
    if !(t >= 0.0) {
        return Err(LinearError::NegativeTime(t));
    }
    Ok(symbol_exp(n, xi, t))
}

fn symbol_exp(n: i64, xi: f64, t: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let n2 = (n * n) as f64;
    (-t * n2 / (n2 + xi * xi)).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearState {
    pub theta: SpectralField,
    pub t: f64,
}

/// Advances `state` by `dt` with the exact Fourier multiplier.
pub fn evolve_exact(
    state: &LinearState,
    dt: f64,
    profile: &StratifiedProfile,
) -> Result<LinearState, LinearError> {
    if !profile.is_affine() {
        return Err(LinearError::NonAffineProfile);
    }
    if !(dt >= 0.0) {
        return Err(LinearError::NegativeTime(dt));
    }
    Ok(LinearState {
        theta: state.theta.map_modes(|n, xi| symbol_exp(n, xi, dt)),
        t: state.t + dt,
    })
}

/// `W(t, n, ξ) = n^{2 s1} / (n² + ξ²)^{k − s2} · e^{−2 t n²/(n²+ξ²)}`.
pub fn weight_w(t: f64, n: i64, xi: f64, k: f64, s1: f64, s2: f64) -> Result<f64, LinearError> {
    if n == 0 {
        return Err(LinearError::ZeroMode);
    }
    check_exponents(k, s1, s2)?;
    if !(t >= 0.0) {
        return Err(LinearError::NegativeTime(t));
    }
    let n2 = (n * n) as f64;
    let r = n2 + xi * xi;
    Ok(n2.powf(s1) / r.powf(k - s2) * (-2.0 * t * n2 / r).exp())
}

/// Uniform bound `((k − s2)/(2e))^{k − s2} t^{−(k − s2)}` on [`weight_w`].
pub fn weight_bound(t: f64, k: f64, s2: f64) -> f64 {
    let a = k - s2;
    if a == 0.0 {
        return 1.0;
    }
    (a / (2.0 * E)).powf(a) * t.powf(-a)
}

fn check_exponents(k: f64, s1: f64, s2: f64) -> Result<(), LinearError> {
    if s1 < 0.0 || s2 < 0.0 || s1 + s2 > k {
        return Err(LinearError::BadExponents { s1, s2, k });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpnessSpec {
    k: f64,
    eps: f64,
    grid: Grid,
}

impl SharpnessSpec {
    pub fn new(k: f64, eps: f64, grid: Grid) -> Result<Self, LinearError> {
        if !(k > 2.0) || !k.is_finite() {
            return Err(LinearError::BadSpec(format!("k = {k} must exceed 2")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(LinearError::BadSpec(format!(
                "eps = {eps} must lie in (0, 1)"
            )));
        }
        if grid.dxi() > 0.5 {
            return Err(LinearError::CoarseGrid(grid.dxi()));
        }
        Ok(Self { k, eps, grid })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Exponent `k + 1/2 + 2ε` of the coefficient tail.
    pub fn tail_exponent(&self) -> f64 {
        self.k + 0.5 + 2.0 * self.eps
    }

    /// Predicted decay exponent `−k − 2ε` of `‖θ(t)‖²_{L²}`.
    pub fn predicted_l2_exponent(&self) -> f64 {
        -self.k - 2.0 * self.eps
    }
}

/// Fraction of the cell `[|ξ| − Δξ/2, |ξ| + Δξ/2]` lying in `|ξ| ≥ 1`.
fn cell_fraction(xi: f64, dxi: f64) -> f64 {
    ((xi.abs() + 0.5 * dxi - 1.0) / dxi).clamp(0.0, 1.0)
}

/// Data with coefficients `|ξ|^{−k−1/2−2ε}` on the `n = ±1` slices for `|ξ| ≥ 1`.
///
/// The cell straddling `|ξ| = 1` carries the in-range fraction of its energy so
/// that grid sums approximate the continuous `ξ` integral to second order.
pub fn sharpness_data(spec: &SharpnessSpec) -> SpectralField {
    let grid = spec.grid;
    let p = spec.tail_exponent();
    let dxi = grid.dxi();
    let mut field = SpectralField::zeros(grid);
    for j in 0..grid.n2() {
        if grid.is_nyquist_m(j) {
            continue;
        }
        let xi = grid.xi(j);
        let frac = cell_fraction(xi, dxi);
        if frac == 0.0 {
            continue;
        }
        let amp = xi.abs().powf(-p) * frac.sqrt();
        field.set_real_mode(1, grid.mode_m(j), Complex64::new(amp, 0.0));
    }
    field
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// `‖θ‖²_{L²}`.
    L2,
    /// `‖u‖²_{H²}`.
    H2OfU,
    /// `‖u2‖²_{H²}`.
    H2OfU2,
}

impl Quantity {
    pub const ALL: [Quantity; 3] = [Quantity::L2, Quantity::H2OfU, Quantity::H2OfU2];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::L2 => "l2",
            Quantity::H2OfU => "h2_of_u",
            Quantity::H2OfU2 => "h2_of_u2",
        }
    }

    /// Weight relative to `|θ̂|²` on the `n = 1` slice.
    fn weight(self, xi: f64) -> f64 {
        let r = 1.0 + xi * xi;
        let h2 = 2.0 + xi.powi(4);
        match self {
            Quantity::L2 => 1.0,
            Quantity::H2OfU => h2 / r,
            Quantity::H2OfU2 => h2 / (r * r),
        }
    }

    /// Predicted decay exponent for the sharpness family.
    pub fn predicted_exponent(self, spec: &SharpnessSpec) -> f64 {
        match self {
            Quantity::L2 | Quantity::H2OfU2 => -spec.k - 2.0 * spec.eps,
            Quantity::H2OfU => -(spec.k - 1.0) - 2.0 * spec.eps,
        }
    }
}

/// 1D quadrature of `∫_{|ξ|≥1} w(ξ) e^{−2t/(1+ξ²)} |ξ|^{−2k−1−4ε} dξ`.
pub fn linear_norm_oracle(
    spec: &SharpnessSpec,
    t: f64,
    quantity: Quantity,
) -> Result<f64, LinearError> {
    if !(t >= 0.0) {
        return Err(LinearError::NegativeTime(t));
    }
    let p = 2.0 * spec.tail_exponent();
    let f = |xi: f64| quantity.weight(xi) * (-2.0 * t / (1.0 + xi * xi)).exp() * xi.powf(-p);
    let split = t.sqrt().max(1.0);
    let mut total = 0.0;
    if split > 1.0 {
        total += quadrature::integrate(f, 1.0, split, 1e-11)?.value;
    }
    total += quadrature::integrate_to_infinity(f, split, 1e-11)?.value;
    Ok(2.0 * total)
}

/// `∫₀¹ e^{−2η} η^{k+1} dη`, the constant in `‖θ(t)‖²_{L²} ≥ C t^{−k−2ε}`.
pub fn lower_bound_constant(k: f64) -> Result<f64, LinearError> {
    Ok(quadrature::integrate(
        |eta| (-2.0 * eta).exp() * eta.powf(k + 1.0),
        0.0,
        1.0,
        1e-13,
    )?
    .value)
}

/// Grid counterpart of [`linear_norm_oracle`]: `(Δξ/2) Σ w |c|²` over all
/// modes, where the `±n` pair stands for one slice of the `ξ` integral.
pub fn grid_quantity(theta: &SpectralField, quantity: Quantity) -> Result<f64, LinearError> {
    let scale = 0.5 * theta.grid().dxi();
    let sum = match quantity {
        Quantity::L2 => theta.l2_norm().powi(2),
        Quantity::H2OfU => {
            let (u1, u2) = spectral::velocity(theta);
            spectral::sobolev_norm(&u1, 2.0)?.powi(2) + spectral::sobolev_norm(&u2, 2.0)?.powi(2)
        }
        Quantity::H2OfU2 => {
            spectral::sobolev_norm(&spectral::vertical_velocity(theta), 2.0)?.powi(2)
        }
    };
    Ok(scale * sum)
}

/// `count` log-uniform times from `t0` to `t1` inclusive.
pub fn log_time_grid(t0: f64, t1: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![t0];
    }
    let (a, b) = (t0.ln(), t1.ln());
    (0..count)
        .map(|i| {
            if i == 0 {
                t0
            } else if i + 1 == count {
                t1
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearRow {
    pub t: f64,
    pub quantity: Quantity,
    pub grid_value: f64,
    pub oracle_value: f64,
}

impl LinearRow {
    pub fn relative_gap(&self) -> f64 {
        (self.grid_value - self.oracle_value).abs() / self.oracle_value.abs().max(f64::MIN_POSITIVE)
    }
}

/// Writes rows as CSV with header `t,quantity,grid_value,oracle_value`.
pub fn write_linear_csv<W: Write>(mut w: W, rows: &[LinearRow]) -> std::io::Result<()> {
    writeln!(w, "t,quantity,grid_value,oracle_value")?;
    for r in rows {
        writeln!(
            w,
            "{:e},{},{:e},{:e}",
            r.t,
            r.quantity.name(),
            r.grid_value,
            r.oracle_value
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn multiplier_examples() {
        assert_eq!(multiplier(0, 3.0, 7.0).unwrap(), 1.0);
        assert!((multiplier(1, 0.0, 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!((multiplier(1, 1.0, 2.0).unwrap() - 0.367_879_441_171_442_3).abs() < 1e-15);
        assert!(matches!(
            multiplier(1, 0.0, -1.0),
            Err(LinearError::NegativeTime(_))
        ));
    }

    #[test]
    fn weight_examples() {
        let w = weight_w(4.0, 1, 1.0, 3.0, 0.0, 0.0).unwrap();
        assert!((w - (-4.0f64).exp() / 8.0).abs() < 1e-15);
        assert!((w - 0.002_289_4).abs() < 1e-7);
        let w = weight_w(0.7, 2, 1.5, 3.0, 0.0, 3.0).unwrap();
        assert!((w - multiplier(2, 1.5, 1.4).unwrap()).abs() < 1e-15);
        assert!(matches!(
            weight_w(1.0, 0, 1.0, 3.0, 0.0, 0.0),
            Err(LinearError::ZeroMode)
        ));
        assert!(matches!(
            weight_w(1.0, 1, 1.0, 3.0, 2.0, 1.5),
            Err(LinearError::BadExponents { .. })
        ));
    }

    #[test]
    fn evolve_needs_affine_profile() {
        let g = Grid::new(16, 16, 2.0 * PI).unwrap();
        let p = StratifiedProfile::new(
            g,
            crate::profile::ProfileKind::AffinePlusPeriodic {
                coefficients: vec![0.1],
            },
        )
        .unwrap();
        let s = LinearState {
            theta: SpectralField::zeros(g),
            t: 0.0,
        };
        assert!(matches!(
            evolve_exact(&s, 1.0, &p),
            Err(LinearError::NonAffineProfile)
        ));
        let a = StratifiedProfile::affine(g);
        assert!(matches!(
            evolve_exact(&s, -1.0, &a),
            Err(LinearError::NegativeTime(_))
        ));
    }

    #[test]
    fn single_mode_decays_by_multiplier() {
        let g = Grid::new(16, 16, 2.0 * PI).unwrap();
        let mut f = SpectralField::zeros(g);
        f.set_real_mode(1, 0, Complex64::new(0.0, -1.0));
        let s = LinearState { theta: f, t: 0.0 };
        let out = evolve_exact(&s, 1.0, &StratifiedProfile::affine(g)).unwrap();
        assert!((out.theta.mode(1, 0).im + (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(out.t, 1.0);
    }

    #[test]
    fn sharpness_coefficients() {
        let g = Grid::new(16, 256, 16.0 * PI).unwrap();
        let spec = SharpnessSpec::new(3.0, 0.25, g).unwrap();
        let f = sharpness_data(&spec);
        // ξ = 2 is m = 32 when Δξ = 1/16
        assert!((f.mode(1, 32).re - 0.0625).abs() < 1e-15);
        assert!((f.mode(-1, -32).re - 0.0625).abs() < 1e-15);
        assert_eq!(f.mode(1, 8).norm(), 0.0);
        assert_eq!(f.mode(2, 32).norm(), 0.0);
        // node exactly at |ξ| = 1 keeps half its energy
        assert!((f.mode(1, 16).re - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(f.hermitian_defect() < 1e-15);
    }

    #[test]
    fn sharpness_rejects_bad_input() {
        let g = Grid::new(16, 64, 4.0 * PI).unwrap();
        assert!(SharpnessSpec::new(2.0, 0.25, g).is_err());
        assert!(SharpnessSpec::new(3.0, 1.0, g).is_err());
        let coarse = Grid::new(16, 64, PI).unwrap();
        assert!(matches!(
            SharpnessSpec::new(3.0, 0.25, coarse),
            Err(LinearError::CoarseGrid(_))
        ));
    }

    #[test]
    fn oracle_at_time_zero_is_closed_form() {
        let g = Grid::new(16, 64, 4.0 * PI).unwrap();
        for (k, eps) in [(2.5, 0.2), (3.0, 0.25), (4.0, 0.1)] {
            let spec = SharpnessSpec::new(k, eps, g).unwrap();
            let v = linear_norm_oracle(&spec, 0.0, Quantity::L2).unwrap();
            let exact = 1.0 / (k + 2.0 * eps);
            assert!((v - exact).abs() / exact < 1e-10);
        }
    }

    #[test]
    fn lower_bound_constants() {
        assert!((lower_bound_constant(2.5).unwrap() - 0.045_539).abs() < 5e-6);
        assert!((lower_bound_constant(3.0).unwrap() - 0.039_490).abs() < 5e-6);
        assert!((lower_bound_constant(4.0).unwrap() - 0.031_057).abs() < 5e-6);
    }

    #[test]
    fn log_grid_endpoints() {
        let ts = log_time_grid(10.0, 1000.0, 41);
        assert_eq!(ts.len(), 41);
        assert_eq!(ts[0], 10.0);
        assert_eq!(ts[40], 1000.0);
        assert!((ts[20] - 100.0).abs() < 1e-10);
    }
}
