use rustfft::num_complex::Complex64;

use super::transform::fft2;
use super::{Grid, SpectralError};

/// Real samples on the collocation points of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: Grid,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self, SpectralError> {
        if values.len() != grid.len() {
            return Err(SpectralError::LengthMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(SpectralError::NonFinite(pos));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Samples `f(x1, x2)` at every collocation point.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.n2() {
            let x2 = grid.x2(j);
            for i in 0..grid.n1() {
                values.push(f(grid.x1(i), x2));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Samples of the column at horizontal index `i`.
    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..self.grid.n2()).map(|j| self.at(i, j)).collect()
    }

    /// Physical `L²` norm with the trapezoid (equal-weight) rule.
    pub fn l2_norm(&self) -> f64 {
        let w = self.grid.dx1() * self.grid.dx2();
        (w * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(
        &self,
        other: &RealField,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, SpectralError> {
        self.grid.check_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

/// Fourier coefficients `c(n, m)` of a real field.
///
/// The forward map is unitary from `L²` of the periodic cell to `ℓ²`, and
/// coefficients are phased against `e^{i(n x1 + ξ x2)}` with the true `x2`
/// coordinate (not the sample index).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self, SpectralError> {
        if coeffs.len() != grid.len() {
            return Err(SpectralError::LengthMismatch {
                expected: grid.len(),
                found: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of mode `(n, m)`; zero when the mode is not on the grid.
    pub fn mode(&self, n: i64, m: i64) -> Complex64 {
        match (self.grid.index_of_n(n), self.grid.index_of_m(m)) {
            (Some(i), Some(j)) => self.coeffs[self.grid.index(i, j)],
            _ => Complex64::default(),
        }
    }

    /// Sets `(n, m)` and its Hermitian partner `(−n, −m)` so the field stays real.
    pub fn set_real_mode(&mut self, n: i64, m: i64, value: Complex64) {
        let grid = self.grid;
        if let (Some(i), Some(j)) = (grid.index_of_n(n), grid.index_of_m(m)) {
            self.coeffs[grid.index(i, j)] = value;
        }
        if let (Some(i), Some(j)) = (grid.index_of_n(-n), grid.index_of_m(-m)) {
            self.coeffs[grid.index(i, j)] = value.conj();
        }
    }

    /// Spectral `L²` norm, equal to the physical one by Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Applies a real multiplier `w(n, ξ)` coefficient-wise.
    pub fn map_modes(&self, w: impl Fn(i64, f64) -> f64) -> Self {
        let coeffs = self
            .grid
            .modes()
            .map(|(idx, n, xi)| self.coeffs[idx] * w(n, xi))
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    /// Applies a complex multiplier coefficient-wise.
    pub fn map_modes_complex(&self, w: impl Fn(i64, f64) -> Complex64) -> Self {
        let coeffs = self
            .grid
            .modes()
            .map(|(idx, n, xi)| self.coeffs[idx] * w(n, xi))
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    /// `Σ w(n, ξ) |c(n, m)|²`.
    pub fn weighted_energy(&self, w: impl Fn(i64, f64) -> f64) -> f64 {
        self.grid
            .modes()
            .map(|(idx, n, xi)| w(n, xi) * self.coeffs[idx].norm_sqr())
            .sum()
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    pub fn add(&self, other: &SpectralField) -> Result<Self, SpectralError> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<Self, SpectralError> {
        self.axpy(-1.0, other)
    }

    /// `self + a · other`.
    pub fn axpy(&self, a: f64, other: &SpectralField) -> Result<Self, SpectralError> {
        self.grid.check_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x + y * a)
                .collect(),
        })
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest violation of `c(−n, −m) = conj c(n, m)` over non-Nyquist modes.
    pub fn hermitian_defect(&self) -> f64 {
        let g = self.grid;
        let mut worst: f64 = 0.0;
        for (idx, n, _) in g.modes() {
            let j = idx / g.n1();
            let m = g.mode_m(j);
            if g.is_nyquist_m(j) || g.is_nyquist_n(idx % g.n1()) {
                continue;
            }
            worst = worst.max((self.mode(-n, -m) - self.coeffs[idx].conj()).norm());
        }
        worst
    }
}

fn parity_sign(grid: &Grid, j: usize) -> f64 {
    if grid.mode_m(j).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Unitary forward transform.
pub fn forward(f: &RealField) -> SpectralField {
    let grid = *f.grid();
    let mut buf: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&mut buf, &grid, false);
    let scale = grid.area().sqrt() / grid.len() as f64;
    // samples start at x2 = −L, so shifting the phase origin to x2 = 0 costs (−1)^m
    for j in 0..grid.n2() {
        let s = scale * parity_sign(&grid, j);
        for c in &mut buf[j * grid.n1()..(j + 1) * grid.n1()] {
            *c *= s;
        }
    }
    SpectralField { grid, coeffs: buf }
}

/// Inverse of [`forward`]; the imaginary residue is discarded.
pub fn inverse(field: &SpectralField) -> RealField {
    let grid = *field.grid();
    let mut buf = field.coeffs().to_vec();
    let scale = 1.0 / grid.area().sqrt();
    for j in 0..grid.n2() {
        let s = scale * parity_sign(&grid, j);
        for c in &mut buf[j * grid.n1()..(j + 1) * grid.n1()] {
            *c *= s;
        }
    }
    fft2(&mut buf, &grid, true);
    RealField {
        grid,
        values: buf.into_iter().map(|c| c.re).collect(),
    }
}

/// Forward transform that checks the field lives on `grid`.
pub fn forward_on(grid: &Grid, f: &RealField) -> Result<SpectralField, SpectralError> {
    grid.check_same(f.grid())?;
    Ok(forward(f))
}

/// Inverse transform that checks the field lives on `grid`.
pub fn inverse_on(grid: &Grid, f: &SpectralField) -> Result<RealField, SpectralError> {
    grid.check_same(f.grid())?;
    Ok(inverse(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(16, 32, 2.0 * PI).unwrap()
    }

    #[test]
    fn zero_field_has_zero_coefficients() {
        let f = forward(&RealField::zeros(grid()));
        assert!(f.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn cosine_lands_on_two_modes() {
        let g = grid();
        let f = forward(&RealField::from_fn(g, |x1, _| x1.cos()));
        let expected = 0.5 * g.area().sqrt();
        for (idx, n, xi) in g.modes() {
            let c = f.coeffs()[idx];
            if xi == 0.0 && n.abs() == 1 {
                assert!((c.re - expected).abs() < 1e-12 && c.im.abs() < 1e-12);
            } else {
                assert!(c.norm() < 1e-12, "spurious mode ({n}, {xi}): {c}");
            }
        }
    }

    #[test]
    fn phase_refers_to_true_vertical_coordinate() {
        // sin(ξ1 x2) with ξ1 = π/L: coefficient at m = 1 is −i/2 · sqrt(area)
        let g = grid();
        let xi1 = g.dxi();
        let f = forward(&RealField::from_fn(g, |_, x2| (xi1 * x2).sin()));
        let c = f.mode(0, 1);
        let a = 0.5 * g.area().sqrt();
        assert!(c.re.abs() < 1e-12);
        assert!((c.im + a).abs() < 1e-12);
    }

    #[test]
    fn mismatched_grid_is_rejected() {
        let other = Grid::new(16, 16, 1.0).unwrap();
        let f = RealField::zeros(grid());
        assert!(matches!(
            forward_on(&other, &f),
            Err(SpectralError::GridMismatch { .. })
        ));
    }

    #[test]
    fn real_field_rejects_nan() {
        let g = grid();
        let mut v = vec![0.0; g.len()];
        v[3] = f64::NAN;
        assert!(matches!(
            RealField::new(g, v),
            Err(SpectralError::NonFinite(3))
        ));
    }
}
