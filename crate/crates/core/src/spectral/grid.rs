use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::SpectralError;

/// Periodic collocation grid on `[0, 2π) × [−L, L)`.
///
/// Samples are stored row-major with `x1` fastest: index `j * n1 + i` holds
/// the point `(x1_i, x2_j)`. Spectral coefficients use the same layout with
/// FFT ordering along each axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n1: usize,
    n2: usize,
    half_height: f64,
}

impl Grid {
    pub fn new(n1: usize, n2: usize, half_height: f64) -> Result<Self, SpectralError> {
        for (axis, n) in [(1, n1), (2, n2)] {
            if n < 16 || n % 2 != 0 {
                return Err(SpectralError::InvalidGrid(format!(
                    "n{axis} = {n} must be even and at least 16"
                )));
            }
        }
        if !(half_height.is_finite() && half_height > 0.0) {
            return Err(SpectralError::InvalidGrid(format!(
                "half height L = {half_height} must be positive"
            )));
        }
        Ok(Self {
            n1,
            n2,
            half_height,
        })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// Half-height `L` of the vertical period.
    pub fn half_height(&self) -> f64 {
        self.half_height
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx1(&self) -> f64 {
        2.0 * PI / self.n1 as f64
    }

    pub fn dx2(&self) -> f64 {
        2.0 * self.half_height / self.n2 as f64
    }

    /// Vertical wavenumber spacing `π / L`.
    pub fn dxi(&self) -> f64 {
        PI / self.half_height
    }

    /// Area of the periodic cell, `4πL`.
    pub fn area(&self) -> f64 {
        4.0 * PI * self.half_height
    }

    pub fn x1(&self, i: usize) -> f64 {
        i as f64 * self.dx1()
    }

    pub fn x2(&self, j: usize) -> f64 {
        -self.half_height + j as f64 * self.dx2()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n1 + i
    }

    /// Horizontal wavenumber `n ∈ {−n1/2, …, n1/2 − 1}` stored at FFT index `i`.
    #[inline]
    pub fn wavenumber_n(&self, i: usize) -> i64 {
        signed_index(i, self.n1)
    }

    /// Integer vertical mode `m ∈ {−n2/2, …, n2/2 − 1}` stored at FFT index `j`.
    #[inline]
    pub fn mode_m(&self, j: usize) -> i64 {
        signed_index(j, self.n2)
    }

    /// Vertical wavenumber `ξ = π m / L` at FFT index `j`.
    #[inline]
    pub fn xi(&self, j: usize) -> f64 {
        self.mode_m(j) as f64 * self.dxi()
    }

    pub fn is_nyquist_n(&self, i: usize) -> bool {
        i == self.n1 / 2
    }

    pub fn is_nyquist_m(&self, j: usize) -> bool {
        j == self.n2 / 2
    }

    /// FFT index holding horizontal wavenumber `n`, if representable.
    pub fn index_of_n(&self, n: i64) -> Option<usize> {
        unsigned_index(n, self.n1)
    }

    /// FFT index holding vertical mode `m`, if representable.
    pub fn index_of_m(&self, m: i64) -> Option<usize> {
        unsigned_index(m, self.n2)
    }

    /// Iterator over `(flat index, n, ξ)` for every spectral coefficient.
    pub fn modes(&self) -> impl Iterator<Item = (usize, i64, f64)> + '_ {
        (0..self.n2).flat_map(move |j| {
            let xi = self.xi(j);
            (0..self.n1).map(move |i| (self.index(i, j), self.wavenumber_n(i), xi))
        })
    }

    pub fn check_same(&self, other: &Grid) -> Result<(), SpectralError> {
        if self == other {
            Ok(())
        } else {
            Err(SpectralError::GridMismatch {
                left: *self,
                right: *other,
            })
        }
    }
}

fn signed_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

fn unsigned_index(k: i64, n: usize) -> Option<usize> {
    let half = (n / 2) as i64;
    if k < -half || k >= half {
        return None;
    }
    Some(if k >= 0 {
        k as usize
    } else {
        (k + n as i64) as usize
    })
}
