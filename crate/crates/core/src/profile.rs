//! Stably stratified background densities `ρ_s(x2)`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::spectral::Grid;

#[derive(Debug, thiserror::Error)]
pub enum ProfileError {
    #[error("profile is not stably stratified: min(-d2 rho_s) = {0} <= 0")]
    NotStable(f64),
    #[error("non-finite profile coefficient at position {0}")]
    NonFinite(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileKind {
    /// `ρ_s = −x2`.
    Affine {},
    /// `ρ_s = −x2 + Σ_j a_j sin(jπ x2 / L)`, `j = 1, 2, …`.
    AffinePlusPeriodic { coefficients: Vec<f64> },
}

/// Background density sampled on the vertical grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StratifiedProfile {
    kind: ProfileKind,
    grid: Grid,
    d2: Vec<f64>,
    gamma: f64,
    c_norm: f64,
}

impl StratifiedProfile {
    pub fn affine(grid: Grid) -> Self {
        Self::new(grid, ProfileKind::Affine {}).expect("the affine profile is stable")
    }

    pub fn new(grid: Grid, kind: ProfileKind) -> Result<Self, ProfileError> {
        if let ProfileKind::AffinePlusPeriodic { coefficients } = &kind {
            if let Some(p) = coefficients.iter().position(|a| !a.is_finite()) {
                return Err(ProfileError::NonFinite(p));
            }
        }
        let mut profile = Self {
            kind,
            grid,
            d2: Vec::new(),
            gamma: 0.0,
            c_norm: 0.0,
        };
        profile.d2 = (0..grid.n2()).map(|j| profile.d2_at(grid.x2(j))).collect();
        profile.gamma = profile.d2.iter().map(|d| -d).fold(f64::INFINITY, f64::min);
        if profile.gamma.is_nan() || profile.gamma <= 0.0 {
            return Err(ProfileError::NotStable(profile.gamma));
        }
        Ok(profile)
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn is_affine(&self) -> bool {
        match &self.kind {
            ProfileKind::Affine {} => true,
            ProfileKind::AffinePlusPeriodic { coefficients } => {
                coefficients.iter().all(|&a| a == 0.0)
            }
        }
    }

    fn terms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let l = self.grid.half_height();
        let coeffs: &[f64] = match &self.kind {
            ProfileKind::Affine {} => &[],
            ProfileKind::AffinePlusPeriodic { coefficients } => coefficients,
        };
        coeffs
            .iter()
            .enumerate()
            .map(move |(j, &a)| (a, (j + 1) as f64 * PI / l))
    }

    /// `ρ_s(x2)`.
    pub fn rho(&self, x2: f64) -> f64 {
        -x2 + self.periodic_part(x2)
    }

    /// Periodic part `ρ_s(x2) + x2`.
    pub fn periodic_part(&self, x2: f64) -> f64 {
        self.terms().map(|(a, w)| a * (w * x2).sin()).sum()
    }

    /// `∂2 ρ_s(x2)`.
    pub fn d2_at(&self, x2: f64) -> f64 {
        -1.0 + self
            .terms()
            .map(|(a, w)| a * w * (w * x2).cos())
            .sum::<f64>()
    }

    /// `∂2 ρ_s` on the vertical collocation points.
    pub fn d2_samples(&self) -> &[f64] {
        &self.d2
    }

    /// `inf(−∂2 ρ_s)` over the vertical grid.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Finite-difference estimate of `‖∂2 ρ_s‖_{C^{k+1}}`: the largest sup norm
    /// among the first `⌈k⌉ + 1` periodic differences of the samples.
    pub fn c_norm(&self, k: f64) -> f64 {
        let order = k.max(0.0).ceil() as usize + 1;
        let h = self.grid.dx2();
        let mut d = self.d2.clone();
        let mut best = sup(&d);
        for _ in 0..order {
            let n = d.len();
            d = (0..n)
                .map(|j| (d[(j + 1) % n] - d[(j + n - 1) % n]) / (2.0 * h))
                .collect();
            best = best.max(sup(&d));
        }
        best
    }

    /// `min{k − 2, inf(−∂2 ρ_s), 1/‖∂2 ρ_s‖_{C^{k+1}}}`.
    pub fn structure_constant(&self, k: f64) -> f64 {
        (k - 2.0).min(self.gamma).min(1.0 / self.c_norm(k))
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(16, 64, 4.0 * PI).unwrap()
    }

    #[test]
    fn affine_profile_has_unit_slope() {
        let p = StratifiedProfile::affine(grid());
        assert!(p.d2_samples().iter().all(|&d| d == -1.0));
        assert_eq!(p.gamma(), 1.0);
        assert!((p.c_norm(3.0) - 1.0).abs() < 1e-14);
        assert!((p.structure_constant(3.0) - 1.0).abs() < 1e-14);
        assert!((p.structure_constant(2.5) - 0.5).abs() < 1e-14);
        assert!(p.is_affine());
    }

    #[test]
    fn periodic_part_lowers_gamma() {
        let g = grid();
        let l = g.half_height();
        let a = 0.5;
        let p = StratifiedProfile::new(
            g,
            ProfileKind::AffinePlusPeriodic {
                coefficients: vec![a],
            },
        )
        .unwrap();
        // slope −1 + a(π/L)cos(πx2/L); the maximum sits on the grid at x2 = 0
        assert!((p.gamma() - (1.0 - a * PI / l)).abs() < 1e-12);
        assert!(!p.is_affine());
        assert!((p.rho(0.3) - (-0.3 + a * (PI * 0.3 / l).sin())).abs() < 1e-15);
    }

    #[test]
    fn unstable_profile_is_rejected() {
        let g = grid();
        let a = 2.0 * g.half_height() / PI;
        let err = StratifiedProfile::new(
            g,
            ProfileKind::AffinePlusPeriodic {
                coefficients: vec![a],
            },
        );
        assert!(matches!(err, Err(ProfileError::NotStable(_))));
    }
}
