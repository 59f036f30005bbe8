//! Named families of initial perturbations `θ0`.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linear::{self, LinearError, SharpnessSpec};
use crate::spectral::{self, Grid, RealField, Snapshot, SpectralError, SpectralField};

#[derive(Debug, thiserror::Error)]
pub enum InitialError {
    #[error("invalid initial-data parameter: {0}")]
    BadParameter(String),
    #[error("snapshot grid {found:?} does not match the configured grid {expected:?}")]
    SnapshotGrid { expected: Grid, found: Grid },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Linear(#[from] LinearError),
}

fn one() -> f64 {
    1.0
}

fn default_modes() -> usize {
    4
}

fn default_window() -> f64 {
    1.0 / 6.0
}

fn default_n() -> i64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    Zero {},
    /// `a sin(n x1) e^{−(x2/w)²}`.
    GaussianBump {
        amplitude: f64,
        #[serde(default = "default_n")]
        n: i64,
        #[serde(default = "one")]
        width: f64,
    },
    /// Gaussian bump plus a slow-decay component windowed by
    /// `e^{−(x2/(window·L))²}` and scaled to sup norm `rough_amplitude`.
    BumpPlusRough {
        amplitude: f64,
        #[serde(default = "one")]
        width: f64,
        rough_amplitude: f64,
        k: f64,
        eps: f64,
        #[serde(default = "default_window")]
        window: f64,
    },
    /// Slow-decay data scaled by `scale`.
    Sharpness {
        k: f64,
        eps: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// Seeded sum of `modes` horizontal harmonics with random phases and
    /// Gaussian vertical envelopes, scaled to sup norm `amplitude`.
    RandomSmooth {
        amplitude: f64,
        #[serde(default = "default_modes")]
        modes: usize,
        #[serde(default = "one")]
        width: f64,
    },
    Snapshot {
        path: PathBuf,
    },
}

fn positive(name: &str, v: f64) -> Result<(), InitialError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(InitialError::BadParameter(format!(
            "{name} = {v} must be positive"
        )))
    }
}

fn finite(name: &str, v: f64) -> Result<(), InitialError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(InitialError::BadParameter(format!("{name} must be finite")))
    }
}

fn scale_to_sup(f: RealField, target: f64) -> RealField {
    let m = f.max_abs();
    if m == 0.0 {
        f
    } else {
        f.map(|v| v * target / m)
    }
}

impl InitialData {
    pub fn build(&self, grid: Grid, seed: u64) -> Result<SpectralField, InitialError> {
        Ok(match self {
            InitialData::Zero {} => SpectralField::zeros(grid),
            InitialData::GaussianBump {
                amplitude,
                n,
                width,
            } => {
                finite("amplitude", *amplitude)?;
                positive("width", *width)?;
                let (a, n, w) = (*amplitude, *n as f64, *width);
                spectral::forward(&RealField::from_fn(grid, |x1, x2| {
                    a * (n * x1).sin() * (-(x2 / w).powi(2)).exp()
                }))
            }
            InitialData::BumpPlusRough {
                amplitude,
                width,
                rough_amplitude,
                k,
                eps,
                window,
            } => {
                finite("amplitude", *amplitude)?;
                finite("rough_amplitude", *rough_amplitude)?;
                positive("width", *width)?;
                positive("window", *window)?;
                let spec = SharpnessSpec::new(*k, *eps, grid)?;
                let rough = spectral::inverse(&linear::sharpness_data(&spec));
                let ww = window * grid.half_height();
                let envelope = RealField::from_fn(grid, |_, x2| (-(x2 / ww).powi(2)).exp());
                let rough =
                    scale_to_sup(rough.zip_with(&envelope, |a, b| a * b)?, *rough_amplitude);
                let (a, w) = (*amplitude, *width);
                let bump =
                    RealField::from_fn(grid, |x1, x2| a * x1.sin() * (-(x2 / w).powi(2)).exp());
                spectral::forward(&bump.zip_with(&rough, |a, b| a + b)?)
            }
            InitialData::Sharpness { k, eps, scale } => {
                finite("scale", *scale)?;
                linear::sharpness_data(&SharpnessSpec::new(*k, *eps, grid)?).scale(*scale)
            }
            InitialData::RandomSmooth {
                amplitude,
                modes,
                width,
            } => {
                finite("amplitude", *amplitude)?;
                positive("width", *width)?;
                if *modes == 0 || *modes > grid.n1() / 3 {
                    return Err(InitialError::BadParameter(format!(
                        "modes = {modes} must lie in 1..={}",
                        grid.n1() / 3
                    )));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let w = *width;
                let terms: Vec<(f64, f64, f64, f64)> = (1..=*modes)
                    .map(|n| {
                        let c = rng.gen_range(-1.0..1.0);
                        let s = rng.gen_range(-1.0..1.0);
                        let center = rng.gen_range(-0.5 * w..0.5 * w);
                        (n as f64, c, s, center)
                    })
                    .collect();
                let f = RealField::from_fn(grid, |x1, x2| {
                    terms
                        .iter()
                        .map(|&(n, c, s, x0)| {
                            (c * (n * x1).cos() + s * (n * x1).sin()) / (n * n)
                                * (-((x2 - x0) / w).powi(2)).exp()
                        })
                        .sum()
                });
                spectral::forward(&scale_to_sup(f, *amplitude))
            }
            InitialData::Snapshot { path } => {
                let snap = Snapshot::load(path)?;
                let found = *snap.field.grid();
                if found != grid {
                    return Err(InitialError::SnapshotGrid {
                        expected: grid,
                        found,
                    });
                }
                spectral::forward(&snap.field)
            }
        })
    }
}
