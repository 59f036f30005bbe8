//! Scenario files: a flat TOML document with a handful of tables.

use std::fmt;
use std::path::Path;

use ipm_core::initial::InitialData;
use ipm_core::profile::ProfileKind;
use ipm_core::Grid;
use serde::{Deserialize, Serialize};

/// A problem with the scenario itself; maps to exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    LinearDecay,
    Sharpness,
    Simulate,
    Stratify,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::LinearDecay => "linear_decay",
            Mode::Sharpness => "sharpness",
            Mode::Simulate => "simulate",
            Mode::Stratify => "stratify",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n1: usize,
    pub n2: usize,
    /// Half height `L`; give this or `l_over_pi`.
    pub half_height: Option<f64>,
    pub l_over_pi: Option<f64>,
}

impl GridConfig {
    pub fn build(&self) -> anyhow::Result<Grid> {
        let l = match (self.half_height, self.l_over_pi) {
            (Some(l), None) => l,
            (None, Some(r)) => r * std::f64::consts::PI,
            (None, None) => return Err(config_error("grid: set half_height or l_over_pi")),
            (Some(_), Some(_)) => {
                return Err(config_error(
                    "grid: half_height and l_over_pi are exclusive",
                ))
            }
        };
        Grid::new(self.n1, self.n2, l).map_err(|e| config_error(format!("grid: {e}")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_end: Option<f64>,
    /// Diagnostic sampling interval.
    pub cadence: Option<f64>,
    pub dt_max: Option<f64>,
    pub cfl_safety: Option<f64>,
    pub snapshot_cadence: Option<f64>,
    #[serde(default)]
    pub linear_only: bool,
    /// Log-spaced evaluation grid for the linear studies.
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StratificationConfig {
    /// Vertical buffer as a fraction of `L`.
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub mode: Option<Mode>,
    pub seed: Option<u64>,
    pub k: Option<f64>,
    pub eps: Option<f64>,
    pub grid: Option<GridConfig>,
    #[serde(default = "affine")]
    pub profile: ProfileKind,
    pub initial: Option<InitialData>,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub stratification: StratificationConfig,
}

fn affine() -> ProfileKind {
    ProfileKind::Affine {}
}

pub const DEFAULT_MARGIN: f64 = 0.1;

impl ScenarioConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        toml::from_str(text).map_err(|e| config_error(e.to_string()))
    }

    /// Resolves the mode against the subcommand; a mismatch is an error.
    pub fn check_mode(&self, requested: Mode) -> anyhow::Result<()> {
        match self.mode {
            Some(m) if m != requested => Err(config_error(format!(
                "mode = \"{}\" does not match the {} subcommand",
                m.name(),
                requested.name()
            ))),
            _ => Ok(()),
        }
    }

    pub fn grid(&self) -> anyhow::Result<Grid> {
        self.grid
            .as_ref()
            .ok_or_else(|| config_error("missing [grid] table"))?
            .build()
    }

    pub fn initial(&self) -> anyhow::Result<&InitialData> {
        self.initial
            .as_ref()
            .ok_or_else(|| config_error("missing [initial] table"))
    }

    pub fn k(&self) -> anyhow::Result<f64> {
        let k = self.k.ok_or_else(|| config_error("missing k"))?;
        if !(k > 2.0 && k.is_finite()) {
            return Err(config_error(format!("k = {k} must exceed 2")));
        }
        Ok(k)
    }

    pub fn eps(&self) -> anyhow::Result<f64> {
        let eps = self.eps.ok_or_else(|| config_error("missing eps"))?;
        if !(eps > 0.0 && eps < 1.0) {
            return Err(config_error(format!("eps = {eps} must lie in (0, 1)")));
        }
        Ok(eps)
    }

    pub fn margin(&self) -> anyhow::Result<f64> {
        let m = self.stratification.margin.unwrap_or(DEFAULT_MARGIN);
        if !(m > 0.0 && m < 0.5) {
            return Err(config_error(format!(
                "stratification.margin = {m} must lie in (0, 0.5)"
            )));
        }
        Ok(m)
    }

    /// `(t_min, t_max, samples)` for the linear studies.
    pub fn log_grid(&self, defaults: (f64, f64, usize)) -> anyhow::Result<(f64, f64, usize)> {
        let t = &self.time;
        let lo = t.t_min.unwrap_or(defaults.0);
        let hi = t.t_max.unwrap_or(defaults.1);
        let n = t.samples.unwrap_or(defaults.2);
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(config_error(format!(
                "time: need 0 < t_min < t_max, got [{lo}, {hi}]"
            )));
        }
        if n < 2 {
            return Err(config_error("time.samples must be at least 2"));
        }
        Ok((lo, hi, n))
    }

    pub fn positive_time(&self, name: &str, v: Option<f64>) -> anyhow::Result<f64> {
        let v = v.ok_or_else(|| config_error(format!("missing time.{name}")))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(config_error(format!("time.{name} = {v} must be positive")));
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_scenario() {
        let c = ScenarioConfig::parse(
            r#"
            mode = "simulate"
            seed = 3
            k = 3.0
            [grid]
            n1 = 32
            n2 = 128
            l_over_pi = 4
            [profile]
            kind = "affine_plus_periodic"
            coefficients = [0.01]
            [initial]
            family = "gaussian_bump"
            amplitude = 0.05
            [time]
            t_end = 1.0
            cadence = 0.1
            "#,
        )
        .unwrap();
        assert_eq!(c.mode, Some(Mode::Simulate));
        assert!((c.grid().unwrap().half_height() - 4.0 * std::f64::consts::PI).abs() < 1e-15);
        assert!(matches!(c.profile, ProfileKind::AffinePlusPeriodic { .. }));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for text in [
            "kk = 3.0",
            "[grid]\nn1 = 8\nn2 = 8\nl_over_pi = 1\nn3 = 2",
            "[initial]\nfamily = \"zero\"\namplitude = 1.0",
            "[profile]\nkind = \"affine\"\nslope = 2.0",
            "[time]\ntend = 1.0",
        ] {
            let err = ScenarioConfig::parse(text).unwrap_err();
            assert!(err.downcast_ref::<ConfigError>().is_some(), "{text}");
        }
    }

    #[test]
    fn mode_mismatch_is_reported() {
        let c = ScenarioConfig::parse("mode = \"stratify\"").unwrap();
        assert!(c.check_mode(Mode::Stratify).is_ok());
        let msg = c.check_mode(Mode::Simulate).unwrap_err().to_string();
        assert!(msg.contains("stratify"), "{msg}");
    }
}
