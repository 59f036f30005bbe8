//! Pseudo-spectral RK4 integration of `θ_t + u·∇θ = −∂2ρ_s u2`.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{Column, DiagnosticsError, NormSeries};
use crate::profile::StratifiedProfile;
use crate::spectral::{self, Grid, RealField, SpectralError, SpectralField};
use crate::stratification::{self, Density, LevelGrid};

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("blow-up guard at t = {t}: {reason}")]
    BlowUp { t: f64, reason: AbortReason },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AbortReason {
    NonFinite,
    NormExceeded { hk_theta: f64 },
}

impl std::fmt::Display for AbortReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AbortReason::NonFinite => write!(f, "non-finite coefficient"),
            AbortReason::NormExceeded { hk_theta } => {
                write!(f, "H^k norm {hk_theta:e} exceeds {BLOW_UP_NORM:e}")
            }
        }
    }
}

pub const BLOW_UP_NORM: f64 = 1e6;
pub const VELOCITY_FLOOR: f64 = 1e-8;
/// Relative threshold on `|θ|` for the boundary-margin flag.
pub const MARGIN_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dynamics {
    /// Advection plus the background term.
    Full,
    /// Background term only: `θ_t = −∂2ρ_s u2`.
    LinearOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub grid: Grid,
    pub profile: StratifiedProfile,
    pub k: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub dt_max: f64,
    pub snapshot_cadence: f64,
    pub diagnostic_cadence: f64,
    pub boundary_margin: f64,
    pub dynamics: Dynamics,
}

impl SolverConfig {
    /// Defaults: `cfl_safety = 0.5`, `dt_max = diagnostic_cadence`,
    /// `boundary_margin = 0.1`, full dynamics.
    pub fn new(
        grid: Grid,
        profile: StratifiedProfile,
        k: f64,
        t_end: f64,
        diagnostic_cadence: f64,
    ) -> Self {
        Self {
            grid,
            profile,
            k,
            t_end,
            cfl_safety: 0.5,
            dt_max: diagnostic_cadence,
            snapshot_cadence: t_end,
            diagnostic_cadence,
            boundary_margin: 0.1,
            dynamics: Dynamics::Full,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::InvalidConfig(m));
        if !(self.k > 2.0) {
            return bad(format!("k = {} must exceed 2", self.k));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return bad(format!("t_end = {} must be positive", self.t_end));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad(format!(
                "cfl_safety = {} must lie in (0, 1]",
                self.cfl_safety
            ));
        }
        if !(self.dt_max > 0.0) {
            return bad(format!("dt_max = {} must be positive", self.dt_max));
        }
        if !(self.snapshot_cadence > 0.0) || !(self.diagnostic_cadence > 0.0) {
            return bad("cadences must be positive".into());
        }
        if !(0.0..0.5).contains(&self.boundary_margin) {
            return bad(format!(
                "boundary_margin = {} must lie in [0, 0.5)",
                self.boundary_margin
            ));
        }
        self.grid.check_same(self.profile.grid())?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState {
    pub theta: SpectralField,
    pub t: f64,
    pub step_count: u64,
}

/// Dealiased `u·∇θ` with `u = velocity(θ)`, products formed on the grid.
pub fn advection(theta: &SpectralField) -> SpectralField {
    let (u1, u2) = spectral::velocity(theta);
    let u1 = spectral::inverse(&u1);
    let u2 = spectral::inverse(&u2);
    let t1 = spectral::inverse(&spectral::d1(theta));
    let t2 = spectral::inverse(&spectral::d2(theta));
    let values = u1
        .values()
        .iter()
        .zip(t1.values())
        .zip(u2.values().iter().zip(t2.values()))
        .map(|((a, b), (c, d))| a * b + c * d)
        .collect();
    let product = RealField::new(*theta.grid(), values).unwrap_or_else(|_| {
        // non-finite products propagate to the blow-up guard
        RealField::from_fn(*theta.grid(), |_, _| f64::NAN)
    });
    spectral::dealias(&spectral::forward(&product))
}

/// `−∂2ρ_s u2`, spectrally exact for the affine profile.
pub fn background_term(theta: &SpectralField, profile: &StratifiedProfile) -> SpectralField {
    let u2 = spectral::vertical_velocity(theta);
    if profile.is_affine() {
        return u2;
    }
    let g = *theta.grid();
    let u2 = spectral::inverse(&u2);
    let d2 = profile.d2_samples();
    let values = u2
        .values()
        .iter()
        .enumerate()
        .map(|(idx, v)| -d2[idx / g.n1()] * v)
        .collect();
    let product =
        RealField::new(g, values).unwrap_or_else(|_| RealField::from_fn(g, |_, _| f64::NAN));
    spectral::dealias(&spectral::forward(&product))
}

/// `−dealias(u·∇θ) − ∂2ρ_s u2`.
pub fn rhs(
    theta: &SpectralField,
    profile: &StratifiedProfile,
    dynamics: Dynamics,
) -> SpectralField {
    let background = background_term(theta, profile);
    match dynamics {
        Dynamics::LinearOnly => background,
        Dynamics::Full => background
            .axpy(-1.0, &advection(theta))
            .expect("fields share a grid"),
    }
}

/// `safety · min(Δx1, Δx2) / max(‖u‖_∞, 1e−8)`, capped at `dt_max`.
pub fn cfl_dt(theta: &SpectralField, safety: f64, dt_max: f64) -> f64 {
    let g = theta.grid();
    let (u1, u2) = spectral::velocity(theta);
    let u1 = spectral::inverse(&u1);
    let u2 = spectral::inverse(&u2);
    let umax = u1
        .values()
        .iter()
        .zip(u2.values())
        .fold(0.0f64, |m, (a, b)| m.max(a.hypot(*b)));
    (safety * g.dx1().min(g.dx2()) / umax.max(VELOCITY_FLOOR)).min(dt_max)
}

/// Classical four-stage Runge–Kutta step.
pub fn step_rk4(
    state: &SimulationState,
    dt: f64,
    profile: &StratifiedProfile,
    dynamics: Dynamics,
) -> Result<SimulationState, SolverError> {
    if !(dt > 0.0) {
        return Err(SolverError::InvalidConfig(format!(
            "dt = {dt} must be positive"
        )));
    }
    let th = &state.theta;
    let k1 = rhs(th, profile, dynamics);
    let k2 = rhs(&th.axpy(0.5 * dt, &k1)?, profile, dynamics);
    let k3 = rhs(&th.axpy(0.5 * dt, &k2)?, profile, dynamics);
    let k4 = rhs(&th.axpy(dt, &k3)?, profile, dynamics);
    let mut next = th.clone();
    let w = dt / 6.0;
    for (i, c) in next.coeffs_mut().iter_mut().enumerate() {
        *c += (k1.coeffs()[i] + (k2.coeffs()[i] + k3.coeffs()[i]) * 2.0 + k4.coeffs()[i]) * w;
    }
    let t = state.t + dt;
    if !next.is_finite() {
        return Err(SolverError::BlowUp {
            t,
            reason: AbortReason::NonFinite,
        });
    }
    Ok(SimulationState {
        theta: next,
        t,
        step_count: state.step_count + 1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    Aborted { t: f64, reason: AbortReason },
}

/// Quantities fixed at `t = 0` for the nonlinear diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialSummary {
    pub hk_theta: f64,
    pub l2_theta: f64,
    /// Potential energy `½‖h‖²` of the initial density.
    pub energy: Option<f64>,
    /// Why the initial stratification could not be computed.
    pub stratification_error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<SimulationState>,
    pub series: NormSeries,
    pub outcome: Outcome,
    pub initial: InitialSummary,
    /// First diagnostic time at which `θ` reached the boundary margin.
    pub margin_violation: Option<f64>,
    pub last_valid: SimulationState,
}

struct EnergyReference {
    e0: f64,
    moment0: f64,
    // ρ0* − ρ_s on the vertical grid
    offset: Vec<f64>,
}

struct Monitor<'a> {
    config: &'a SolverConfig,
    energy: Option<EnergyReference>,
}

fn vertical_moment(theta: &RealField) -> f64 {
    let g = theta.grid();
    let mut sum = 0.0;
    for j in 0..g.n2() {
        let x2 = g.x2(j);
        let row: f64 = (0..g.n1()).map(|i| theta.at(i, j)).sum();
        sum += row * x2;
    }
    sum * g.dx1() * g.dx2()
}

impl Monitor<'_> {
    fn columns(&self) -> Vec<Column> {
        let mut cols = vec![
            Column::L2Theta,
            Column::HkTheta,
            Column::L2U,
            Column::H2U,
            Column::H2U2,
            Column::GradLinfU2,
        ];
        if self.energy.is_some() {
            cols.extend([Column::EnergyE, Column::L2RhoMinusRhostar]);
        }
        cols.sort();
        cols
    }

    /// Row in [`Monitor::columns`] order, plus whether `θ` touches the margin.
    fn row(&self, theta: &SpectralField) -> Result<(Vec<f64>, bool), SolverError> {
        let k = self.config.k;
        let (u1, u2) = spectral::velocity(theta);
        let l2_u = u1.l2_norm().hypot(u2.l2_norm());
        let h2_u2 = spectral::sobolev_norm(&u2, 2.0)?;
        let h2_u = spectral::sobolev_norm(&u1, 2.0)?.hypot(h2_u2);
        let phys = spectral::inverse(theta);
        let mut values = vec![
            (Column::L2Theta, theta.l2_norm()),
            (Column::HkTheta, spectral::sobolev_norm(theta, k)?),
            (Column::L2U, l2_u),
            (Column::H2U, h2_u),
            (Column::H2U2, h2_u2),
            (Column::GradLinfU2, spectral::grad_linf(&u2)),
        ];
        if let Some(r) = &self.energy {
            let e = r.e0 + vertical_moment(&phys) - r.moment0;
            let g = phys.grid();
            let mut sq = 0.0;
            for j in 0..g.n2() {
                for i in 0..g.n1() {
                    let d = phys.at(i, j) - r.offset[j];
                    sq += d * d;
                }
            }
            let dist = (sq * g.dx1() * g.dx2()).sqrt();
            values.push((Column::EnergyE, e));
            values.push((Column::L2RhoMinusRhostar, dist));
        }
        values.sort_by_key(|v| v.0);
        Ok((
            values.into_iter().map(|v| v.1).collect(),
            self.touches_margin(&phys),
        ))
    }

    fn touches_margin(&self, phys: &RealField) -> bool {
        let g = phys.grid();
        let limit = g.half_height() * (1.0 - self.config.boundary_margin);
        let thresh = MARGIN_THRESHOLD * phys.max_abs();
        if thresh == 0.0 {
            return false;
        }
        (0..g.n2())
            .filter(|&j| g.x2(j).abs() > limit)
            .any(|j| (0..g.n1()).any(|i| phys.at(i, j).abs() > thresh))
    }
}

fn energy_reference(config: &SolverConfig, theta0: &RealField) -> Result<EnergyReference, String> {
    let density = Density::from_perturbation(&config.profile, theta0).map_err(|e| e.to_string())?;
    let levels = LevelGrid::auto(&density, config.boundary_margin).map_err(|e| e.to_string())?;
    let dec = stratification::decompose(&density, &levels).map_err(|e| e.to_string())?;
    let e0 = stratification::potential_energy(&dec).value;
    let g = config.grid;
    let offset = (0..g.n2())
        .map(|j| dec.f_star()[j] - config.profile.rho(g.x2(j)))
        .collect();
    Ok(EnergyReference {
        e0,
        moment0: vertical_moment(theta0),
        offset,
    })
}

fn guard(theta: &SpectralField, k: f64, t: f64) -> Result<(), SolverError> {
    if !theta.is_finite() {
        return Err(SolverError::BlowUp {
            t,
            reason: AbortReason::NonFinite,
        });
    }
    let hk = spectral::sobolev_norm(theta, k)?;
    if !(hk <= BLOW_UP_NORM) {
        return Err(SolverError::BlowUp {
            t,
            reason: AbortReason::NormExceeded { hk_theta: hk },
        });
    }
    Ok(())
}

/// Ticks `0, c, 2c, …` up to `t_end`, always ending at `t_end`.
fn ticks(cadence: f64, t_end: f64) -> Vec<f64> {
    let n = (t_end / cadence * (1.0 + 1e-12)).floor() as usize;
    let mut out: Vec<f64> = (0..=n)
        .map(|i| i as f64 * cadence)
        .filter(|&t| t < t_end)
        .collect();
    if out.last().map_or(true, |&l| t_end - l > 1e-9 * cadence) {
        out.push(t_end);
    } else {
        *out.last_mut().expect("nonempty") = t_end;
    }
    out
}

/// Integrates from `theta0` (dealiased first) to `t_end`, sampling diagnostics
/// and snapshots on their cadences. Blow-up aborts the run; the trajectory up
/// to the last valid state is returned with an aborted outcome.
pub fn run(config: &SolverConfig, theta0: &SpectralField) -> Result<Trajectory, SolverError> {
    config.validate()?;
    config.grid.check_same(theta0.grid())?;
    let k = config.k;
    let theta0 = spectral::dealias(theta0);
    let phys0 = spectral::inverse(&theta0);
    let mut initial = InitialSummary {
        hk_theta: spectral::sobolev_norm(&theta0, k)?,
        l2_theta: theta0.l2_norm(),
        energy: None,
        stratification_error: None,
    };
    let mut state = SimulationState {
        theta: theta0,
        t: 0.0,
        step_count: 0,
    };

    let mut monitor = Monitor {
        config,
        energy: None,
    };
    let precheck = guard(&state.theta, k, 0.0);
    if precheck.is_ok() && config.dynamics == Dynamics::Full {
        match energy_reference(config, &phys0) {
            Ok(r) => {
                initial.energy = Some(r.e0);
                monitor.energy = Some(r);
            }
            Err(e) => {
                log::warn!("initial stratification unavailable: {e}");
                initial.stratification_error = Some(e);
            }
        }
    }
    let mut series = NormSeries::new(k, &monitor.columns());
    let mut snapshots = Vec::new();
    let mut margin_violation = None;

    if let Err(SolverError::BlowUp { t, reason }) = precheck {
        return Ok(Trajectory {
            snapshots: vec![state.clone()],
            series,
            outcome: Outcome::Aborted { t, reason },
            initial,
            margin_violation,
            last_valid: state,
        });
    }
    precheck?;

    let diag_ticks = ticks(config.diagnostic_cadence, config.t_end);
    let snap_ticks = ticks(config.snapshot_cadence, config.t_end);
    let (mut di, mut si) = (0usize, 0usize);
    let outcome = loop {
        if di < diag_ticks.len() && state.t >= diag_ticks[di] {
            let (row, touches) = monitor.row(&state.theta)?;
            series.push(state.t, &row)?;
            if touches && margin_violation.is_none() {
                log::warn!(
                    "perturbation reached the boundary margin at t = {}",
                    state.t
                );
                margin_violation = Some(state.t);
            }
            di += 1;
        }
        if si < snap_ticks.len() && state.t >= snap_ticks[si] {
            snapshots.push(state.clone());
            si += 1;
        }
        if state.t >= config.t_end {
            break Outcome::Completed;
        }
        let next_event = diag_ticks
            .get(di)
            .copied()
            .unwrap_or(config.t_end)
            .min(snap_ticks.get(si).copied().unwrap_or(config.t_end));
        let dt_cfl = cfl_dt(&state.theta, config.cfl_safety, config.dt_max);
        let remaining = next_event - state.t;
        // avoid a sliver step just before an event
        let dt = if dt_cfl >= remaining || remaining - dt_cfl < 1e-9 * remaining.max(1.0) {
            remaining
        } else if remaining < 2.0 * dt_cfl {
            0.5 * remaining
        } else {
            dt_cfl
        };
        let stepped = step_rk4(&state, dt, &config.profile, config.dynamics)
            .and_then(|s| guard(&s.theta, k, s.t).map(|_| s));
        match stepped {
            Ok(mut s) => {
                if dt == remaining {
                    s.t = next_event;
                }
                state = s;
            }
            Err(SolverError::BlowUp { t, reason }) => {
                log::error!("run aborted at t = {t}: {reason}");
                break Outcome::Aborted { t, reason };
            }
            Err(e) => return Err(e),
        }
    };
    if snapshots.last().map_or(true, |s| s.t < state.t) {
        snapshots.push(state.clone());
    }
    Ok(Trajectory {
        snapshots,
        series,
        outcome,
        initial,
        margin_violation,
        last_valid: state,
    })
}
