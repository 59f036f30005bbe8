//! The four scenario kinds.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ipm_core::diagnostics::{self, DecayFit};
use ipm_core::initial::InitialData;
use ipm_core::linear::{self, LinearState, Quantity, SharpnessSpec};
use ipm_core::solver::{self, Dynamics, Outcome, SolverConfig, SolverError};
use ipm_core::spectral::{self, Grid, Snapshot, SpectralField};
use ipm_core::stratification::{self, Density, LevelGrid};
use ipm_core::StratifiedProfile;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{config_error, ScenarioConfig};
use crate::manifest::Check;

/// Relative tolerance between the grid norms and the quadrature oracle.
pub const ORACLE_TOLERANCE: f64 = 0.02;
pub const EXPONENT_TOLERANCE: f64 = 0.05;
pub const ENERGY_BALANCE_TOLERANCE: f64 = 1e-3;
pub const ENDPOINT_DECAY: f64 = 1e-8;
pub const ZERO_AVERAGE: f64 = 1e-10;

pub struct RunContext {
    out: PathBuf,
    pub seed: u64,
    files: Vec<String>,
}

impl RunContext {
    pub fn new(out: &Path, seed: u64) -> Self {
        Self {
            out: out.to_path_buf(),
            seed,
            files: Vec::new(),
        }
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    fn write(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> Result<()> {
        let path = self.out.join(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut w = BufWriter::new(
            File::create(&path).with_context(|| format!("creating {}", path.display()))?,
        );
        body(&mut w)
            .and_then(|_| w.flush())
            .with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            w.write_all(b"\n")
        })
    }
}

#[derive(Debug, Default)]
pub struct RunOutput {
    pub checks: Vec<Check>,
    pub results: serde_json::Value,
    /// Set when the run stopped early; the manifest records it as aborted.
    pub aborted: Option<String>,
}

fn build_initial(cfg: &ScenarioConfig, grid: Grid, seed: u64) -> Result<SpectralField> {
    cfg.initial()?
        .build(grid, seed)
        .map_err(|e| config_error(format!("initial: {e}")))
}

fn build_profile(cfg: &ScenarioConfig, grid: Grid) -> Result<StratifiedProfile> {
    StratifiedProfile::new(grid, cfg.profile.clone())
        .map_err(|e| config_error(format!("profile: {e}")))
}

#[derive(Debug, Serialize)]
struct FitRow {
    quantity: &'static str,
    predicted_exponent: Option<f64>,
    fit: Option<DecayFit>,
    status: &'static str,
    message: Option<String>,
}

fn fit_row(
    quantity: &'static str,
    predicted: Option<f64>,
    times: &[f64],
    values: &[f64],
) -> FitRow {
    let (fit, status, message) = if values.iter().all(|&v| v == 0.0) {
        (None, "identically_zero", None)
    } else {
        let window = (times[0], times[times.len() - 1]);
        match diagnostics::fit_power_law(times, values, window, false) {
            Ok(f) => (Some(f), "fitted", None),
            Err(e) => (None, "failed", Some(e.to_string())),
        }
    };
    FitRow {
        quantity,
        predicted_exponent: predicted,
        fit,
        status,
        message,
    }
}

fn write_fits_csv(w: &mut impl Write, rows: &[FitRow]) -> std::io::Result<()> {
    writeln!(
        w,
        "quantity,predicted_exponent,fitted_exponent,prefactor,r_squared,status"
    )?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.quantity,
            opt(r.predicted_exponent),
            opt(r.fit.as_ref().map(|f| f.exponent)),
            opt(r.fit.as_ref().map(|f| f.prefactor)),
            opt(r.fit.as_ref().map(|f| f.r_squared)),
            r.status
        )?;
    }
    Ok(())
}

/// Exact linear evolution on a log-spaced time grid, compared with the
/// quadrature oracle when the data belong to the slow-decay family.
pub fn linear_decay(cfg: &ScenarioConfig, ctx: &mut RunContext) -> Result<RunOutput> {
    let grid = cfg.grid()?;
    let profile = build_profile(cfg, grid)?;
    if !profile.is_affine() {
        return Err(config_error("linear_decay needs the affine profile"));
    }
    let theta0 = build_initial(cfg, grid, ctx.seed)?;
    let (lo, hi, n) = cfg.log_grid((1.0, 100.0, 21))?;
    let times = linear::log_time_grid(lo, hi, n);
    let oracle = match cfg.initial()? {
        InitialData::Sharpness { k, eps, scale } => Some((
            SharpnessSpec::new(*k, *eps, grid)
                .map_err(|e| config_error(format!("initial: {e}")))?,
            scale * scale,
        )),
        _ => None,
    };

    let start = LinearState {
        theta: theta0,
        t: 0.0,
    };
    let rows = times
        .par_iter()
        .map(|&t| {
            let theta = linear::evolve_exact(&start, t, &profile)?.theta;
            Quantity::ALL
                .iter()
                .map(|&q| {
                    let grid_value = linear::grid_quantity(&theta, q)?;
                    let oracle_value = match &oracle {
                        Some((spec, s2)) => Some(s2 * linear::linear_norm_oracle(spec, t, q)?),
                        None => None,
                    };
                    Ok((t, q, grid_value, oracle_value))
                })
                .collect::<Result<Vec<_>, linear::LinearError>>()
        })
        .collect::<Result<Vec<_>, _>>()?
        .concat();

    ctx.write("linear_series.csv", |w| {
        writeln!(w, "t,quantity,grid_value,oracle_value,relative_gap")?;
        for &(t, q, g, o) in &rows {
            match o {
                Some(o) => writeln!(w, "{t:e},{},{g:e},{o:e},{:e}", q.name(), (g - o).abs() / o)?,
                None => writeln!(w, "{t:e},{},{g:e},,", q.name())?,
            }
        }
        Ok(())
    })?;

    let fits: Vec<FitRow> = Quantity::ALL
        .iter()
        .map(|&q| {
            let values: Vec<f64> = rows.iter().filter(|r| r.1 == q).map(|r| r.2).collect();
            let predicted = oracle.as_ref().map(|(spec, _)| q.predicted_exponent(spec));
            fit_row(q.name(), predicted, &times, &values)
        })
        .collect();
    ctx.write("fits.csv", |w| write_fits_csv(w, &fits))?;

    let mut checks = Vec::new();
    let mut worst = None;
    if oracle.is_some() {
        let (gap, t, q) = rows
            .iter()
            .filter_map(|&(t, q, g, o)| o.map(|o| ((g - o).abs() / o, t, q)))
            .fold(
                (0.0f64, 0.0, Quantity::L2),
                |a, b| if b.0 > a.0 { b } else { a },
            );
        checks.push(Check::gating(
            "oracle_match",
            gap <= ORACLE_TOLERANCE,
            format!(
                "largest relative gap {gap:.4e} ({} at t = {t:.4}); tolerance {ORACLE_TOLERANCE}",
                q.name()
            ),
        ));
        worst = Some(gap);
    }
    let results = json!({ "fits": fits, "max_oracle_gap": worst, "t_grid": [lo, hi, n] });
    ctx.write_json("report.json", &results)?;
    Ok(RunOutput {
        checks,
        results,
        aborted: None,
    })
}

fn default_sharpness_grid() -> Grid {
    Grid::new(16, 2048, 64.0 * std::f64::consts::PI).expect("valid default grid")
}

/// Oracle decay of the slow-decay family against the explicit lower bound.
pub fn sharpness(cfg: &ScenarioConfig, ctx: &mut RunContext) -> Result<RunOutput> {
    let k = cfg.k()?;
    let eps = cfg.eps()?;
    let grid = match &cfg.grid {
        Some(g) => g.build()?,
        None => default_sharpness_grid(),
    };
    let (lo, hi, n) = cfg.log_grid((1.0, 1000.0, 61))?;
    if lo < 1.0 {
        return Err(config_error(format!(
            "time.t_min = {lo} must be at least 1"
        )));
    }
    let spec = SharpnessSpec::new(k, eps, grid).map_err(|e| config_error(e.to_string()))?;
    let times = linear::log_time_grid(lo, hi, n);
    let c = linear::lower_bound_constant(k)?;
    let exponent = spec.predicted_l2_exponent();
    let values = times
        .par_iter()
        .map(|&t| linear::linear_norm_oracle(&spec, t, Quantity::L2))
        .collect::<Result<Vec<f64>, _>>()?;
    let bounds: Vec<f64> = times.iter().map(|t| c * t.powf(exponent)).collect();

    ctx.write("sharpness.csv", |w| {
        writeln!(w, "t,oracle_l2,lower_bound,ratio")?;
        for ((t, v), b) in times.iter().zip(&values).zip(&bounds) {
            writeln!(w, "{t:e},{v:e},{b:e},{:e}", v / b)?;
        }
        Ok(())
    })?;

    let (min_ratio, at) = values
        .iter()
        .zip(&bounds)
        .zip(&times)
        .map(|((v, b), &t)| (v / b, t))
        .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a });
    let mut checks = vec![Check::gating(
        "lower_bound",
        min_ratio >= 1.0,
        format!("C = {c:.6e}; smallest ratio {min_ratio:.4} at t = {at:.4}"),
    )];

    // fit over t >= 10 when that leaves enough samples
    let late: Vec<usize> = (0..n).filter(|&i| times[i] >= 10.0).collect();
    let idx: Vec<usize> = if late.len() >= diagnostics::MIN_FIT_SAMPLES {
        late
    } else {
        (0..n).collect()
    };
    let ts: Vec<f64> = idx.iter().map(|&i| times[i]).collect();
    let vs: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
    let fit = fit_row(Quantity::L2.name(), Some(exponent), &ts, &vs);
    if let Some(f) = &fit.fit {
        let err = f.exponent - exponent;
        checks.push(Check::advisory(
            "exponent_sandwich",
            err.abs() <= EXPONENT_TOLERANCE,
            format!(
                "fitted {:.4} over [{}, {}] vs {exponent:.4}; tolerance {EXPONENT_TOLERANCE}",
                f.exponent, f.window.0, f.window.1
            ),
        ));
    }
    let results = json!({
        "k": k,
        "eps": eps,
        "lower_bound_constant": c,
        "predicted_exponent": exponent,
        "min_ratio": min_ratio,
        "fit": fit,
    });
    ctx.write_json("report.json", &results)?;
    Ok(RunOutput {
        checks,
        results,
        aborted: None,
    })
}

/// Nonlinear run with diagnostics, snapshots and the decay report.
pub fn simulate(cfg: &ScenarioConfig, ctx: &mut RunContext) -> Result<RunOutput> {
    let grid = cfg.grid()?;
    let profile = build_profile(cfg, grid)?;
    let k = cfg.k()?;
    let t = &cfg.time;
    let t_end = cfg.positive_time("t_end", t.t_end)?;
    let cadence = cfg.positive_time("cadence", t.cadence)?;
    let mut sc = SolverConfig::new(grid, profile, k, t_end, cadence);
    if let Some(v) = t.dt_max {
        sc.dt_max = v;
    }
    if let Some(v) = t.cfl_safety {
        sc.cfl_safety = v;
    }
    if let Some(v) = t.snapshot_cadence {
        sc.snapshot_cadence = v;
    }
    if t.linear_only {
        sc.dynamics = Dynamics::LinearOnly;
    }
    sc.boundary_margin = cfg.margin()?;
    sc.validate().map_err(|e| config_error(e.to_string()))?;
    let theta0 = build_initial(cfg, grid, ctx.seed)?;

    let tr = match solver::run(&sc, &theta0) {
        Ok(tr) => tr,
        Err(SolverError::InvalidConfig(m)) => return Err(config_error(m)),
        Err(e) => return Err(e.into()),
    };

    ctx.write("diagnostics.csv", |w| tr.series.write_csv(w))?;
    let snap = |s: &solver::SimulationState| Snapshot {
        name: "theta".into(),
        time: s.t,
        field: spectral::inverse(&s.theta),
    };
    for (i, s) in tr.snapshots.iter().enumerate() {
        ctx.write(&format!("snapshots/theta_{i:04}.snap"), |w| {
            snap(s).write_to(w)
        })?;
    }
    let aborted = match &tr.outcome {
        Outcome::Completed => None,
        Outcome::Aborted { t, reason } => {
            ctx.write("snapshots/last_valid.snap", |w| {
                snap(&tr.last_valid).write_to(w)
            })?;
            Some(format!("aborted at t = {t}: {reason}"))
        }
    };

    let report = diagnostics::decay_report(&tr.series, k);
    ctx.write("report.csv", |w| diagnostics::write_report_csv(w, &report))?;

    let mut checks = vec![Check::gating(
        "completed",
        aborted.is_none(),
        aborted
            .clone()
            .unwrap_or_else(|| format!("reached t = {}", tr.last_valid.t)),
    )];
    match (&tr.initial.stratification_error, report.energy_balance) {
        (Some(e), _) => checks.push(Check::advisory(
            "energy_reference",
            false,
            format!("initial stratification unavailable: {e}"),
        )),
        (None, Some(r)) if sc.dynamics == Dynamics::Full => checks.push(Check::gating(
            "energy_balance",
            r < ENERGY_BALANCE_TOLERANCE,
            format!("largest dyadic residual {r:.4e}; tolerance {ENERGY_BALANCE_TOLERANCE}"),
        )),
        _ => {}
    }
    for entry in &report.fits {
        if let (Some(pass), Some(fit)) = (entry.pass, &entry.fit) {
            checks.push(Check::gating(
                "energy_decay",
                pass,
                format!(
                    "averaged exponent {:.4} vs predicted {:.4} (must not exceed predicted + 1)",
                    fit.exponent, entry.predicted_exponent
                ),
            ));
        }
    }
    checks.push(Check::advisory(
        "boundary_margin",
        tr.margin_violation.is_none(),
        match tr.margin_violation {
            Some(t) => format!("perturbation reached the margin at t = {t}"),
            None => "perturbation stayed inside the margin".into(),
        },
    ));

    let results = json!({
        "outcome": tr.outcome,
        "initial": tr.initial,
        "margin_violation": tr.margin_violation,
        "steps": tr.last_valid.step_count,
        "decay_report": report,
    });
    ctx.write_json("report.json", &results)?;
    Ok(RunOutput {
        checks,
        results,
        aborted,
    })
}

/// Level-set decomposition, `f*` and the potential energy of `ρ_s + θ`.
pub fn stratify(cfg: &ScenarioConfig, ctx: &mut RunContext) -> Result<RunOutput> {
    let grid = cfg.grid()?;
    let profile = build_profile(cfg, grid)?;
    let margin = cfg.margin()?;
    let theta = spectral::inverse(&build_initial(cfg, grid, ctx.seed)?);
    let rejected =
        |e: stratification::StratificationError| config_error(format!("density rejected: {e}"));
    let f = Density::from_perturbation(&profile, &theta).map_err(rejected)?;
    let levels = LevelGrid::auto(&f, margin).map_err(rejected)?;
    let dec = stratification::decompose(&f, &levels).map_err(rejected)?;
    let gamma = f.monotonicity(&dec.window()).map_err(rejected)?;
    let report = stratification::potential_energy_report(&f, &dec)?;
    let interpolation = match cfg.k {
        Some(_) => Some(stratification::interpolation_ratio(
            &f,
            report.energy_h,
            cfg.k()?,
        )?),
        None => None,
    };

    ctx.write("decomposition.csv", |w| {
        stratification::write_decomposition_csv(w, &dec)
    })?;
    ctx.write("h_block.bin", |w| stratification::write_h_block(w, &dec))?;
    ctx.write("f_star.csv", |w| stratification::write_f_star(w, &dec))?;

    let gap = (report.energy_h - report.energy_direct).abs();
    let limit = (0.02 * report.energy_h).max(1e-6);
    let defect = dec.zero_average_defect();
    let hmax = dec.max_abs_h();
    let checks = vec![
        Check::gating(
            "oracle_agreement",
            gap <= limit,
            format!(
                "energy {:.6e} vs direct {:.6e}; gap {gap:.3e}, limit {limit:.3e}",
                report.energy_h, report.energy_direct
            ),
        ),
        Check::gating(
            "zero_average",
            defect <= ZERO_AVERAGE * hmax,
            format!("largest level average {defect:.3e}; max |h| {hmax:.3e}"),
        ),
        Check::gating(
            "endpoint_decay",
            report.endpoint_ratio <= ENDPOINT_DECAY,
            format!(
                "h at the level-range ends relative to max |h|: {:.3e}",
                report.endpoint_ratio
            ),
        ),
    ];
    let results = json!({
        "potential_energy": report,
        "gamma": gamma,
        "levels": levels.len(),
        "level_range": [levels.s_values()[0], levels.s_values()[levels.len() - 1]],
        "window": dec.window(),
        "max_abs_h": hmax,
        "zero_average_defect": defect,
        "interpolation_ratio": interpolation,
    });
    ctx.write_json("report.json", &results)?;
    Ok(RunOutput {
        checks,
        results,
        aborted: None,
    })
}
