//! Norm time series, time averages, power-law fits and the energy balance.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum DiagnosticsError {
    #[error("series has no column {0}")]
    MissingColumn(&'static str),
    #[error("row has {found} values, expected {expected}")]
    RowLength { expected: usize, found: usize },
    #[error("time {t} does not increase past {last}")]
    NonIncreasingTime { t: f64, last: f64 },
    #[error("column {column} has invalid value {value} at t = {t}")]
    BadValue {
        column: &'static str,
        t: f64,
        value: f64,
    },
    #[error("averaging window [{lo}, {hi}] is not covered by samples in [{first}, {last}]")]
    WindowNotCovered {
        lo: f64,
        hi: f64,
        first: f64,
        last: f64,
    },
    #[error("fit window [{lo}, {hi}] holds {count} samples, need at least {min}")]
    TooFewSamples {
        lo: f64,
        hi: f64,
        count: usize,
        min: usize,
    },
    #[error("fit window must start at t >= 1, got {0}")]
    EarlyWindow(f64),
    #[error("non-positive value {value} at t = {t}")]
    NonPositive { t: f64, value: f64 },
}

type Result<T> = std::result::Result<T, DiagnosticsError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Column {
    L2Theta,
    HkTheta,
    L2U,
    H2U,
    H2U2,
    GradLinfU2,
    EnergyE,
    L2RhoMinusRhostar,
}

impl Column {
    pub const ALL: [Column; 8] = [
        Column::L2Theta,
        Column::HkTheta,
        Column::L2U,
        Column::H2U,
        Column::H2U2,
        Column::GradLinfU2,
        Column::EnergyE,
        Column::L2RhoMinusRhostar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Column::L2Theta => "l2_theta",
            Column::HkTheta => "hk_theta",
            Column::L2U => "l2_u",
            Column::H2U => "h2_u",
            Column::H2U2 => "h2_u2",
            Column::GradLinfU2 => "grad_linf_u2",
            Column::EnergyE => "energy_E",
            Column::L2RhoMinusRhostar => "l2_rho_minus_rhostar",
        }
    }
}

/// Scalar diagnostics sampled at increasing times.
///
/// Norm columns hold norms (not squares). `energy_E` may carry round-off
/// sized negative values once the energy has decayed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormSeries {
    k: f64,
    times: Vec<f64>,
    columns: BTreeMap<Column, Vec<f64>>,
}

impl NormSeries {
    pub fn new(k: f64, columns: &[Column]) -> Self {
        Self {
            k,
            times: Vec::new(),
            columns: columns.iter().map(|&c| (c, Vec::new())).collect(),
        }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column_names(&self) -> Vec<Column> {
        self.columns.keys().copied().collect()
    }

    pub fn column(&self, c: Column) -> Result<&[f64]> {
        self.columns
            .get(&c)
            .map(Vec::as_slice)
            .ok_or(DiagnosticsError::MissingColumn(c.name()))
    }

    pub fn column_mut(&mut self, c: Column) -> Result<&mut Vec<f64>> {
        self.columns
            .get_mut(&c)
            .ok_or(DiagnosticsError::MissingColumn(c.name()))
    }

    /// Appends a row; `values` follow [`NormSeries::column_names`] order.
    pub fn push(&mut self, t: f64, values: &[f64]) -> Result<()> {
        if values.len() != self.columns.len() {
            return Err(DiagnosticsError::RowLength {
                expected: self.columns.len(),
                found: values.len(),
            });
        }
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(DiagnosticsError::NonIncreasingTime { t, last });
            }
        }
        for ((&c, _), &v) in self.columns.iter().zip(values) {
            let ok = v.is_finite() && (v >= 0.0 || c == Column::EnergyE);
            if !ok {
                return Err(DiagnosticsError::BadValue {
                    column: c.name(),
                    t,
                    value: v,
                });
            }
        }
        self.times.push(t);
        for (col, &v) in self.columns.values_mut().zip(values) {
            col.push(v);
        }
        Ok(())
    }

    /// CSV with header `t,<column names>`, one row per sample.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "t")?;
        for c in self.columns.keys() {
            write!(w, ",{}", c.name())?;
        }
        writeln!(w)?;
        for (r, t) in self.times.iter().enumerate() {
            write!(w, "{t:e}")?;
            for col in self.columns.values() {
                write!(w, ",{:e}", col[r])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    let i = times.partition_point(|&s| s < t);
    if i < times.len() && times[i] == t {
        return values[i];
    }
    let (a, b) = (i - 1, i);
    let w = (t - times[a]) / (times[b] - times[a]);
    values[a] * (1.0 - w) + values[b] * w
}

/// Trapezoidal `∫_lo^hi f`, linearly interpolating at window edges.
pub fn integrate(times: &[f64], values: &[f64], lo: f64, hi: f64) -> Result<f64> {
    let (first, last) = match (times.first(), times.last()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => {
            return Err(DiagnosticsError::WindowNotCovered {
                lo,
                hi,
                first: f64::NAN,
                last: f64::NAN,
            })
        }
    };
    if lo < first || hi > last || !(lo <= hi) {
        return Err(DiagnosticsError::WindowNotCovered {
            lo,
            hi,
            first,
            last,
        });
    }
    let mut pts = vec![(lo, interpolate(times, values, lo))];
    pts.extend(
        times
            .iter()
            .zip(values)
            .filter(|(&t, _)| t > lo && t < hi)
            .map(|(&t, &v)| (t, v)),
    );
    pts.push((hi, interpolate(times, values, hi)));
    Ok(pts
        .windows(2)
        .map(|p| 0.5 * (p[1].0 - p[0].0) * (p[0].1 + p[1].1))
        .sum())
}

/// `(2/t) ∫_{t/2}^t f(s) ds`.
pub fn time_average(times: &[f64], values: &[f64], t: f64) -> Result<f64> {
    let inside = times.iter().filter(|&&s| s >= 0.5 * t && s <= t).count();
    if inside < 2 {
        return Err(DiagnosticsError::TooFewSamples {
            lo: 0.5 * t,
            hi: t,
            count: inside,
            min: 2,
        });
    }
    Ok(integrate(times, values, 0.5 * t, t)? / (0.5 * t))
}

/// Replaces each sample at `t` by its time average over `[t/2, t]` where defined.
pub fn averaged_series(times: &[f64], values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let first = times.first().copied().unwrap_or(0.0);
    times
        .iter()
        .filter(|&&t| t > 0.0 && 0.5 * t >= first)
        .filter_map(|&t| time_average(times, values, t).ok().map(|v| (t, v)))
        .unzip()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    pub averaged: bool,
    pub samples: usize,
}

pub const MIN_FIT_SAMPLES: usize = 10;

/// Least squares of `log y` against `log t` over samples in `window`.
pub fn fit_power_law(
    times: &[f64],
    values: &[f64],
    window: (f64, f64),
    averaged: bool,
) -> Result<DecayFit> {
    let (lo, hi) = window;
    if lo < 1.0 {
        return Err(DiagnosticsError::EarlyWindow(lo));
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(&t, _)| t >= lo && t <= hi)
        .map(|(&t, &v)| (t, v))
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(DiagnosticsError::TooFewSamples {
            lo,
            hi,
            count: pts.len(),
            min: MIN_FIT_SAMPLES,
        });
    }
    if let Some(&(t, value)) = pts.iter().find(|p| !(p.1 > 0.0)) {
        return Err(DiagnosticsError::NonPositive { t, value });
    }
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(DecayFit {
        exponent: slope,
        prefactor: intercept.exp(),
        window,
        r_squared,
        averaged,
        samples: pts.len(),
    })
}

/// Default fit window: from `t = 5` to 90% of the last sample time.
pub fn default_window(times: &[f64]) -> (f64, f64) {
    let last = times.last().copied().unwrap_or(0.0);
    (5.0, 0.9 * last)
}

/// Largest relative defect `|ΔE + ∫‖u‖²| / max(∫‖u‖², 1e-14)` over the
/// dyadic subdivisions of the sample index range (every sample is an edge at
/// the finest level).
pub fn energy_balance(series: &NormSeries) -> Result<f64> {
    let e = series.column(Column::EnergyE)?;
    let u = series.column(Column::L2U)?;
    let t = series.times();
    if t.len() < 2 {
        return Ok(0.0);
    }
    let u2: Vec<f64> = u.iter().map(|v| v * v).collect();
    // cumulative trapezoid so any window costs O(1)
    let mut cum = vec![0.0; t.len()];
    for i in 1..t.len() {
        cum[i] = cum[i - 1] + 0.5 * (t[i] - t[i - 1]) * (u2[i] + u2[i - 1]);
    }
    let last = t.len() - 1;
    let mut worst: f64 = 0.0;
    let mut pieces = 1usize;
    loop {
        let edges: Vec<usize> = (0..=pieces)
            .map(|p| (p * last + pieces / 2) / pieces)
            .collect();
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a == b {
                continue;
            }
            let dissipated = cum[b] - cum[a];
            let residual = (e[b] - e[a] + dissipated).abs() / dissipated.max(1e-14);
            worst = worst.max(residual);
        }
        if pieces >= last {
            break;
        }
        pieces = (2 * pieces).min(last);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// `E(t)`.
    Energy,
    /// `‖u‖²_{L²}`.
    VelocityL2Sq,
    /// `‖u‖²_{H²}`.
    VelocityH2Sq,
    /// `t ‖u2‖²_{H²}`.
    WeightedU2H2Sq,
    /// `‖ρ − ρ0*‖²_{L²}`.
    DistanceToStratificationSq,
}

impl Quantity {
    pub const ALL: [Quantity; 5] = [
        Quantity::Energy,
        Quantity::VelocityL2Sq,
        Quantity::VelocityH2Sq,
        Quantity::WeightedU2H2Sq,
        Quantity::DistanceToStratificationSq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Energy => "energy_E",
            Quantity::VelocityL2Sq => "l2_u_sq",
            Quantity::VelocityH2Sq => "h2_u_sq",
            Quantity::WeightedU2H2Sq => "t_h2_u2_sq",
            Quantity::DistanceToStratificationSq => "l2_rho_minus_rhostar_sq",
        }
    }

    pub fn predicted_exponent(self, k: f64) -> f64 {
        match self {
            Quantity::Energy | Quantity::DistanceToStratificationSq => -k,
            Quantity::VelocityL2Sq => -(k + 1.0),
            Quantity::VelocityH2Sq | Quantity::WeightedU2H2Sq => -(k - 1.0),
        }
    }

    fn source(self) -> Column {
        match self {
            Quantity::Energy => Column::EnergyE,
            Quantity::VelocityL2Sq => Column::L2U,
            Quantity::VelocityH2Sq => Column::H2U,
            Quantity::WeightedU2H2Sq => Column::H2U2,
            Quantity::DistanceToStratificationSq => Column::L2RhoMinusRhostar,
        }
    }

    fn values(self, series: &NormSeries) -> Result<Vec<f64>> {
        let col = series.column(self.source())?;
        Ok(match self {
            Quantity::Energy => col.to_vec(),
            Quantity::WeightedU2H2Sq => series
                .times()
                .iter()
                .zip(col)
                .map(|(t, v)| t * v * v)
                .collect(),
            _ => col.iter().map(|v| v * v).collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Fitted,
    IdenticallyZero,
    MissingColumn,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitEntry {
    pub quantity: Quantity,
    pub predicted_exponent: f64,
    pub fit: Option<DecayFit>,
    pub status: FitStatus,
    pub message: Option<String>,
    /// Only the energy exponent is judged: it must lie at or below
    /// `predicted + 1`.
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientIntegral {
    pub total: f64,
    pub final_quarter_growth: f64,
    pub plateau: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub k: f64,
    pub window: (f64, f64),
    pub fits: Vec<FitEntry>,
    pub gradient_integral: Option<GradientIntegral>,
    pub energy_balance: Option<f64>,
}

pub const PLATEAU_GROWTH: f64 = 0.05;

/// Running `∫_0^t ‖∇u2‖_{L^∞}` and its growth over the final quarter of the run.
pub fn gradient_integral(series: &NormSeries) -> Result<GradientIntegral> {
    let g = series.column(Column::GradLinfU2)?;
    let t = series.times();
    let (first, last) = (t[0], t[t.len() - 1]);
    let total = integrate(t, g, first, last)?;
    let tail = integrate(t, g, first + 0.75 * (last - first), last)?;
    let growth = if total > 0.0 { tail / total } else { 0.0 };
    Ok(GradientIntegral {
        total,
        final_quarter_growth: growth,
        plateau: growth < PLATEAU_GROWTH,
    })
}

/// Averaged power-law fits of the decay functionals against their predictions.
pub fn decay_report(series: &NormSeries, k: f64) -> DecayReport {
    let window = default_window(series.times());
    let fits = Quantity::ALL
        .iter()
        .map(|&q| {
            let predicted_exponent = q.predicted_exponent(k);
            let entry = |status, fit, message: Option<String>, pass| FitEntry {
                quantity: q,
                predicted_exponent,
                fit,
                status,
                message,
                pass,
            };
            let values = match q.values(series) {
                Ok(v) => v,
                Err(e) => return entry(FitStatus::MissingColumn, None, Some(e.to_string()), None),
            };
            if values.iter().all(|&v| v == 0.0) {
                return entry(FitStatus::IdenticallyZero, None, None, None);
            }
            let (ts, avg) = averaged_series(series.times(), &values);
            match fit_power_law(&ts, &avg, window, true) {
                Ok(fit) => {
                    let pass =
                        (q == Quantity::Energy).then(|| fit.exponent <= predicted_exponent + 1.0);
                    entry(FitStatus::Fitted, Some(fit), None, pass)
                }
                Err(e) => entry(FitStatus::Failed, None, Some(e.to_string()), None),
            }
        })
        .collect();
    let gradient_integral = if series.len() >= 2 {
        gradient_integral(series).ok()
    } else {
        None
    };
    DecayReport {
        k,
        window,
        fits,
        gradient_integral,
        energy_balance: energy_balance(series).ok(),
    }
}

/// Flat CSV: one row per quantity.
pub fn write_report_csv<W: Write>(mut w: W, report: &DecayReport) -> std::io::Result<()> {
    writeln!(w, "quantity,predicted_exponent,fitted_exponent,prefactor,r_squared,t_lo,t_hi,averaged,status,pass")?;
    for e in &report.fits {
        let (fe, pf, r2, lo, hi, av) = match &e.fit {
            Some(f) => (
                format!("{:e}", f.exponent),
                format!("{:e}", f.prefactor),
                format!("{:e}", f.r_squared),
                format!("{:e}", f.window.0),
                format!("{:e}", f.window.1),
                f.averaged.to_string(),
            ),
            None => Default::default(),
        };
        let status = status_name(e.status);
        let pass = e.pass.map(|p| p.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{:e},{fe},{pf},{r2},{lo},{hi},{av},{status},{pass}",
            e.quantity.name(),
            e.predicted_exponent
        )?;
    }
    Ok(())
}

fn status_name(s: FitStatus) -> &'static str {
    match s {
        FitStatus::Fitted => "fitted",
        FitStatus::IdenticallyZero => "identically_zero",
        FitStatus::MissingColumn => "missing_column",
        FitStatus::Failed => "failed",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn averages_of_closed_forms() {
        let t = linspace(0.0, 10.0, 1001);
        let c: Vec<f64> = t.iter().map(|_| 2.5).collect();
        assert!((time_average(&t, &c, 8.0).unwrap() - 2.5).abs() < 1e-12);
        let lin = t.clone();
        assert!((time_average(&t, &lin, 8.0).unwrap() - 6.0).abs() < 1e-12);
        assert!((time_average(&t, &lin, 7.777).unwrap() - 0.75 * 7.777).abs() < 1e-12);
        let t = linspace(1.0, 10.0, 90001);
        let inv: Vec<f64> = t.iter().map(|s| s.powi(-2)).collect();
        assert!((time_average(&t, &inv, 8.0).unwrap() - 2.0 / 64.0).abs() < 1e-9);
    }

    #[test]
    fn average_outside_samples_is_an_error() {
        let t = linspace(1.0, 10.0, 10);
        let v = t.clone();
        assert!(time_average(&t, &v, 1.5).is_err());
        assert!(time_average(&t, &v, 12.0).is_err());
    }

    #[test]
    fn exact_power_law_fit() {
        let t = linspace(1.0, 100.0, 50);
        let y: Vec<f64> = t.iter().map(|s| 5.0 * s.powi(-3)).collect();
        let f = fit_power_law(&t, &y, (1.0, 100.0), false).unwrap();
        assert!((f.exponent + 3.0).abs() < 1e-10);
        assert!((f.prefactor - 5.0).abs() < 1e-9);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn perturbed_power_law_fit() {
        let t: Vec<f64> = (0..200).map(|i| 10f64.powf(i as f64 / 50.0)).collect();
        let y: Vec<f64> = t
            .iter()
            .map(|s| s.powi(-2) * (1.0 + 0.01 * s.ln().sin()))
            .collect();
        let f = fit_power_law(&t, &y, (1.0, 1e4), false).unwrap();
        assert!((f.exponent + 2.0).abs() < 0.02);
    }

    #[test]
    fn fit_preconditions() {
        let t = linspace(1.0, 20.0, 20);
        let y: Vec<f64> = t.iter().map(|s| 1.0 / s).collect();
        assert!(matches!(
            fit_power_law(&t, &y, (0.5, 20.0), false),
            Err(DiagnosticsError::EarlyWindow(_))
        ));
        assert!(matches!(
            fit_power_law(&t, &y, (1.0, 5.0), false),
            Err(DiagnosticsError::TooFewSamples { .. })
        ));
        let mut z = y.clone();
        z[4] = 0.0;
        assert!(matches!(
            fit_power_law(&t, &z, (1.0, 20.0), false),
            Err(DiagnosticsError::NonPositive { .. })
        ));
    }

    fn exact_energy_series(dt: f64, corrupt: Option<usize>) -> NormSeries {
        // E = e^{-t}/2, ‖u‖² = e^{-t}/2 so that dE/dt = −‖u‖²
        let mut s = NormSeries::new(3.0, &[Column::L2U, Column::EnergyE]);
        let n = (10.0 / dt).round() as usize;
        for i in 0..=n {
            let t = i as f64 * dt;
            let mut e = 0.5 * (-t).exp();
            if corrupt == Some(i) {
                e *= 1.01;
            }
            s.push(t, &[(0.5 * (-t).exp()).sqrt(), e]).unwrap();
        }
        s
    }

    #[test]
    fn energy_balance_is_second_order() {
        let coarse = energy_balance(&exact_energy_series(0.05, None)).unwrap();
        let fine = energy_balance(&exact_energy_series(0.025, None)).unwrap();
        assert!(coarse < 1e-3);
        assert!((coarse / fine - 4.0).abs() < 0.1);
    }

    #[test]
    fn corrupted_sample_is_detected() {
        for i in [1, 37, 100, 151] {
            let r = energy_balance(&exact_energy_series(0.05, Some(i))).unwrap();
            assert!(r > 1e-3, "sample {i}: residual {r}");
        }
    }

    #[test]
    fn zero_series_reports_zero() {
        let mut s = NormSeries::new(3.0, &Column::ALL);
        for i in 0..30 {
            s.push(i as f64, &[0.0; 8]).unwrap();
        }
        assert_eq!(energy_balance(&s).unwrap(), 0.0);
        let r = decay_report(&s, 3.0);
        assert!(r
            .fits
            .iter()
            .all(|f| f.status == FitStatus::IdenticallyZero));
        assert_eq!(r.gradient_integral.unwrap().total, 0.0);
    }

    #[test]
    fn push_validates_rows() {
        let mut s = NormSeries::new(3.0, &[Column::L2Theta, Column::EnergyE]);
        s.push(0.0, &[1.0, 0.5]).unwrap();
        assert!(s.push(0.0, &[1.0, 0.5]).is_err());
        assert!(s.push(1.0, &[1.0]).is_err());
        assert!(s.push(1.0, &[-1.0, 0.5]).is_err());
        assert!(s.push(1.0, &[1.0, f64::NAN]).is_err());
        assert!(s.column(Column::H2U).is_err());
    }

    #[test]
    fn report_fits_exact_decay() {
        let k = 3.0;
        let mut s = NormSeries::new(k, &Column::ALL);
        for i in 1..=400 {
            let t = 0.25 * i as f64;
            let tt = t;
            let e = tt.powf(-k);
            s.push(
                t,
                &[
                    1.0,
                    1.0,
                    tt.powf(-(k + 1.0) / 2.0),
                    tt.powf(-(k - 1.0) / 2.0),
                    tt.powf(-k / 2.0),
                    tt.powf(-2.0),
                    e,
                    tt.powf(-k / 2.0),
                ],
            )
            .unwrap();
        }
        let r = decay_report(&s, k);
        for f in &r.fits {
            let fit = f.fit.expect("fitted");
            assert!(
                (fit.exponent - f.predicted_exponent).abs() < 1e-2,
                "{:?}",
                f
            );
        }
        assert_eq!(r.fits[0].pass, Some(true));
        let g = r.gradient_integral.unwrap();
        assert!(g.plateau, "{g:?}");
    }
}
