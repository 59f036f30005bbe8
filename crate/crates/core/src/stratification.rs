//! Level-set decomposition of a stably stratified density, the measure-preserving
//! stratification `f*`, and the potential energy.
//!
//! A density is stored as `f(x1, x2) = slope · x2 + p(x1, x2)` with `p` periodic
//! on the grid, so every column has an exact trigonometric interpolant.
//! Level curves `x2 = φ(x1, s)` solve `f(x1, φ) = s`; their horizontal mean is
//! `φ0(s)`, the fluctuation is `h = φ − φ0`, and `f*` is the inverse of `φ0`.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::profile::StratifiedProfile;
use crate::spectral::{self, fft1, Complex64, Grid, RealField, SpectralError};

#[derive(Debug, thiserror::Error)]
pub enum StratificationError {
    #[error(
        "density is not strictly decreasing in x2: d2 f = {slope:e} at (x1, x2) = ({x1}, {x2})"
    )]
    NonMonotone { x1: f64, x2: f64, slope: f64 },
    #[error("level {s} outside the admissible range [{lo}, {hi}]")]
    LevelOutOfRange { s: f64, lo: f64, hi: f64 },
    #[error("empty level range: s_min = {lo} >= s_max = {hi}")]
    EmptyLevelRange { lo: f64, hi: f64 },
    #[error("margin fraction {0} must lie in [0, 0.5)")]
    BadMargin(f64),
    #[error("level grid needs at least two strictly increasing values")]
    BadLevels,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

type Result<T> = std::result::Result<T, StratificationError>;

/// Vertical interval `[lo, hi]` used for analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    /// `|x2| ≤ L(1 − margin)`.
    pub fn interior(grid: &Grid, margin: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&margin) {
            return Err(StratificationError::BadMargin(margin));
        }
        let h = grid.half_height() * (1.0 - margin);
        Ok(Self { lo: -h, hi: h })
    }

    pub fn contains(&self, x2: f64) -> bool {
        self.lo <= x2 && x2 <= self.hi
    }

    pub fn height(&self) -> f64 {
        self.hi - self.lo
    }

    /// Area of `𝕋 × [lo, hi]`.
    pub fn area(&self) -> f64 {
        2.0 * PI * self.height()
    }
}

/// `f(x1, x2) = slope · x2 + periodic(x1, x2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    slope: f64,
    periodic: RealField,
}

impl Density {
    pub fn new(slope: f64, periodic: RealField) -> Self {
        Self { slope, periodic }
    }

    /// Splits full samples `f` into `slope · x2` plus a periodic remainder.
    pub fn from_total(f: &RealField, slope: f64) -> Self {
        let g = *f.grid();
        let values = f
            .values()
            .iter()
            .enumerate()
            .map(|(idx, v)| v - slope * g.x2(idx / g.n1()))
            .collect();
        Self {
            slope,
            periodic: RealField::new(g, values).expect("finite samples"),
        }
    }

    /// `ρ = ρ_s + θ`.
    pub fn from_perturbation(profile: &StratifiedProfile, theta: &RealField) -> Result<Self> {
        let g = *theta.grid();
        g.check_same(profile.grid())?;
        let values = theta
            .values()
            .iter()
            .enumerate()
            .map(|(idx, v)| v + profile.periodic_part(g.x2(idx / g.n1())))
            .collect();
        Ok(Self {
            slope: -1.0,
            periodic: RealField::new(g, values)?,
        })
    }

    /// `f(x1, x2) = slope · x2 + q(x2)` from samples of `q` on the vertical grid.
    pub fn stratified(grid: Grid, slope: f64, q: &[f64]) -> Self {
        let periodic = RealField::from_fn(grid, |_, _| 0.0);
        let mut values = periodic.into_values();
        for j in 0..grid.n2() {
            for i in 0..grid.n1() {
                values[grid.index(i, j)] = q[j];
            }
        }
        Self {
            slope,
            periodic: RealField::new(grid, values).expect("finite samples"),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.periodic.grid()
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn periodic(&self) -> &RealField {
        &self.periodic
    }

    /// Full samples including the affine part.
    pub fn total(&self) -> RealField {
        let g = *self.grid();
        let values = self
            .periodic
            .values()
            .iter()
            .enumerate()
            .map(|(idx, v)| v + self.slope * g.x2(idx / g.n1()))
            .collect();
        RealField::new(g, values).expect("finite samples")
    }

    fn column_interp(&self, i: usize) -> ColumnInterp {
        ColumnInterp::new(self.slope, self.grid(), &self.periodic.column(i))
    }

    fn columns(&self) -> Vec<ColumnInterp> {
        (0..self.grid().n1())
            .into_par_iter()
            .map(|i| self.column_interp(i))
            .collect()
    }

    /// Checks `∂2 f < 0` at every node inside `window`; returns `−max ∂2 f`.
    pub fn monotonicity(&self, window: &Window) -> Result<f64> {
        let g = *self.grid();
        let d2 = spectral::inverse(&spectral::d2(&spectral::forward(&self.periodic)));
        let mut worst = (f64::NEG_INFINITY, 0, 0);
        for j in (0..g.n2()).filter(|&j| window.contains(g.x2(j))) {
            for i in 0..g.n1() {
                let d = self.slope + d2.at(i, j);
                if d > worst.0 {
                    worst = (d, i, j);
                }
            }
        }
        let (d, i, j) = worst;
        if !(d < 0.0) {
            return Err(StratificationError::NonMonotone {
                x1: g.x1(i),
                x2: g.x2(j),
                slope: d,
            });
        }
        Ok(-d)
    }
}

/// Trigonometric interpolant of one column plus its affine part.
#[derive(Debug, Clone)]
struct ColumnInterp {
    slope: f64,
    half_height: f64,
    omega: f64,
    samples: Vec<f64>,
    x0: f64,
    dx: f64,
    // cos/sin amplitudes for m = 0..=n2/2, phase measured from x2 = −L
    a: Vec<f64>,
    b: Vec<f64>,
}

impl ColumnInterp {
    fn new(slope: f64, grid: &Grid, periodic: &[f64]) -> Self {
        let n = periodic.len();
        let mut buf: Vec<Complex64> = periodic.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft1(&mut buf, false);
        let half = n / 2;
        let mut a = vec![0.0; half + 1];
        let mut b = vec![0.0; half + 1];
        a[0] = buf[0].re / n as f64;
        for m in 1..half {
            a[m] = 2.0 * buf[m].re / n as f64;
            b[m] = -2.0 * buf[m].im / n as f64;
        }
        a[half] = buf[half].re / n as f64;
        let samples = periodic
            .iter()
            .enumerate()
            .map(|(j, p)| p + slope * grid.x2(j))
            .collect();
        Self {
            slope,
            half_height: grid.half_height(),
            omega: PI / grid.half_height(),
            samples,
            x0: grid.x2(0),
            dx: grid.dx2(),
            a,
            b,
        }
    }

    /// `(f, ∂2 f)` at `x2`.
    fn eval(&self, x2: f64) -> (f64, f64) {
        let theta = self.omega * (x2 + self.half_height);
        let step = Complex64::new(theta.cos(), theta.sin());
        let mut z = Complex64::new(1.0, 0.0);
        let mut v = self.a[0];
        let mut d = 0.0;
        for m in 1..self.a.len() {
            z *= step;
            let k = m as f64 * self.omega;
            v += self.a[m] * z.re + self.b[m] * z.im;
            d += k * (self.b[m] * z.re - self.a[m] * z.im);
        }
        (self.slope * x2 + v, self.slope + d)
    }

    /// `∫_lo^hi f(x2) x2 dx2`, exact for the interpolant.
    fn moment(&self, lo: f64, hi: f64) -> f64 {
        let affine =
            self.slope * (hi.powi(3) - lo.powi(3)) / 3.0 + self.a[0] * (hi * hi - lo * lo) / 2.0;
        affine + self.oscillatory_moment(hi) - self.oscillatory_moment(lo)
    }

    fn oscillatory_moment(&self, x: f64) -> f64 {
        let theta = self.omega * (x + self.half_height);
        let step = Complex64::new(theta.cos(), theta.sin());
        let mut z = Complex64::new(1.0, 0.0);
        let mut total = 0.0;
        for m in 1..self.a.len() {
            z *= step;
            let k = m as f64 * self.omega;
            let (c, s) = (z.re, z.im);
            total += self.a[m] * (c / (k * k) + x * s / k) + self.b[m] * (s / (k * k) - x * c / k);
        }
        total
    }

    fn node(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.dx
    }

    /// Solves `f(x2) = s` with `x2` in `window`.
    fn solve(&self, s: f64, window: &Window) -> Result<f64> {
        let n = self.samples.len();
        let j_lo = (0..n).find(|&j| self.node(j) > window.lo).unwrap_or(n);
        let j_hi = (0..n)
            .rev()
            .find(|&j| self.node(j) < window.hi)
            .map_or(0, |j| j + 1);
        // bracket points: the window edges and the nodes strictly between them
        let count = j_hi.saturating_sub(j_lo) + 2;
        let point = |q: usize| {
            if q == 0 {
                (window.lo, None)
            } else if q + 1 == count {
                (window.hi, None)
            } else {
                let j = j_lo + q - 1;
                (self.node(j), Some(self.samples[j]))
            }
        };
        let value = |q: usize| match point(q) {
            (_, Some(v)) => v,
            (x, None) => self.eval(x).0,
        };
        let (top, bottom) = (value(count - 1), value(0));
        if !(s >= top && s <= bottom) {
            return Err(StratificationError::LevelOutOfRange {
                s,
                lo: top,
                hi: bottom,
            });
        }
        let (mut lo, mut hi) = (0, count - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if value(mid) >= s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (xa, xb) = (point(lo).0, point(hi).0);
        let (fa, da) = self.eval(xa);
        let (fb, db) = self.eval(xb);
        if fa == s {
            return Ok(xa);
        }
        if fb == s {
            return Ok(xb);
        }
        // coarse root of the local cubic Hermite interpolant
        let h = xb - xa;
        let cubic = |x: f64| {
            let t = (x - xa) / h;
            let (t2, t3) = (t * t, t * t * t);
            (2.0 * t3 - 3.0 * t2 + 1.0) * fa
                + (t3 - 2.0 * t2 + t) * h * da
                + (-2.0 * t3 + 3.0 * t2) * fb
                + (t3 - t2) * h * db
        };
        let (mut lo_x, mut hi_x) = (xa, xb);
        while hi_x - lo_x > 1e-6 * h.max(1.0) {
            let mid = 0.5 * (lo_x + hi_x);
            if cubic(mid) >= s {
                lo_x = mid;
            } else {
                hi_x = mid;
            }
        }
        let mut x = 0.5 * (lo_x + hi_x);
        for _ in 0..5 {
            let (fx, dx) = self.eval(x);
            let r = fx - s;
            if r.abs() < 1e-13 * (1.0 + s.abs()) {
                return Ok(x);
            }
            let next = x - r / dx;
            if !(next > xa && next < xb) || !dx.is_finite() || dx >= 0.0 {
                break;
            }
            x = next;
        }
        // fallback: bisection on the interpolant itself
        let (mut lo_x, mut hi_x) = (xa, xb);
        for _ in 0..200 {
            let mid = 0.5 * (lo_x + hi_x);
            if mid <= lo_x || mid >= hi_x {
                break;
            }
            if self.eval(mid).0 >= s {
                lo_x = mid;
            } else {
                hi_x = mid;
            }
        }
        Ok(0.5 * (lo_x + hi_x))
    }
}

fn full_window(grid: &Grid) -> Window {
    Window {
        lo: grid.x2(0),
        hi: grid.x2(grid.n2() - 1),
    }
}

/// Height `φ` of the level curve `f(x1_i, φ) = s` on column `x1_index`.
pub fn level_curve(f: &Density, s: f64, x1_index: usize) -> Result<f64> {
    let window = full_window(f.grid());
    f.monotonicity(&window)?;
    f.column_interp(x1_index).solve(s, &window)
}

/// Increasing density values `s` whose level curves stay inside a window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelGrid {
    s_values: Vec<f64>,
    margin: f64,
}

impl LevelGrid {
    pub fn new(s_values: Vec<f64>, margin: f64) -> Result<Self> {
        if s_values.len() < 2 || s_values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(StratificationError::BadLevels);
        }
        if !(0.0..0.5).contains(&margin) {
            return Err(StratificationError::BadMargin(margin));
        }
        Ok(Self { s_values, margin })
    }

    /// `2 · n2` uniform levels spanning every value attained on the whole
    /// window `|x2| ≤ L(1 − margin)` in every column.
    pub fn auto(f: &Density, margin: f64) -> Result<Self> {
        let g = *f.grid();
        let window = Window::interior(&g, margin)?;
        f.monotonicity(&window)?;
        let cols = f.columns();
        let mut s_max = f64::INFINITY;
        let mut s_min = f64::NEG_INFINITY;
        for c in &cols {
            s_max = s_max.min(c.eval(window.lo).0);
            s_min = s_min.max(c.eval(window.hi).0);
        }
        if !(s_min < s_max) {
            return Err(StratificationError::EmptyLevelRange {
                lo: s_min,
                hi: s_max,
            });
        }
        Self::uniform(s_min, s_max, 2 * g.n2(), margin)
    }

    pub fn uniform(s_min: f64, s_max: f64, count: usize, margin: f64) -> Result<Self> {
        if count < 2 || !(s_min < s_max) {
            return Err(StratificationError::BadLevels);
        }
        let ds = (s_max - s_min) / (count - 1) as f64;
        let mut s: Vec<f64> = (0..count).map(|l| s_min + l as f64 * ds).collect();
        s[count - 1] = s_max;
        Self::new(s, margin)
    }

    pub fn s_values(&self) -> &[f64] {
        &self.s_values
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn len(&self) -> usize {
        self.s_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_values.is_empty()
    }
}

/// `φ`, `φ0`, `h` on (levels × x1 grid) and the stratification `f*`.
#[derive(Debug, Clone)]
pub struct LevelSetDecomposition {
    grid: Grid,
    slope: f64,
    window: Window,
    levels: Vec<f64>,
    phi: Vec<f64>,
    phi0: Vec<f64>,
    dphi0: Vec<f64>,
    h: Vec<f64>,
    mean_column: ColumnInterp,
    f_star: Vec<f64>,
}

impl LevelSetDecomposition {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn phi(&self, level: usize, i: usize) -> f64 {
        self.phi[level * self.grid.n1() + i]
    }

    pub fn h(&self, level: usize, i: usize) -> f64 {
        self.h[level * self.grid.n1() + i]
    }

    /// Row of `h` at one level.
    pub fn h_row(&self, level: usize) -> &[f64] {
        let n1 = self.grid.n1();
        &self.h[level * n1..(level + 1) * n1]
    }

    pub fn phi0(&self) -> &[f64] {
        &self.phi0
    }

    /// `dφ0/ds`, the horizontal mean of `1/∂2 f` along each level curve.
    pub fn dphi0(&self) -> &[f64] {
        &self.dphi0
    }

    pub fn max_abs_h(&self) -> f64 {
        self.h.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `f*` on the vertical collocation points.
    pub fn f_star(&self) -> &[f64] {
        &self.f_star
    }

    /// `f*` as a density depending on `x2` only.
    pub fn f_star_density(&self) -> Density {
        let q: Vec<f64> = (0..self.grid.n2())
            .map(|j| self.f_star[j] - self.slope * self.grid.x2(j))
            .collect();
        Density::stratified(self.grid, self.slope, &q)
    }

    /// `f*(x2)`: inverse of `φ0` where the levels reach, horizontal mean of `f`
    /// elsewhere.
    pub fn f_star_at(&self, x2: f64) -> f64 {
        let n = self.levels.len();
        let (top, bottom) = (self.phi0[n - 1], self.phi0[0]);
        if x2 < top || x2 > bottom {
            return self.mean_column.eval(x2).0;
        }
        // φ0 decreases with the level index
        let (mut lo, mut hi) = (0, n - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.phi0[mid] >= x2 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (sa, sb) = (self.levels[lo], self.levels[hi]);
        let (pa, pb) = (self.phi0[lo], self.phi0[hi]);
        if pa == x2 {
            return sa;
        }
        if pb == x2 {
            return sb;
        }
        let ds = sb - sa;
        let (da, db) = limited_slopes(pa, pb, ds, self.dphi0[lo], self.dphi0[hi]);
        let cubic = |s: f64| {
            let t = (s - sa) / ds;
            let (t2, t3) = (t * t, t * t * t);
            (2.0 * t3 - 3.0 * t2 + 1.0) * pa
                + (t3 - 2.0 * t2 + t) * ds * da
                + (-2.0 * t3 + 3.0 * t2) * pb
                + (t3 - t2) * ds * db
        };
        let (mut lo_s, mut hi_s) = (sa, sb);
        for _ in 0..200 {
            let mid = 0.5 * (lo_s + hi_s);
            if mid <= lo_s || mid >= hi_s {
                break;
            }
            if cubic(mid) >= x2 {
                lo_s = mid;
            } else {
                hi_s = mid;
            }
        }
        0.5 * (lo_s + hi_s)
    }

    /// Largest `|∫ h(·, s) dx1|` over the levels.
    pub fn zero_average_defect(&self) -> f64 {
        (0..self.levels.len())
            .map(|l| {
                let row = self.h_row(l);
                (2.0 * PI * row.iter().sum::<f64>() / row.len() as f64).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Fritsch–Carlson limiting so the Hermite cubic on one interval stays monotone.
fn limited_slopes(pa: f64, pb: f64, ds: f64, da: f64, db: f64) -> (f64, f64) {
    let delta = (pb - pa) / ds;
    if delta == 0.0 {
        return (0.0, 0.0);
    }
    let mut alpha = (da / delta).max(0.0);
    let mut beta = (db / delta).max(0.0);
    let r = alpha.hypot(beta);
    if r > 3.0 {
        alpha *= 3.0 / r;
        beta *= 3.0 / r;
    }
    (alpha * delta, beta * delta)
}

/// Level curves, their horizontal mean and fluctuation, and `f*`.
pub fn decompose(f: &Density, levels: &LevelGrid) -> Result<LevelSetDecomposition> {
    let g = *f.grid();
    let window = Window::interior(&g, levels.margin())?;
    f.monotonicity(&window)?;
    let cols = f.columns();
    let s = levels.s_values();
    let n1 = g.n1();
    let per_column: Vec<Vec<(f64, f64)>> = cols
        .par_iter()
        .map(|c| {
            s.iter()
                .map(|&sv| {
                    let phi = c.solve(sv, &window)?;
                    Ok((phi, 1.0 / c.eval(phi).1))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let n_levels = s.len();
    let mut phi = vec![0.0; n_levels * n1];
    let mut phi0 = vec![0.0; n_levels];
    let mut dphi0 = vec![0.0; n_levels];
    let mut h = vec![0.0; n_levels * n1];
    for l in 0..n_levels {
        let anchor = per_column[0][l].0;
        let mut dev = 0.0;
        let mut inv = 0.0;
        for i in 0..n1 {
            let (p, d) = per_column[i][l];
            phi[l * n1 + i] = p;
            dev += p - anchor;
            inv += d;
        }
        phi0[l] = anchor + dev / n1 as f64;
        dphi0[l] = inv / n1 as f64;
        for i in 0..n1 {
            h[l * n1 + i] = phi[l * n1 + i] - phi0[l];
        }
    }

    let mean_periodic: Vec<f64> = (0..g.n2())
        .map(|j| (0..n1).map(|i| f.periodic().at(i, j)).sum::<f64>() / n1 as f64)
        .collect();
    let mean_column = ColumnInterp::new(f.slope(), &g, &mean_periodic);

    let mut dec = LevelSetDecomposition {
        grid: g,
        slope: f.slope(),
        window,
        levels: s.to_vec(),
        phi,
        phi0,
        dphi0,
        h,
        mean_column,
        f_star: Vec::new(),
    };
    let already_stratified =
        (0..g.n2()).all(|j| (1..n1).all(|i| f.periodic().at(i, j) == f.periodic().at(0, j)));
    dec.f_star = if already_stratified {
        (0..g.n2())
            .map(|j| f.slope() * g.x2(j) + f.periodic().at(0, j))
            .collect()
    } else {
        (0..g.n2()).map(|j| dec.f_star_at(g.x2(j))).collect()
    };
    Ok(dec)
}

/// `½ ∫∫ h² dx1 ds` with the endpoint decay measure `max|h(endpoints)| / max|h|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialEnergy {
    pub value: f64,
    pub endpoint_ratio: f64,
}

pub fn potential_energy(dec: &LevelSetDecomposition) -> PotentialEnergy {
    let rows: Vec<f64> = (0..dec.levels.len())
        .map(|l| {
            let row = dec.h_row(l);
            2.0 * PI * row.iter().map(|v| v * v).sum::<f64>() / row.len() as f64
        })
        .collect();
    let value = 0.5 * trapezoid(&dec.levels, &rows);
    let hmax = dec.max_abs_h();
    let last = dec.levels.len() - 1;
    let edge = dec
        .h_row(0)
        .iter()
        .chain(dec.h_row(last))
        .fold(0.0, |m: f64, v| m.max(v.abs()));
    let endpoint_ratio = if hmax > 0.0 { edge / hmax } else { 0.0 };
    if endpoint_ratio > 1e-8 {
        log::warn!("h has not decayed at the level-range endpoints: ratio {endpoint_ratio:e}");
    }
    PotentialEnergy {
        value,
        endpoint_ratio,
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Largest symmetric cutoff `s` with both `±s` inside the level range.
pub fn max_cutoff(dec: &LevelSetDecomposition) -> f64 {
    let s = &dec.levels;
    s[s.len() - 1].min(-s[0])
}

/// `E_s(f) − E_s(f*)` with `E_s(g) = ∫_{−s<g<s} g x2 dx`, each column integrated
/// exactly between its level-curve heights.
pub fn potential_energy_direct(
    f: &Density,
    dec: &LevelSetDecomposition,
    s_cut: f64,
) -> Result<f64> {
    let lo = dec.levels[0];
    let hi = dec.levels[dec.levels.len() - 1];
    if !(s_cut > 0.0 && -s_cut >= lo && s_cut <= hi) {
        return Err(StratificationError::LevelOutOfRange { s: s_cut, lo, hi });
    }
    let window = dec.window;
    let columns_of = |d: &Density| -> Result<f64> {
        let cols = d.columns();
        let moments = cols
            .par_iter()
            .map(|c| {
                let top = c.solve(s_cut, &window)?;
                let bottom = c.solve(-s_cut, &window)?;
                Ok(c.moment(top, bottom))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(2.0 * PI * moments.iter().sum::<f64>() / moments.len() as f64)
    };
    let e_f = columns_of(f)?;
    let star = dec.f_star_density();
    let c = star.column_interp(0);
    let wide = full_window(&dec.grid);
    let e_star = 2.0 * PI * c.moment(c.solve(s_cut, &wide)?, c.solve(-s_cut, &wide)?);
    Ok(e_f - e_star)
}

/// `‖f − f*‖_{L²}` over the decomposition window.
pub fn l2_gap(f: &Density, dec: &LevelSetDecomposition) -> f64 {
    let g = dec.grid;
    let mut sum = 0.0;
    for j in (0..g.n2()).filter(|&j| dec.window.contains(g.x2(j))) {
        let star = dec.f_star[j] - dec.slope * g.x2(j);
        for i in 0..g.n1() {
            let d = f.periodic().at(i, j) - star;
            sum += d * d;
        }
    }
    (sum * g.dx1() * g.dx2()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialEnergyReport {
    /// `½‖h‖²`.
    pub energy_h: f64,
    /// `E_s(f) − E_s(f*)` at the largest admissible cutoff.
    pub energy_direct: f64,
    pub s_cut: f64,
    /// `‖f − f*‖_{L²}` over the analysis window.
    pub l2_gap: f64,
    pub ratio_lower: f64,
    pub ratio_upper: f64,
    pub endpoint_ratio: f64,
}

pub fn potential_energy_report(
    f: &Density,
    dec: &LevelSetDecomposition,
) -> Result<PotentialEnergyReport> {
    let pe = potential_energy(dec);
    let s_cut = max_cutoff(dec);
    let energy_direct = potential_energy_direct(f, dec, s_cut)?;
    let gap = l2_gap(f, dec);
    let (ratio_lower, ratio_upper) = if gap > 0.0 {
        let g2 = gap * gap;
        (
            pe.value.min(energy_direct) / g2,
            pe.value.max(energy_direct) / g2,
        )
    } else {
        (0.0, 0.0)
    };
    Ok(PotentialEnergyReport {
        energy_h: pe.value,
        energy_direct,
        s_cut,
        l2_gap: gap,
        ratio_lower,
        ratio_upper,
        endpoint_ratio: pe.endpoint_ratio,
    })
}

/// Area of `{x ∈ 𝕋 × window : f(x) > s}`, crossings located by linear
/// interpolation between vertical samples.
pub fn distribution_measure(f: &Density, s: f64, window: &Window) -> f64 {
    let g = *f.grid();
    let total = f.total();
    let mut area = 0.0;
    for i in 0..g.n1() {
        let col: Vec<f64> = total.column(i);
        let value_at = |x2: f64| {
            let t = (x2 - g.x2(0)) / g.dx2();
            let j = (t.floor() as usize).min(g.n2() - 2);
            let w = t - j as f64;
            col[j] * (1.0 - w) + col[j + 1] * w
        };
        let (flo, fhi) = (value_at(window.lo), value_at(window.hi));
        let len = if s < fhi {
            window.height()
        } else if s >= flo {
            0.0
        } else {
            // crossing cell within the window; samples decrease upward
            let mut x = window.lo;
            let mut fx = flo;
            let mut j = ((window.lo - g.x2(0)) / g.dx2()).floor() as usize + 1;
            loop {
                let (xn, fnext) = if j < g.n2() && g.x2(j) < window.hi {
                    (g.x2(j), col[j])
                } else {
                    (window.hi, fhi)
                };
                if fnext <= s {
                    break x + (fx - s) / (fx - fnext) * (xn - x) - window.lo;
                }
                x = xn;
                fx = fnext;
                j += 1;
            }
        };
        area += len;
    }
    area * g.dx1()
}

/// `‖f* − f_n*‖_{L²}` over the common interior window.
pub fn stratification_stability(f: &Density, f_n: &Density, margin: f64) -> Result<f64> {
    let g = *f.grid();
    g.check_same(f_n.grid())?;
    let a = decompose(f, &LevelGrid::auto(f, margin)?)?;
    let b = decompose(f_n, &LevelGrid::auto(f_n, margin)?)?;
    let window = Window::interior(&g, margin)?;
    let sum: f64 = (0..g.n2())
        .filter(|&j| window.contains(g.x2(j)))
        .map(|j| (a.f_star[j] - b.f_star[j]).powi(2))
        .sum();
    Ok((2.0 * PI * g.dx2() * sum).sqrt())
}

/// `𝓔 / (‖v‖^{2(k−1)/k} ‖v‖^{2/k}_{H^k})` with `v = ∇⊥(−Δ)⁻¹∂1 f`.
pub fn interpolation_ratio(f: &Density, energy: f64, k: f64) -> Result<f64> {
    let (v1, v2) = spectral::velocity(&spectral::forward(f.periodic()));
    let l2 = v1.l2_norm().hypot(v2.l2_norm());
    let hk = spectral::sobolev_norm(&v1, k)?.hypot(spectral::sobolev_norm(&v2, k)?);
    let denom = l2.powf(2.0 * (k - 1.0) / k) * hk.powf(2.0 / k);
    Ok(if denom > 0.0 { energy / denom } else { 0.0 })
}

/// Writes `s,phi0,h_rms,h_max` per level.
pub fn write_decomposition_csv<W: Write>(
    mut w: W,
    dec: &LevelSetDecomposition,
) -> std::io::Result<()> {
    writeln!(w, "s,phi0,h_rms,h_max")?;
    for (l, s) in dec.levels.iter().enumerate() {
        let row = dec.h_row(l);
        let rms = (row.iter().map(|v| v * v).sum::<f64>() / row.len() as f64).sqrt();
        let max = row.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        writeln!(w, "{:e},{:e},{:e},{:e}", s, dec.phi0[l], rms, max)?;
    }
    Ok(())
}

pub const H_BLOCK_MAGIC: &[u8; 8] = b"IPMHBLK1";

/// Full `h`: magic, `u32` level count, `u32` n1, level values, then `h`
/// level-major, all little-endian.
pub fn write_h_block<W: Write>(mut w: W, dec: &LevelSetDecomposition) -> std::io::Result<()> {
    w.write_all(H_BLOCK_MAGIC)?;
    w.write_all(&(dec.levels.len() as u32).to_le_bytes())?;
    w.write_all(&(dec.grid.n1() as u32).to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * (dec.levels.len() + dec.h.len()));
    for v in dec.levels.iter().chain(&dec.h) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)
}

/// Writes `x2,f_star` on the vertical grid.
pub fn write_f_star<W: Write>(mut w: W, dec: &LevelSetDecomposition) -> std::io::Result<()> {
    writeln!(w, "x2,f_star")?;
    for (j, v) in dec.f_star.iter().enumerate() {
        writeln!(w, "{:e},{:e}", dec.grid.x2(j), v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(32, 128, 2.0 * PI).unwrap()
    }

    fn bump(a: f64) -> impl Fn(f64, f64) -> f64 {
        move |x1, x2| a * x1.sin() * (-x2 * x2).exp()
    }

    #[test]
    fn affine_level_curve_is_exact() {
        let f = Density::new(-1.0, RealField::zeros(grid()));
        let phi = level_curve(&f, 0.3, 5).unwrap();
        assert!((phi + 0.3).abs() < 1e-13);
    }

    #[test]
    fn shifted_column_level_curve() {
        let g = grid();
        let f = Density::new(-1.0, RealField::from_fn(g, |x1, _| 0.1 * x1.sin()));
        // x1 = π/2 is index n1/4
        let phi = level_curve(&f, 0.0, g.n1() / 4).unwrap();
        assert!((phi - 0.1).abs() < 1e-13);
    }

    #[test]
    fn residual_is_below_tolerance() {
        let g = grid();
        let f = Density::new(-1.0, RealField::from_fn(g, bump(0.1)));
        for i in [0, 3, 8, 17, 30] {
            let c = f.column_interp(i);
            for s in [-2.0, -0.71, 0.0, 0.05, 1.3, 4.0] {
                let phi = level_curve(&f, s, i).unwrap();
                assert!((c.eval(phi).0 - s).abs() < 1e-12, "column {i}, level {s}");
            }
        }
    }

    #[test]
    fn out_of_range_and_non_monotone() {
        let g = grid();
        let f = Density::new(-1.0, RealField::zeros(g));
        assert!(matches!(
            level_curve(&f, 100.0, 0),
            Err(StratificationError::LevelOutOfRange { .. })
        ));
        let bad = Density::new(-1.0, RealField::from_fn(g, |_, x2| 2.0 * x2.sin()));
        assert!(matches!(
            level_curve(&bad, 0.0, 0),
            Err(StratificationError::NonMonotone { .. })
        ));
    }

    #[test]
    fn affine_decomposition_is_trivial() {
        let f = Density::new(-1.0, RealField::zeros(grid()));
        let levels = LevelGrid::auto(&f, 0.1).unwrap();
        assert_eq!(levels.len(), 256);
        let dec = decompose(&f, &levels).unwrap();
        assert_eq!(dec.max_abs_h(), 0.0);
        for (l, s) in levels.s_values().iter().enumerate() {
            assert!((dec.phi0()[l] + s).abs() < 1e-13);
        }
        let g = *f.grid();
        for j in 0..g.n2() {
            assert!((dec.f_star()[j] + g.x2(j)).abs() < 1e-12);
        }
        assert_eq!(potential_energy(&dec).value, 0.0);
        let direct = potential_energy_direct(&f, &dec, max_cutoff(&dec)).unwrap();
        assert!(direct.abs() < 1e-10);
    }

    #[test]
    fn horizontal_shift_gives_sine_fluctuation() {
        let g = grid();
        let a = 0.1;
        let f = Density::new(-1.0, RealField::from_fn(g, |x1, _| a * x1.sin()));
        let dec = decompose(&f, &LevelGrid::auto(&f, 0.1).unwrap()).unwrap();
        for l in [0, 50, 200] {
            let s = dec.levels()[l];
            assert!((dec.phi0()[l] + s).abs() < 1e-12);
            for i in 0..g.n1() {
                assert!((dec.h(l, i) - a * g.x1(i).sin()).abs() < 1e-12);
            }
        }
        assert!(dec.zero_average_defect() < 1e-12);
    }

    #[test]
    fn windowed_bump_decomposition() {
        let g = Grid::new(64, 256, 4.0 * PI).unwrap();
        let f = Density::new(-1.0, RealField::from_fn(g, bump(0.1)));
        let dec = decompose(&f, &LevelGrid::auto(&f, 0.1).unwrap()).unwrap();
        assert!(dec.zero_average_defect() < 1e-10 * dec.max_abs_h());
        assert!(dec.phi0().windows(2).all(|w| w[1] < w[0]));
        for (l, &s) in dec.levels().iter().enumerate() {
            assert!((dec.f_star_at(dec.phi0()[l]) - s).abs() < 1e-8);
            for i in (0..g.n1()).step_by(8) {
                let first = 0.1 * g.x1(i).sin() * (-s * s).exp();
                assert!((dec.h(l, i) - first).abs() < 0.5 * 0.1 * 0.1);
            }
        }
        let pe = potential_energy(&dec);
        assert!((pe.value - 0.019_652_583).abs() / 0.019_652_583 < 1e-3);
        assert!(pe.endpoint_ratio < 1e-8);
    }

    #[test]
    fn exact_moment_matches_quadrature() {
        let g = grid();
        let f = Density::new(
            -0.7,
            RealField::from_fn(g, |x1, x2| {
                0.2 * (x1 + 0.5 * x2).cos() + 0.1 * (2.0 * x2).sin()
            }),
        );
        let c = f.column_interp(3);
        let (lo, hi) = (-3.1, 4.4);
        let q = crate::quadrature::integrate(|x| c.eval(x).0 * x, lo, hi, 1e-14).unwrap();
        assert!((c.moment(lo, hi) - q.value).abs() < 1e-11);
    }

    #[test]
    fn measure_of_half_plane() {
        let g = grid();
        let f = Density::new(-1.0, RealField::zeros(g));
        let w = Window::interior(&g, 0.1).unwrap();
        let m = distribution_measure(&f, 0.0, &w);
        assert!((m - 0.5 * w.area()).abs() < 1e-12);
        let mut last = f64::INFINITY;
        for s in [-10.0, -3.0, -0.5, 0.0, 2.0, 10.0] {
            let m = distribution_measure(&f, s, &w);
            assert!(m <= last);
            last = m;
        }
        assert_eq!(distribution_measure(&f, 100.0, &w), 0.0);
        assert!((distribution_measure(&f, -100.0, &w) - w.area()).abs() < 1e-12);
    }

    #[test]
    fn stability_of_identical_fields_is_zero() {
        let g = grid();
        let f = Density::new(-1.0, RealField::from_fn(g, bump(0.1)));
        assert_eq!(stratification_stability(&f, &f, 0.1).unwrap(), 0.0);
    }
}
