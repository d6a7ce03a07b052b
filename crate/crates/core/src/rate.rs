//! Decay rates `ρ`, their non-increasing envelopes `ρ̃(x) = sup_{y≥x} ρ(y)` and
//! the growth targets `ω(x) = min(√x, 1/ρ̃(√x))` fed to the Poisson smoother.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::brent;

/// A tabulated rate: strictly increasing abscissae with positive values,
/// linearly interpolated and extended by the end values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    xs: Vec<f64>,
    values: Vec<f64>,
}

impl RateTable {
    pub fn new(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::InvalidRate("empty rate table".into()));
        }
        if xs.len() != values.len() {
            return Err(Error::InvalidRate(format!(
                "rate table has {} abscissae but {} values",
                xs.len(),
                values.len()
            )));
        }
        for (i, (&x, &v)) in xs.iter().zip(&values).enumerate() {
            if !(x > 0.0) || !x.is_finite() {
                return Err(Error::InvalidRate(format!("row {}: x = {x} is not positive", i + 1)));
            }
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidRate(format!(
                    "row {}: non-positive rho sample {v} at x = {x}",
                    i + 1
                )));
            }
        }
        if let Some(i) = xs.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidRate(format!("x column not strictly increasing at row {}", i + 2)));
        }
        Ok(Self { xs, values })
    }

    /// Parses a two-column CSV `x, rho`. A non-numeric first line is taken as
    /// a header; blank lines and `#` comments are skipped.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 2 {
                return Err(Error::InvalidRate(format!(
                    "line {}: expected 2 columns, found {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            match (fields[0].parse::<f64>(), fields[1].parse::<f64>()) {
                (Ok(x), Ok(v)) => {
                    xs.push(x);
                    values.push(v);
                }
                _ if xs.is_empty() && lineno == first_content_line(text) => continue,
                _ => {
                    return Err(Error::InvalidRate(format!(
                        "line {}: cannot parse '{line}' as two numbers",
                        lineno + 1
                    )))
                }
            }
        }
        Self::new(xs, values)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.values[0];
        }
        if x >= self.xs[n - 1] {
            return self.values[n - 1];
        }
        let i = self.xs.partition_point(|&t| t <= x) - 1;
        let t = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }
}

fn first_content_line(text: &str) -> usize {
    text.lines()
        .position(|l| {
            let l = l.trim();
            !l.is_empty() && !l.starts_with('#')
        })
        .unwrap_or(0)
}

/// Catalog and tabulated rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RateKind {
    /// `1/log(e + x)`
    Log,
    /// `(1 + x)^(-α)`, `α ∈ (0, 1/2]`
    Pow {
        alpha: f64,
    },
    /// `1/log(e + log(e + x))`
    LogLog,
    Table(RateTable),
}

/// A positive decay rate `ρ` tending to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFunction {
    kind: RateKind,
}

impl RateFunction {
    pub fn log() -> Self {
        Self { kind: RateKind::Log }
    }

    pub fn pow(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 0.5) {
            return Err(Error::InvalidRate(format!("pow exponent must lie in (0, 1/2], got {alpha}")));
        }
        Ok(Self { kind: RateKind::Pow { alpha } })
    }

    pub fn loglog() -> Self {
        Self { kind: RateKind::LogLog }
    }

    pub fn table(table: RateTable) -> Self {
        Self { kind: RateKind::Table(table) }
    }

    /// Looks up a catalog entry by name (`log`, `pow`, `loglog`).
    pub fn from_name(name: &str, alpha: Option<f64>) -> Result<Self> {
        match name {
            "log" => Ok(Self::log()),
            "loglog" => Ok(Self::loglog()),
            "pow" => Self::pow(alpha.unwrap_or(0.5)),
            "table" => Err(Error::InvalidRate("the table rate needs a CSV file".into())),
            other => Err(Error::InvalidRate(format!(
                "unknown rate '{other}' (expected log, pow, loglog or table)"
            ))),
        }
    }

    pub fn kind(&self) -> &RateKind {
        &self.kind
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            RateKind::Log => 1.0 / (std::f64::consts::E + x).ln(),
            RateKind::Pow { alpha } => (1.0 + x).powf(-alpha),
            RateKind::LogLog => 1.0 / (std::f64::consts::E + (std::f64::consts::E + x).ln()).ln(),
            RateKind::Table(t) => t.eval(x),
        }
    }

    /// Catalog entries are non-increasing in closed form, so their envelope is
    /// the rate itself.
    pub fn is_non_increasing(&self) -> bool {
        !matches!(self.kind, RateKind::Table(_))
    }

    /// Positivity and decay on a log-spaced grid: the maximum over the last
    /// decade must be below the minimum over the first.
    pub fn check(&self) -> Result<()> {
        let (lo, hi) = match &self.kind {
            RateKind::Table(t) => (t.xs[0], *t.xs.last().unwrap()),
            _ => (1.0, 1e12),
        };
        if hi <= lo {
            return Err(Error::InvalidRate("rate table spans a single point".into()));
        }
        let grid = log_grid(lo, hi, 241);
        if let Some(&x) = grid.iter().find(|&&x| !(self.eval(x) > 0.0)) {
            return Err(Error::InvalidRate(format!("rho({x}) is not positive")));
        }
        let decade = (hi / lo).log10().min(1.0);
        let first_hi = lo * 10f64.powf(decade);
        let last_lo = hi / 10f64.powf(decade);
        let first_min =
            grid.iter().filter(|&&x| x <= first_hi).map(|&x| self.eval(x)).fold(f64::INFINITY, f64::min);
        let last_max =
            grid.iter().filter(|&&x| x >= last_lo).map(|&x| self.eval(x)).fold(f64::NEG_INFINITY, f64::max);
        if last_max < first_min {
            Ok(())
        } else {
            Err(Error::InvalidRate(format!(
                "rho does not decay on [{lo}, {hi}]: last-decade max {last_max} >= first-decade min {first_min}"
            )))
        }
    }
}

impl fmt::Display for RateFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            RateKind::Log => write!(f, "log"),
            RateKind::Pow { alpha } => write!(f, "pow(alpha={alpha})"),
            RateKind::LogLog => write!(f, "loglog"),
            RateKind::Table(t) => write!(f, "table({} rows)", t.xs.len()),
        }
    }
}

/// The envelope `ρ̃(x) = sup_{y≥x} ρ(y)`.
#[derive(Debug, Clone)]
pub struct Envelope {
    rate: RateFunction,
    /// Backward running maximum over table nodes (empty for catalog rates).
    suffix_max: Vec<f64>,
}

impl Envelope {
    pub fn eval(&self, x: f64) -> f64 {
        let table = match self.rate.kind() {
            RateKind::Table(t) => t,
            _ => return self.rate.eval(x),
        };
        let n = table.xs.len();
        if x <= table.xs[0] {
            return self.suffix_max[0];
        }
        if x >= table.xs[n - 1] {
            return table.values[n - 1];
        }
        let i = table.xs.partition_point(|&t| t <= x) - 1;
        table.eval(x).max(self.suffix_max[i + 1])
    }

    /// Envelope values at the table nodes (empty for catalog rates).
    pub fn node_values(&self) -> &[f64] {
        &self.suffix_max
    }

    pub fn rate(&self) -> &RateFunction {
        &self.rate
    }
}

pub fn sup_envelope(rho: &RateFunction) -> Result<Envelope> {
    let suffix_max = match rho.kind() {
        RateKind::Table(t) => {
            let mut out = t.values.clone();
            for i in (0..out.len().saturating_sub(1)).rev() {
                out[i] = out[i].max(out[i + 1]);
            }
            out
        }
        _ => Vec::new(),
    };
    Ok(Envelope { rate: rho.clone(), suffix_max })
}

type OmegaFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Profile {
    Rate(Envelope),
    Custom(OmegaFn),
}

/// The growth target `ω` (with its envelope when built from a rate).
#[derive(Clone)]
pub struct GrowthTarget {
    profile: Profile,
    breakpoints: Vec<f64>,
    label: String,
}

impl fmt::Debug for GrowthTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GrowthTarget")
            .field("label", &self.label)
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

pub fn growth_target(rho: &RateFunction) -> Result<GrowthTarget> {
    rho.check()?;
    let envelope = sup_envelope(rho)?;
    for x in log_grid(1e-6, 1e12, 73) {
        let v = envelope.eval(x);
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidRate(format!("rho~({x}) = {v}; cannot invert")));
        }
    }

    // Kinks of ω: where the √x branch meets the 1/ρ̃(√x) branch, and the
    // squared table nodes.
    let mut breakpoints = Vec::new();
    let gap = |t: f64| t * envelope.eval(t) - 1.0;
    let ts = log_grid(1e-4, 1e6, 401);
    for w in ts.windows(2) {
        let (g0, g1) = (gap(w[0]), gap(w[1]));
        if g0 == 0.0 {
            breakpoints.push(w[0] * w[0]);
        } else if g0.signum() != g1.signum() && g1 != 0.0 {
            let t = brent(|t| Ok(gap(t)), w[0], w[1], 1e-15, 200)?;
            breakpoints.push(t * t);
        }
    }
    if let RateKind::Table(t) = rho.kind() {
        breakpoints.extend(t.xs.iter().map(|x| x * x));
    }
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();

    Ok(GrowthTarget { profile: Profile::Rate(envelope), breakpoints, label: rho.to_string() })
}

impl GrowthTarget {
    /// An arbitrary `ω`, bypassing the rate recipe. Used for reference
    /// profiles with closed-form smoothings.
    pub fn custom<F>(label: &str, omega: F, breakpoints: Vec<f64>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { profile: Profile::Custom(Arc::new(omega)), breakpoints, label: label.into() }
    }

    /// `ω ≡ c`, whose smoothing is the constant `πc/2`.
    pub fn constant(c: f64) -> Self {
        Self::custom(&format!("constant({c})"), move |_| c, Vec::new())
    }

    /// `ω(x) = scale·x^exponent`.
    pub fn power(scale: f64, exponent: f64) -> Self {
        Self::custom(&format!("power({scale}, {exponent})"), move |x| scale * x.powf(exponent), Vec::new())
    }

    pub fn omega(&self, x: f64) -> f64 {
        match &self.profile {
            Profile::Rate(env) => {
                let t = x.sqrt();
                t.min(1.0 / env.eval(t))
            }
            Profile::Custom(f) => f(x),
        }
    }

    pub fn rho_tilde(&self, x: f64) -> Option<f64> {
        match &self.profile {
            Profile::Rate(env) => Some(env.eval(x)),
            Profile::Custom(_) => None,
        }
    }

    pub fn rate(&self) -> Option<&RateFunction> {
        match &self.profile {
            Profile::Rate(env) => Some(env.rate()),
            Profile::Custom(_) => None,
        }
    }

    /// Points where `ω` may fail to be smooth.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Grid checks: `ρ̃` non-increasing, `ω` non-decreasing, `ω ≤ √x`, and `ω`
    /// growing (last value above first).
    pub fn check_invariants(&self, grid: &[f64]) -> Result<()> {
        let tol = 1e-14;
        for w in grid.windows(2) {
            let (o0, o1) = (self.omega(w[0]), self.omega(w[1]));
            if o1 < o0 - tol * o0.abs() {
                return Err(Error::InvalidRate(format!("omega decreases between {} and {}", w[0], w[1])));
            }
            if let (Some(r0), Some(r1)) = (self.rho_tilde(w[0]), self.rho_tilde(w[1])) {
                if r1 > r0 + tol * r0 {
                    return Err(Error::InvalidRate(format!("rho~ increases between {} and {}", w[0], w[1])));
                }
            }
        }
        for &x in grid {
            if self.omega(x) > x.sqrt() * (1.0 + tol) {
                return Err(Error::InvalidRate(format!("omega({x}) exceeds sqrt(x)")));
            }
        }
        if let (Some(&first), Some(&last)) = (grid.first(), grid.last()) {
            if self.omega(last) <= self.omega(first) {
                return Err(Error::InvalidRate("omega does not grow on the grid".into()));
            }
        }
        Ok(())
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (l0, l1) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            (0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
        }
    }
}

/// Spacing of a [`GridSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    Linear,
    Log,
}

/// `points` samples of `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    pub scale: GridScale,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, points: usize, scale: GridScale) -> Self {
        Self { x_min, x_max, points, scale }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_min < self.x_max) {
            return Err(Error::InvalidArgument(format!(
                "grid range [{}, {}] must be finite and increasing",
                self.x_min, self.x_max
            )));
        }
        if self.points < 2 {
            return Err(Error::InvalidArgument(format!("grid needs at least 2 points, got {}", self.points)));
        }
        if self.scale == GridScale::Log && !(self.x_min > 0.0) {
            return Err(Error::InvalidArgument(format!("log grid needs x_min > 0, got {}", self.x_min)));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        match self.scale {
            GridScale::Linear => linear_grid(self.x_min, self.x_max, self.points),
            GridScale::Log => log_grid(self.x_min, self.x_max, self.points),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn catalog_envelope_is_identity() {
        let rho = RateFunction::log();
        let env = sup_envelope(&rho).unwrap();
        for x in [0.1, 1.0, 7.5, 1e4] {
            assert_eq!(env.eval(x), 1.0 / (E + x).ln());
        }
    }

    #[test]
    fn table_envelope_is_backward_running_max() {
        let t = RateTable::new(vec![1.0, 2.0, 3.0], vec![0.5, 0.8, 0.3]).unwrap();
        let env = sup_envelope(&RateFunction::table(t)).unwrap();
        assert_eq!(env.node_values(), &[0.8, 0.8, 0.3]);
        assert_eq!(env.eval(1.0), 0.8);
        assert_eq!(env.eval(2.0), 0.8);
        assert_eq!(env.eval(3.0), 0.3);
        // last-value extension
        assert_eq!(env.eval(10.0), 0.3);
        // between nodes the envelope follows the interpolant where it dominates
        assert!((env.eval(2.5) - 0.55).abs() < 1e-15);
    }

    #[test]
    fn pow_envelope_matches_grid_sup() {
        let rho = RateFunction::pow(0.25).unwrap();
        let env = sup_envelope(&rho).unwrap();
        let grid_sup = log_grid(2.0, 1e6, 20_001).into_iter().map(|y| rho.eval(y)).fold(0.0, f64::max);
        assert!((env.eval(2.0) - grid_sup).abs() < 1e-15);
        assert!((env.eval(2.0) - 0.759_835_685_651_592_6).abs() < 1e-15);
    }

    #[test]
    fn omega_branches() {
        let target = growth_target(&RateFunction::log()).unwrap();
        let x = E * E;
        // √x = e > log(2e), so the log branch is active
        assert!(x.sqrt() > (2.0 * E).ln());
        assert!((target.omega(x) - (2.0 * E).ln()).abs() < 1e-15);
        assert!((target.omega(x) - 1.693_147_180_559_945_3).abs() < 1e-15);

        let target = growth_target(&RateFunction::pow(0.25).unwrap()).unwrap();
        for x in [2.0, 5.0, 100.0, 1e6] {
            let branch = (1.0 + f64::sqrt(x)).powf(0.25);
            assert!(branch <= x.sqrt());
            assert!((target.omega(x) - branch).abs() < 1e-15);
        }
    }

    #[test]
    fn omega_at_one_with_unit_envelope() {
        // rho~(1) = 1 makes both branches equal 1.
        let t = RateTable::new(vec![0.5, 1.0, 1e3], vec![1.0, 1.0, 1e-3]).unwrap();
        let target = growth_target(&RateFunction::table(t)).unwrap();
        assert_eq!(target.omega(1.0), 1.0);
    }

    #[test]
    fn crossover_breakpoint_is_found() {
        let target = growth_target(&RateFunction::log()).unwrap();
        assert_eq!(target.breakpoints().len(), 1);
        let xc = target.breakpoints()[0];
        let t = xc.sqrt();
        assert!((t - (E + t).ln()).abs() < 1e-13);
    }

    #[test]
    fn invariants_hold_for_catalog() {
        let grid = log_grid(1e-3, 1e8, 300);
        for rho in [RateFunction::log(), RateFunction::loglog(), RateFunction::pow(0.5).unwrap()] {
            growth_target(&rho).unwrap().check_invariants(&grid).unwrap();
        }
    }

    #[test]
    fn csv_parsing() {
        let t = RateTable::parse_csv("x,rho\n1,0.5\n2, 0.8\n\n3,0.3\n").unwrap();
        assert_eq!(t.xs(), &[1.0, 2.0, 3.0]);
        let t = RateTable::parse_csv("1,0.5\n2,0.4\n").unwrap();
        assert_eq!(t.values(), &[0.5, 0.4]);
        assert!(RateTable::parse_csv("x,rho\n").is_err());
        assert!(RateTable::parse_csv("1,0.5\n1,0.4\n").is_err());
        assert!(RateTable::parse_csv("1,0.5\n2,0\n").is_err());
        assert!(RateTable::parse_csv("1,0.5\n2,abc\n").is_err());
    }

    #[test]
    fn rejects_non_decaying_and_bad_catalog() {
        assert!(RateFunction::pow(0.7).is_err());
        assert!(RateFunction::from_name("cubic", None).is_err());
        let flat = RateTable::new(vec![1.0, 1e3], vec![0.5, 0.5]).unwrap();
        assert!(RateFunction::table(flat).check().is_err());
    }
}
