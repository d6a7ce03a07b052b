//! The two counterexamples and the verification battery.
//!
//! * `S(x) = ∫₀ˣ eᵘ(1 + cos φ(u)) du` is non-decreasing, its Laplace–Stieltjes
//!   transform has a single simple pole at `s = 1`, yet
//!   `S(x) − eˣ` changes sign with amplitude `≍ eˣρ(x)`.
//! * `τ(x) = ∫ₓ^∞ cos φ(u) du` has an entire Laplace transform and still
//!   oscillates with amplitude `≍ ρ(x)`.
//!
//! Oscillations are exhibited at the half-knots `φ(x_k) = π/2 + kπ`, where the
//! leading terms `sin φ/V` and `−sin φ/V` peak with sign `±(−1)^k`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::continuation::{cauchy_circle_detailed, Continuation, ContourPath};
use crate::error::{Error, Result};
use crate::oscillatory::{
    direct_cutoff, direct_f, eval_t_main, eval_t_scaled_many, eval_tau_many, solve_phase,
};
use crate::par::map_ordered;
use crate::quadrature::QuadratureConfig;
use crate::rate::{growth_target, GridScale, GridSpec, RateFunction};
use crate::report::{CheckRecord, Criterion, Timings, VerificationReport};
use crate::smoothing::{factorial, SmoothedGrowth};
use crate::summation::NeumaierSum;

/// `e^{-x}S(x) = 1 − e^{-x} + e^{-x}T(x)`.
pub fn eval_s_scaled(sg: &SmoothedGrowth, x: f64) -> Result<f64> {
    Ok(eval_s_scaled_many(sg, &[x])?[0])
}

/// [`eval_s_scaled`] on an ascending list.
pub fn eval_s_scaled_many(sg: &SmoothedGrowth, xs: &[f64]) -> Result<Vec<f64>> {
    let t = eval_t_scaled_many(sg, xs)?;
    Ok(xs.iter().zip(t).map(|(&x, t)| -(-x).exp_m1() + t).collect())
}

/// `D(x) = (e^{-x}S(x) − 1)/ρ(x)`.
pub fn deviation_d(sg: &SmoothedGrowth, rho: &RateFunction, x: f64) -> Result<f64> {
    Ok(deviations(sg, rho, &[x])?[0])
}

fn deviations(sg: &SmoothedGrowth, rho: &RateFunction, xs: &[f64]) -> Result<Vec<f64>> {
    if let Some(&x) = xs.iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::InvalidArgument(format!("D(x) needs x > 0, got {x}")));
    }
    let t = eval_t_scaled_many(sg, xs)?;
    xs.iter()
        .zip(t)
        .map(|(&x, t)| {
            let r = rho.eval(x);
            if !(r > 0.0) {
                return Err(Error::InvalidRate(format!("rho({x}) = {r} cannot normalise D")));
            }
            // e^{-x}S − 1 = e^{-x}T − e^{-x}
            Ok((t - (-x).exp()) / r)
        })
        .collect()
}

/// `(k, x_k)` with `φ(x_k) = π/2 + kπ` for `k_min ≤ k ≤ k_max`, ascending.
pub fn locate_half_knots(sg: &SmoothedGrowth, k_min: i64, k_max: i64) -> Result<Vec<(i64, f64)>> {
    if k_min < 0 || k_max < k_min {
        return Err(Error::InvalidArgument(format!("bad half-knot range {k_min}..={k_max}")));
    }
    let mut out = Vec::with_capacity((k_max - k_min + 1) as usize);
    let mut lo = 0.0f64;
    for k in k_min..=k_max {
        let target = PI / 2.0 + k as f64 * PI;
        let mut hi = (2.0 * lo).max(lo + 1.0);
        let mut steps = 0;
        while sg.phase(hi)? <= target {
            lo = hi;
            hi *= 2.0;
            steps += 1;
            if steps > 200 || !hi.is_finite() {
                return Err(Error::NotBracketed { lo, hi, f_lo: f64::NAN, f_hi: f64::NAN });
            }
        }
        let x = solve_phase(sg, target, lo, hi)?;
        out.push((k, x));
        lo = x;
    }
    Ok(out)
}

/// Indices of the half-knots inside `[a, b]`.
pub fn half_knot_range(sg: &SmoothedGrowth, a: f64, b: f64) -> Result<(i64, i64)> {
    let lo = ((sg.phase(a)? - PI / 2.0) / PI).ceil().max(0.0) as i64;
    let hi = ((sg.phase(b)? - PI / 2.0) / PI).floor() as i64;
    Ok((lo, hi))
}

/// A sample of the normalised deviation at a half-knot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillationWitness {
    pub k: i64,
    pub x_k: f64,
    pub deviation: f64,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessSet {
    pub witnesses: Vec<OscillationWitness>,
    /// `min |deviation|`
    pub c_measured: f64,
    /// Consecutive signs differ.
    pub alternating: bool,
    /// Every sign equals the predicted `±(−1)^k`.
    pub signs_as_predicted: bool,
    /// `|deviation|·ρ(x_k)·V(x_k)`, which the leading term puts at 1.
    pub magnitude_ratios: Vec<f64>,
}

impl WitnessSet {
    pub fn count(&self, sign: i8) -> usize {
        self.witnesses.iter().filter(|w| w.sign == sign).count()
    }
}

fn witness_set(
    sg: &SmoothedGrowth,
    rho: &RateFunction,
    knots: &[(i64, f64)],
    deviations: &[f64],
    predicted_sign: impl Fn(i64) -> i8,
) -> Result<WitnessSet> {
    let mut witnesses = Vec::with_capacity(knots.len());
    let mut magnitude_ratios = Vec::with_capacity(knots.len());
    for (&(k, x), &d) in knots.iter().zip(deviations) {
        let sign = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        };
        witnesses.push(OscillationWitness { k, x_k: x, deviation: d, sign });
        magnitude_ratios.push(d.abs() * rho.eval(x) * sg.v(x)?);
    }
    let c_measured = deviations.iter().map(|d| d.abs()).fold(f64::INFINITY, f64::min);
    let alternating = witnesses.windows(2).all(|w| w[0].sign * w[1].sign == -1);
    let signs_as_predicted = witnesses.iter().all(|w| w.sign == predicted_sign(w.k));
    Ok(WitnessSet { witnesses, c_measured, alternating, signs_as_predicted, magnitude_ratios })
}

fn knots_in(sg: &SmoothedGrowth, range: (f64, f64)) -> Result<Vec<(i64, f64)>> {
    let (a, b) = range;
    if !(a > 0.0 && b > a) {
        return Err(Error::InvalidArgument(format!("bad witness range [{a}, {b}]")));
    }
    let (k0, k1) = half_knot_range(sg, a, b)?;
    if k1 - k0 + 1 < 4 {
        return Err(Error::InvalidArgument(format!(
            "[{a}, {b}] holds {} half-knots, at least 4 are needed",
            (k1 - k0 + 1).max(0)
        )));
    }
    let knots = locate_half_knots(sg, k0, k1)?;
    Ok(knots.into_iter().filter(|&(_, x)| x >= a && x <= b).collect())
}

fn parity(k: i64) -> i8 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `D` at every half-knot in `range`; the predicted sign is `(−1)^k`.
pub fn omega_pm_witnesses(sg: &SmoothedGrowth, rho: &RateFunction, range: (f64, f64)) -> Result<WitnessSet> {
    let knots = knots_in(sg, range)?;
    let xs: Vec<f64> = knots.iter().map(|&(_, x)| x).collect();
    let d = deviations(sg, rho, &xs)?;
    witness_set(sg, rho, &knots, &d, parity)
}

/// `τ/ρ` at every half-knot in `range`; the predicted sign is `−(−1)^k`.
pub fn tau_witnesses(sg: &SmoothedGrowth, rho: &RateFunction, range: (f64, f64)) -> Result<WitnessSet> {
    let knots = knots_in(sg, range)?;
    let xs: Vec<f64> = knots.iter().map(|&(_, x)| x).collect();
    let tau = eval_tau_many(sg, &xs)?;
    let d: Vec<f64> = xs.iter().zip(&tau).map(|(&x, &t)| t / rho.eval(x)).collect();
    witness_set(sg, rho, &knots, &d, |k| -parity(k))
}

/// Composite Simpson rule for `e^{-x}T(x)` on `intervals` equal steps.
pub fn simpson_t_scaled(sg: &SmoothedGrowth, x: f64, intervals: usize) -> Result<f64> {
    if intervals < 2 || !intervals.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("Simpson needs an even interval count, got {intervals}")));
    }
    let h = x / intervals as f64;
    let idx: Vec<usize> = (0..=intervals).collect();
    let vals = map_ordered(&idx, |&i| {
        let u = if i == intervals { x } else { i as f64 * h };
        sg.phase(u).map(|p| (u - x).exp() * p.cos())
    });
    let mut acc = NeumaierSum::new();
    for (i, v) in vals.into_iter().enumerate() {
        let w = if i == 0 || i == intervals {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc.add(w * v?);
    }
    Ok(acc.total() * h / 3.0)
}

/// The checks of the battery, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    Smoothing,
    Remainder,
    Continuation,
    Residue,
    OmegaS,
    OmegaTau,
    Removable,
}

impl CheckId {
    pub const ALL: [CheckId; 7] = [
        CheckId::Smoothing,
        CheckId::Remainder,
        CheckId::Continuation,
        CheckId::Residue,
        CheckId::OmegaS,
        CheckId::OmegaTau,
        CheckId::Removable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::Smoothing => "smoothing",
            CheckId::Remainder => "remainder",
            CheckId::Continuation => "continuation",
            CheckId::Residue => "residue",
            CheckId::OmegaS => "omega_s",
            CheckId::OmegaTau => "omega_tau",
            CheckId::Removable => "removable",
        }
    }

    /// The statement the check exercises.
    pub fn anchor(self) -> &'static str {
        match self {
            CheckId::Smoothing => "W smooth, non-decreasing, W(ay) >= aW(y), |W^(n)(y)| <= 2^(n+1) n! W(y)/y^n, omega << W << omega(y^2)",
            CheckId::Remainder => "e^-x T(x) = sin(xW(x))/V(x) + O(1/V(x)^2)",
            CheckId::Continuation => "F(s) continues analytically to C via the deformed contour",
            CheckId::Residue => "L{dS; s} is meromorphic with a single simple pole of residue 1 at s = 1",
            CheckId::OmegaS => "S(x) = e^x + Omega_pm(rho(x) e^x)",
            CheckId::OmegaTau => "tau(x) = Omega_pm(rho(x))",
            CheckId::Removable => "L{tau; s} = (tau(0) - L{cos xW(x); s})/s extends to an entire function",
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "smoothing" | "lemma21" => Ok(CheckId::Smoothing),
            "remainder" | "lemma22" => Ok(CheckId::Remainder),
            "continuation" => Ok(CheckId::Continuation),
            "residue" => Ok(CheckId::Residue),
            "omega_s" => Ok(CheckId::OmegaS),
            "omega_tau" => Ok(CheckId::OmegaTau),
            "removable" => Ok(CheckId::Removable),
            other => Err(Error::InvalidArgument(format!(
                "unknown check '{other}' (expected one of {})",
                CheckId::ALL.map(|c| c.name()).join(", ")
            ))),
        }
    }
}

/// Everything [`run_suite`] depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub rate: RateFunction,
    pub quad: QuadratureConfig,
    /// Grid for the smoothing battery.
    pub smoothing_grid: GridSpec,
    /// Points where the `T` remainder is measured.
    pub remainder_xs: Vec<f64>,
    /// Points checked against the Simpson reference.
    pub simpson_xs: Vec<f64>,
    pub simpson_intervals: usize,
    pub witness_range: (f64, f64),
    pub min_witnesses: usize,
    pub checks: Vec<CheckId>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            rate: RateFunction::log(),
            quad: QuadratureConfig::default(),
            smoothing_grid: GridSpec::new(1.0, 1e6, 60, GridScale::Log),
            remainder_xs: (1..=8).map(|i| 5.0 * i as f64).collect(),
            simpson_xs: vec![10.0, 20.0, 30.0],
            simpson_intervals: 1 << 16,
            witness_range: (10.0, 60.0),
            min_witnesses: 10,
            checks: CheckId::ALL.to_vec(),
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        self.quad.validate()?;
        self.rate.check()?;
        self.smoothing_grid.validate()?;
        if self.smoothing_grid.x_min <= 0.0 {
            return Err(Error::InvalidArgument("smoothing grid must be positive".into()));
        }
        let (a, b) = self.witness_range;
        if !(a > 0.0 && b > a && b.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad witness range [{a}, {b}]")));
        }
        if self.remainder_xs.iter().chain(&self.simpson_xs).any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidArgument("remainder and Simpson points must be positive".into()));
        }
        if self.simpson_intervals < 2 || !self.simpson_intervals.is_multiple_of(2) {
            return Err(Error::InvalidArgument("simpson_intervals must be even and >= 2".into()));
        }
        Ok(())
    }

    /// Enabled checks in registry order, without duplicates.
    pub fn enabled(&self) -> Vec<CheckId> {
        CheckId::ALL.into_iter().filter(|c| self.checks.contains(c)).collect()
    }

    pub fn smoothed(&self) -> Result<SmoothedGrowth> {
        Ok(SmoothedGrowth::new(growth_target(&self.rate)?, self.quad))
    }
}

/// Shared state across checks.
struct Context<'a> {
    cfg: &'a SuiteConfig,
    sg: SmoothedGrowth,
    cont: std::sync::OnceLock<Result<Continuation>>,
}

impl Context<'_> {
    fn continuation(&self) -> Result<&Continuation> {
        self.cont
            .get_or_init(|| Continuation::new(self.sg.clone(), ContourPath::auto()))
            .as_ref()
            .map_err(Clone::clone)
    }
}

/// Runs the enabled checks in registry order. A failing evaluation marks its
/// record `fail` and the suite carries on.
pub fn run_suite(cfg: &SuiteConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let ctx = Context { cfg, sg: cfg.smoothed()?, cont: std::sync::OnceLock::new() };
    let start = Instant::now();
    let mut records = Vec::new();
    let mut per_check = BTreeMap::new();
    for id in cfg.enabled() {
        let t = Instant::now();
        let record = match run_check(&ctx, id) {
            Ok(r) => r,
            Err(e) => CheckRecord::errored(id.name(), id.anchor(), &e),
        };
        per_check.insert(id.name().to_string(), t.elapsed().as_secs_f64());
        records.push(record);
    }
    let timings = Timings { total_seconds: start.elapsed().as_secs_f64(), per_check };
    Ok(VerificationReport::new(cfg.clone(), records, timings))
}

/// Runs a single check.
pub fn run_check_standalone(cfg: &SuiteConfig, id: CheckId) -> Result<CheckRecord> {
    cfg.validate()?;
    let ctx = Context { cfg, sg: cfg.smoothed()?, cont: std::sync::OnceLock::new() };
    Ok(run_check(&ctx, id).unwrap_or_else(|e| CheckRecord::errored(id.name(), id.anchor(), &e)))
}

fn run_check(ctx: &Context, id: CheckId) -> Result<CheckRecord> {
    let mut rec = CheckRecord::new(id.name(), id.anchor());
    match id {
        CheckId::Smoothing => smoothing_check(ctx, &mut rec)?,
        CheckId::Remainder => remainder_check(ctx, &mut rec)?,
        CheckId::Continuation => continuation_check(ctx, &mut rec)?,
        CheckId::Residue => residue_check(ctx, &mut rec)?,
        CheckId::OmegaS => omega_s_check(ctx, &mut rec)?,
        CheckId::OmegaTau => omega_tau_check(ctx, &mut rec)?,
        CheckId::Removable => removable_check(ctx, &mut rec)?,
    }
    rec.finish();
    Ok(rec)
}

const SHAPE_EPS: f64 = 1e-9;
const BOUND_EPS: f64 = 1e-6;
const SCALE_FACTORS: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 1.0];

struct SmoothingRow {
    w: f64,
    derivs: Vec<f64>,
    scaled: Vec<f64>,
    omega: f64,
    omega_sq: f64,
}

fn smoothing_check(ctx: &Context, rec: &mut CheckRecord) -> Result<()> {
    let sg = &ctx.sg;
    let grid = ctx.cfg.smoothing_grid.points();
    let n_max = sg.n_max();
    let rows = map_ordered(&grid, |&y| -> Result<SmoothingRow> {
        Ok(SmoothingRow {
            w: sg.w(y)?,
            derivs: (1..=n_max).map(|n| sg.derivative(n, y)).collect::<Result<_>>()?,
            scaled: SCALE_FACTORS.iter().map(|&a| sg.w(a * y)).collect::<Result<_>>()?,
            omega: sg.omega(y),
            omega_sq: sg.omega(y * y),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let min_wp = rows.iter().map(|r| r.derivs[0]).fold(f64::INFINITY, f64::min);
    rec.criterion(Criterion::ge("min W'", min_wp, -SHAPE_EPS));

    let mut min_scaled = f64::INFINITY;
    for r in &rows {
        for (a, wa) in SCALE_FACTORS.iter().zip(&r.scaled) {
            min_scaled = min_scaled.min(wa - a * r.w);
        }
    }
    rec.criterion(Criterion::ge("min W(ay) - aW(y)", min_scaled, -SHAPE_EPS));

    let mut worst_ratio: f64 = 0.0;
    for (y, r) in grid.iter().zip(&rows) {
        for (i, d) in r.derivs.iter().enumerate() {
            let n = i + 1;
            let ratio = d.abs() * y.powi(n as i32) / (2f64.powi(n as i32 + 1) * factorial(n) * r.w);
            worst_ratio = worst_ratio.max(ratio);
        }
    }
    rec.criterion(Criterion::le("max |W^(n)| y^n / (2^(n+1) n! W)", worst_ratio, 1.0 + BOUND_EPS));

    let lower: Vec<f64> = rows.iter().map(|r| r.w / r.omega).collect();
    let upper: Vec<f64> = rows.iter().map(|r| r.w / (r.omega_sq + 1.0)).collect();
    let c1 = lower.iter().copied().fold(f64::INFINITY, f64::min);
    let c2 = upper.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    rec.criterion(Criterion::gt("c1 = min W/omega", c1, 0.0));
    rec.criterion(Criterion::finite("c2 = max W/(omega(y^2)+1)", c2));
    let linear = grid.iter().zip(&rows).map(|(y, r)| r.w / y).fold(f64::NEG_INFINITY, f64::max);
    rec.criterion(Criterion::finite("max W/y", linear));
    let quartic_last = rows.last().unwrap().w / grid.last().unwrap().powi(4);
    rec.measure("W/y^4 at grid end", quartic_last);

    // finite-difference and real-axis cross-checks on every sixth grid point
    let sample: Vec<f64> = grid.iter().step_by(6).copied().collect();
    let checks = map_ordered(&sample, |&y| -> Result<(f64, f64, f64)> {
        let h = 1e-3 * y;
        let w = |t: f64| sg.w(t);
        let d1 = (w(y - 2.0 * h)? - 8.0 * w(y - h)? + 8.0 * w(y + h)? - w(y + 2.0 * h)?) / (12.0 * h);
        let wp = |t: f64| sg.derivative(1, t);
        let d2 = (wp(y - 2.0 * h)? - 8.0 * wp(y - h)? + 8.0 * wp(y + h)? - wp(y + 2.0 * h)?) / (12.0 * h);
        let e1 = ((d1 - sg.derivative(1, y)?) / sg.derivative(1, y)?).abs();
        let e2 = ((d2 - sg.derivative(2, y)?) / sg.derivative(2, y)?).abs();
        let wc = sg.w_complex(Complex64::new(y, 0.0))?;
        let e3 = (wc - sg.w(y)?).norm() / sg.w(y)?;
        Ok((e1, e2, e3))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let max_of = |f: fn(&(f64, f64, f64)) -> f64| checks.iter().map(f).fold(0.0, f64::max);
    rec.criterion(Criterion::le("finite-difference W' rel error", max_of(|c| c.0), 1e-5));
    rec.criterion(Criterion::le("finite-difference W'' rel error", max_of(|c| c.1), 1e-5));
    rec.criterion(Criterion::le("complex W on real axis rel error", max_of(|c| c.2), 1e-9));

    rec.grid("y", grid);
    rec.grid("W/omega", lower);
    rec.grid("W/(omega(y^2)+1)", upper);
    Ok(())
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn remainder_check(ctx: &Context, rec: &mut CheckRecord) -> Result<()> {
    let sg = &ctx.sg;
    let mut xs = ctx.cfg.remainder_xs.clone();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let t = eval_t_scaled_many(sg, &xs)?;
    let mut r = Vec::with_capacity(xs.len());
    for (&x, &tv) in xs.iter().zip(&t) {
        let v = sg.v(x)?;
        r.push((tv - eval_t_main(sg, x)?).abs() * v * v);
    }
    let max_r = r.iter().copied().fold(0.0, f64::max);
    let med = median(&r);
    rec.measure("C_measured = max |e^-x T - sin(phi)/V| V^2", max_r);
    rec.measure("median remainder", med);
    rec.criterion(Criterion::le("max remainder / median remainder", max_r / med, 10.0));
    rec.grid("x", xs);
    rec.grid("remainder", r);

    let mut sx = ctx.cfg.simpson_xs.clone();
    sx.sort_by(f64::total_cmp);
    sx.dedup();
    let quad = eval_t_scaled_many(sg, &sx)?;
    let mut worst: f64 = 0.0;
    let mut min_ppo = f64::INFINITY;
    for (&x, &q) in sx.iter().zip(&quad) {
        let reference = simpson_t_scaled(sg, x, ctx.cfg.simpson_intervals)?;
        worst = worst.max((q - reference).abs());
        // sample points per oscillation at the fastest frequency V(x)
        let h = x / ctx.cfg.simpson_intervals as f64;
        min_ppo = min_ppo.min(2.0 * PI / (sg.v(x)? * h));
    }
    rec.measure("Simpson points per oscillation (min)", min_ppo);
    rec.criterion(Criterion::ge("Simpson points per oscillation", min_ppo, 50.0));
    rec.criterion(Criterion::le("|e^-x T - Simpson|", worst, 1e-8));
    rec.grid("simpson_x", sx);
    Ok(())
}

pub const OVERLAP_RE: [f64; 3] = [1.0, 2.0, 3.0];
pub const OVERLAP_IM: [f64; 5] = [0.0, 1.0, -1.0, 5.0, -5.0];
pub const PATH_POINTS: [(f64, f64); 3] = [(2.0, 0.0), (-1.0, 0.0), (-2.0, 3.0)];
pub const HOLOMORPHY_CENTERS: [(f64, f64); 4] = [(-1.0, 0.0), (0.0, 0.0), (1.0, 0.0), (-2.0, 3.0)];
pub const CIRCLE_NODES: usize = 64;

fn c(p: (f64, f64)) -> Complex64 {
    Complex64::new(p.0, p.1)
}

fn continuation_check(ctx: &Context, rec: &mut CheckRecord) -> Result<()> {
    let cont = ctx.continuation()?;
    let sg = &ctx.sg;
    rec.measure("C_emp", cont.c_emp());

    let overlap: Vec<Complex64> =
        OVERLAP_RE.iter().flat_map(|&a| OVERLAP_IM.iter().map(move |&b| Complex64::new(a, b))).collect();
    let diffs = map_ordered(&overlap, |&s| -> Result<f64> {
        let f = cont.contour_f(s)?.value;
        let d = direct_f(sg, s, direct_cutoff(s, 1e-3 * sg.quad().abs_tol)?)?.value;
        Ok((f - d).norm() / (1.0 + f.norm()))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let worst = diffs.iter().copied().fold(0.0, f64::max);
    rec.criterion(Criterion::le("overlap |contour_F - direct_F|/(1+|F|)", worst, 1e-6));

    let doubled = Continuation::new(sg.clone(), ContourPath::auto().with_r0(2.0 * cont.path().r0))?;
    let mut worst_path: f64 = 0.0;
    let mut peak = f64::NEG_INFINITY;
    for p in PATH_POINTS {
        let a = cont.contour_f(c(p))?;
        let b = doubled.contour_f(c(p))?;
        worst_path = worst_path.max((a.value - b.value).norm() / a.value.norm());
        peak = peak.max(a.path_peak);
    }
    rec.criterion(Criterion::le("path independence R0 -> 2R0 (relative)", worst_path, 1e-8));
    rec.measure("largest path exponent", peak);

    let mut worst_holo: f64 = 0.0;
    for p in HOLOMORPHY_CENTERS {
        let circle = cauchy_circle_detailed(|s| cont.laplace_cos(s), c(p), 0.5, CIRCLE_NODES)?;
        let rel = circle.value.norm() / circle.max_abs;
        rec.measure(&format!("holomorphy at {}", c(p)), rel);
        worst_holo = worst_holo.max(rel);
    }
    rec.criterion(Criterion::le("cauchy_circle(L cos) / max|L cos|", worst_holo, 1e-6));

    let s = c((-2.0, 3.0));
    let sym = (cont.laplace_cos(s.conj())? - cont.laplace_cos(s)?.conj()).norm();
    rec.criterion(Criterion::le("|L cos(conj s) - conj L cos(s)|", sym, 1e-9));
    let real = cont.laplace_cos(Complex64::new(2.0, 0.0))?;
    rec.criterion(Criterion::le("Im L cos(2) / (1+|L cos(2)|)", real.im.abs() / (1.0 + real.norm()), 1e-9));
    rec.grid("overlap_re_s", overlap.iter().map(|s| s.re).collect());
    rec.grid("overlap_im_s", overlap.iter().map(|s| s.im).collect());
    rec.grid("overlap_rel_diff", diffs);
    Ok(())
}

fn residue_check(ctx: &Context, rec: &mut CheckRecord) -> Result<()> {
    let cont = ctx.continuation()?;
    let one = Complex64::new(1.0, 0.0);
    let res = cauchy_circle_detailed(|s| cont.laplace_ds(s), one, 0.3, CIRCLE_NODES)?;
    rec.measure("residue re", res.value.re);
    rec.measure("residue im", res.value.im);
    rec.criterion(Criterion::le("|residue - 1|", (res.value - one).norm(), 1e-4));
    let off = cauchy_circle_detailed(|s| cont.laplace_ds(s), Complex64::new(0.5, 0.0), 0.2, CIRCLE_NODES)?;
    rec.criterion(Criterion::le("pole-free circle / max|L dS|", off.value.norm() / off.max_abs, 1e-6));
    let mut limits = Vec::new();
    for k in 1..=4 {
        let h = 10f64.powi(-k);
        let s = Complex64::new(1.0 + h, 0.0);
        limits.push(((s - one) * cont.laplace_ds(s)?).re);
    }
    rec.measure("(s-1) L dS(s) at s = 1 + 1e-4", *limits.last().unwrap());
    rec.grid("(s-1) L dS(s), s = 1 + 10^-k", limits);
    Ok(())
}

fn witness_criteria(rec: &mut CheckRecord, set: &WitnessSet, min_count: usize) {
    rec.criterion(Criterion::ge("witness count", set.witnesses.len() as f64, min_count as f64));
    rec.criterion(Criterion::ge("positive witnesses", set.count(1) as f64, 1.0));
    rec.criterion(Criterion::ge("negative witnesses", set.count(-1) as f64, 1.0));
    rec.criterion(Criterion::holds("signs alternate", set.alternating));
    rec.criterion(Criterion::holds("signs follow the leading term", set.signs_as_predicted));
    rec.criterion(Criterion::gt("c_measured", set.c_measured, 0.0));
    let lo = set.magnitude_ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = set.magnitude_ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    rec.criterion(Criterion::ge("min |deviation| rho V", lo, 0.5));
    rec.criterion(Criterion::le("max |deviation| rho V", hi, 1.5));
    rec.grid("magnitude_ratio", set.magnitude_ratios.clone());
    rec.witnesses = set.witnesses.clone();
}

fn omega_s_check(ctx: &Context, rec: &mut CheckRecord) -> Result<()> {
    let set = omega_pm_witnesses(&ctx.sg, &ctx.cfg.rate, ctx.cfg.witness_range)?;
    witness_criteria(rec, &set, ctx.cfg.min_witnesses);
    Ok(())
}

fn omega_tau_check(ctx: &Context, rec: &mut CheckRecord) -> Result<()> {
    let set = tau_witnesses(&ctx.sg, &ctx.cfg.rate, ctx.cfg.witness_range)?;
    witness_criteria(rec, &set, ctx.cfg.min_witnesses);
    // τV + sin φ is the O(1/V) correction
    let mut worst: f64 = 0.0;
    for w in &set.witnesses {
        let v = ctx.sg.v(w.x_k)?;
        let tau = w.deviation * ctx.cfg.rate.eval(w.x_k);
        worst = worst.max((tau * v + ctx.sg.phase(w.x_k)?.sin()).abs() * v);
    }
    rec.measure("max |tau V + sin phi| V", worst);
    Ok(())
}

fn removable_check(ctx: &Context, rec: &mut CheckRecord) -> Result<()> {
    let cont = ctx.continuation()?;
    let tau0 = cont.tau0()?;
    let lcos0 = cont.laplace_cos(Complex64::new(0.0, 0.0))?;
    rec.measure("tau(0)", tau0);
    rec.criterion(Criterion::le("|L cos(0) - tau(0)|", (lcos0 - tau0).norm(), 1e-5));
    let other = Continuation::new(ctx.sg.clone(), ContourPath::auto().with_r0(2.0 * cont.path().r0))?;
    for s in [Complex64::new(0.0, 0.0), Complex64::new(-2.0, 3.0)] {
        let a = cont.laplace_tau(s)?;
        let b = other.laplace_tau(s)?;
        rec.criterion(Criterion::finite(&format!("|L tau({s})|"), a.norm()));
        rec.criterion(Criterion::le(
            &format!("L tau({s}) contour perturbation"),
            (a - b).norm() / (1.0 + a.norm()),
            1e-8,
        ));
        rec.measure(&format!("re L tau({s})"), a.re);
        rec.measure(&format!("im L tau({s})"), a.im);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rate::GrowthTarget;

    fn unit_speed() -> SmoothedGrowth {
        SmoothedGrowth::new(GrowthTarget::constant(2.0 / PI), QuadratureConfig::default())
    }

    fn log_sg() -> SmoothedGrowth {
        SuiteConfig::default().smoothed().unwrap()
    }

    #[test]
    fn half_knots_of_unit_speed() {
        let knots = locate_half_knots(&unit_speed(), 0, 6).unwrap();
        for (k, x) in knots {
            assert!((x - (PI / 2.0 + k as f64 * PI)).abs() < 1e-10, "{k}: {x}");
        }
        assert_eq!(half_knot_range(&unit_speed(), 2.0, 10.0).unwrap(), (1, 2));
        assert!(locate_half_knots(&unit_speed(), 3, 2).is_err());
    }

    #[test]
    fn simpson_reference_for_unit_speed() {
        // ∫₀ˣ e^{u−x} cos u du = (cos x + sin x − e^{−x})/2
        let sg = unit_speed();
        for x in [0.5f64, 3.0, 12.0] {
            let exact = (x.cos() + x.sin() - (-x).exp()) / 2.0;
            assert!((simpson_t_scaled(&sg, x, 1 << 12).unwrap() - exact).abs() < 1e-10);
        }
        assert!(simpson_t_scaled(&sg, 1.0, 7).is_err());
    }

    #[test]
    fn s_is_non_decreasing() {
        let sg = log_sg();
        assert_eq!(eval_s_scaled(&sg, 0.0).unwrap(), 0.0);
        let xs: Vec<f64> = (1..=120).map(|i| 0.25 * i as f64).collect();
        let scaled = eval_s_scaled_many(&sg, &xs).unwrap();
        let s: Vec<f64> = xs.iter().zip(&scaled).map(|(x, v)| x.exp() * v).collect();
        assert!(s.windows(2).all(|w| w[1] >= w[0]));
        assert!(deviation_d(&sg, &RateFunction::log(), 0.0).is_err());
    }

    #[test]
    fn knot_spacing_follows_the_frequency() {
        let sg = log_sg();
        let (k0, k1) = half_knot_range(&sg, 20.0, 40.0).unwrap();
        let knots = locate_half_knots(&sg, k0, k1).unwrap();
        for w in knots.windows(2) {
            let mid = 0.5 * (w[0].1 + w[1].1);
            let expected = PI / sg.v(mid).unwrap();
            assert!(((w[1].1 - w[0].1) / expected - 1.0).abs() < 0.2);
        }
    }

    #[test]
    fn witnesses_alternate_for_log_rate() {
        let sg = log_sg();
        let rho = RateFunction::log();
        let s = omega_pm_witnesses(&sg, &rho, (10.0, 30.0)).unwrap();
        assert!(s.alternating && s.signs_as_predicted);
        assert_eq!(s.count(1) + s.count(-1), s.witnesses.len());
        let t = tau_witnesses(&sg, &rho, (10.0, 30.0)).unwrap();
        assert!(t.alternating && t.signs_as_predicted);
        for (a, b) in s.witnesses.iter().zip(&t.witnesses) {
            assert_eq!(a.sign, -b.sign);
        }
        assert!(omega_pm_witnesses(&sg, &rho, (10.0, 10.5)).is_err());
    }

    #[test]
    fn check_names_round_trip() {
        for id in CheckId::ALL {
            assert_eq!(id.name().parse::<CheckId>().unwrap(), id);
            assert_eq!(serde_json::to_string(&id).unwrap(), format!("\"{}\"", id.name()));
        }
        assert_eq!("lemma21".parse::<CheckId>().unwrap(), CheckId::Smoothing);
        assert_eq!("lemma22".parse::<CheckId>().unwrap(), CheckId::Remainder);
        assert!("nothing".parse::<CheckId>().is_err());
    }

    #[test]
    fn suite_config_validation() {
        let bad = [
            SuiteConfig { witness_range: (5.0, 1.0), ..SuiteConfig::default() },
            SuiteConfig { simpson_intervals: 3, ..SuiteConfig::default() },
            SuiteConfig { remainder_xs: vec![-1.0], ..SuiteConfig::default() },
            SuiteConfig {
                smoothing_grid: GridSpec::new(0.0, 1.0, 3, GridScale::Linear),
                ..SuiteConfig::default()
            },
        ];
        for cfg in bad {
            assert!(run_suite(&cfg).is_err());
        }
    }

    #[test]
    fn selected_checks_only() {
        let cfg = SuiteConfig { checks: vec![CheckId::Residue], ..SuiteConfig::default() };
        let a = run_suite(&cfg).unwrap();
        assert_eq!(a.records.len(), 1);
        assert!(a.record("residue").is_some() && a.record("smoothing").is_none());
        assert!(a.passed());
        let b = run_suite(&cfg).unwrap();
        assert_eq!(a.to_json_without_timings(), b.to_json_without_timings());
    }
}
