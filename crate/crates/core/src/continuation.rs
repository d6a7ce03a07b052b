//! Analytic continuation of `F(s) = ∫₀^∞ e^{iφ(x)} e^{-sx} dx` to all of `ℂ`
//! by deforming the half-line into the upper half-plane, and the transforms
//! assembled from it.
//!
//! The path is the segment `[0, R₀]`, the arc `R₀e^{iθ}` for `0 ≤ θ ≤ φ(R₀)`
//! and a ray `r ↦ r e^{iφ(r)}` on `[R₀, R_max]`. Two ray profiles exist:
//!
//! * [`RayProfile::Paper`]: `φ(r) = arctan(W(r)^{-1/2})`, which needs
//!   `W(R₀) > 16` (see [`choose_r0`]);
//! * [`RayProfile::Angle`] / [`RayProfile::Auto`]: a constant angle, fixed or
//!   picked per `s` from [`CANDIDATE_ANGLES`] to minimise the peak of
//!   `Re(izW(z) − sz)` along the ray.
//!
//! Every ray on which the integrand decays defines the same entire function,
//! so the choice only affects conditioning and cost.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oscillatory::eval_tau;
use crate::par::map_ordered;
use crate::quadrature::{integrate, integrate_points, QuadratureConfig, Scalar};
use crate::smoothing::{SmoothedGrowth, SECTOR_LIMIT};
use crate::summation::NeumaierSum;

/// `choose_r0` looks for `W(R₀)` above this value.
pub const R0_THRESHOLD: f64 = 16.0;
pub const R0_SEARCH_CAP: f64 = 1e6;
/// Grid density of the `R₀` search, points per decade.
pub const R0_GRID_PER_DECADE: f64 = 32.0;
pub const R_MAX_CAP: f64 = 1e4;
/// Target for the neglected ray tail.
pub const TRUNCATION_TOL: f64 = 1e-16;
pub const C_EMP_SAFETY: f64 = 2.0;
pub const CANDIDATE_ANGLES: [f64; 6] = [0.15, 0.35, 0.6, 0.85, 1.1, 1.35];
/// Ratio between consecutive radii of the ray scan.
const SCAN_STEP: f64 = 1.090_507_732_665_257_7; // 2^{1/8}
/// Extra cost charged per doubling of `R_max` when ranking angles.
const RADIUS_PENALTY: f64 = 0.05;
/// Offset used for the removable value of `L{τ}` at `s = 0`.
pub const TAU_LIMIT_STEP: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "angle", rename_all = "lowercase")]
pub enum RayProfile {
    Paper,
    Angle(f64),
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourPath {
    pub r0: f64,
    pub profile: RayProfile,
    pub r_max_cap: f64,
}

impl ContourPath {
    pub fn new(r0: f64, profile: RayProfile) -> Self {
        Self { r0, profile, r_max_cap: R_MAX_CAP }
    }

    /// `R₀ = 1` with per-`s` angle selection.
    pub fn auto() -> Self {
        Self::new(1.0, RayProfile::Auto)
    }

    pub fn paper(sg: &SmoothedGrowth) -> Result<Self> {
        Ok(Self::new(choose_r0(sg)?, RayProfile::Paper))
    }

    pub fn with_r0(mut self, r0: f64) -> Self {
        self.r0 = r0;
        self
    }

    pub fn with_r_max_cap(mut self, cap: f64) -> Self {
        self.r_max_cap = cap;
        self
    }

    pub fn validate(&self, sg: &SmoothedGrowth) -> Result<()> {
        if !(self.r0 > 0.0) || !self.r0.is_finite() {
            return Err(Error::InvalidArgument(format!("R0 must be positive, got {}", self.r0)));
        }
        if !(self.r_max_cap >= self.r0) {
            return Err(Error::InvalidArgument(format!(
                "R_max cap {} is below R0 = {}",
                self.r_max_cap, self.r0
            )));
        }
        match self.profile {
            RayProfile::Paper => {
                let w = sg.w(self.r0)?;
                if !(w.powf(-0.5).atan() < (1.0f64 / 3.0).atan()) {
                    return Err(Error::InvalidArgument(format!(
                        "paper ray needs arctan(W(R0)^(-1/2)) < arctan(1/3); W({}) = {w}",
                        self.r0
                    )));
                }
            }
            RayProfile::Angle(theta) => check_angle(theta)?,
            RayProfile::Auto => {}
        }
        Ok(())
    }
}

fn check_angle(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < SECTOR_LIMIT) {
        return Err(Error::InvalidArgument(format!("ray angle {theta} outside (0, {SECTOR_LIMIT})")));
    }
    Ok(())
}

/// Smallest point of the grid `10^{k/32}` (starting at 1) with `W(R₀) > 16`.
pub fn choose_r0(sg: &SmoothedGrowth) -> Result<f64> {
    let mut k = 0.0;
    loop {
        let r = 10f64.powf(k / R0_GRID_PER_DECADE);
        if r > R0_SEARCH_CAP {
            return Err(Error::SearchCap { threshold: R0_THRESHOLD, cap: R0_SEARCH_CAP });
        }
        if sg.w(r)? > R0_THRESHOLD {
            return Ok(r);
        }
        k += 1.0;
    }
}

/// `−r·W(r)·sin φ/2 + (C + |s|)·r`. With `sin φ = (1+W)^{-1/2}` this is the
/// bound for the paper ray.
pub fn decay_bound_formula(r: f64, w: f64, sin_phi: f64, c_emp: f64, s: Complex64) -> f64 {
    -r * w * sin_phi / 2.0 + (c_emp + s.norm()) * r
}

/// The ray actually used for one `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolvedRay {
    /// Constant angle, or `None` for the paper profile.
    pub angle: Option<f64>,
    pub r_max: f64,
    /// Largest sampled `Re(izW(z) − sz) + ln|z'(r)|` on the ray.
    pub peak_exponent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourValue {
    pub s: Complex64,
    pub value: Complex64,
    pub segment: Complex64,
    pub arc: Complex64,
    pub ray: Complex64,
    pub error_estimate: f64,
    pub resolved: ResolvedRay,
    /// Largest log-magnitude of the integrand over the whole path; values
    /// well above 0 mean cancellation.
    pub path_peak: f64,
}

impl ContourValue {
    /// Decimal digits lost to cancellation: `(path_peak − ln|F|)/ln 10`,
    /// floored at zero.
    pub fn cancellation_digits(&self) -> f64 {
        ((self.path_peak - self.value.norm().ln()) / std::f64::consts::LN_10).max(0.0)
    }
}

/// `F(s)` and its derived transforms for one smoothed growth function and path.
#[derive(Debug)]
pub struct Continuation {
    sg: SmoothedGrowth,
    path: ContourPath,
    c_emp: f64,
    tau0: OnceLock<f64>,
}

impl Clone for Continuation {
    fn clone(&self) -> Self {
        let tau0 = OnceLock::new();
        if let Some(&v) = self.tau0.get() {
            let _ = tau0.set(v);
        }
        Self { sg: self.sg.clone(), path: self.path, c_emp: self.c_emp, tau0 }
    }
}

impl Continuation {
    /// Validates the path and calibrates `C_emp` on `[R₀, 4R₀]`.
    pub fn new(sg: SmoothedGrowth, path: ContourPath) -> Result<Self> {
        path.validate(&sg)?;
        let mut this = Self { sg, path, c_emp: 0.0, tau0: OnceLock::new() };
        this.c_emp = this.calibrate()?;
        Ok(this)
    }

    pub fn sg(&self) -> &SmoothedGrowth {
        &self.sg
    }

    pub fn path(&self) -> &ContourPath {
        &self.path
    }

    pub fn c_emp(&self) -> f64 {
        self.c_emp
    }

    fn quad(&self) -> &QuadratureConfig {
        self.sg.quad()
    }

    /// Angle `φ(r)` of the ray point at radius `r`.
    fn ray_angle(&self, angle: Option<f64>, r: f64) -> Result<f64> {
        match angle {
            Some(a) => Ok(a),
            None => Ok(self.sg.w(r)?.powf(-0.5).atan()),
        }
    }

    pub fn ray_point(&self, angle: Option<f64>, r: f64) -> Result<Complex64> {
        Ok(Complex64::from_polar(r, self.ray_angle(angle, r)?))
    }

    /// `dz/dr` on the ray, by the chain rule through `arctan(W^{-1/2})` for
    /// the paper profile.
    pub fn ray_derivative(&self, angle: Option<f64>, r: f64) -> Result<Complex64> {
        match angle {
            Some(a) => Ok(Complex64::from_polar(1.0, a)),
            None => {
                let w = self.sg.w(r)?;
                let wp = self.sg.derivative(1, r)?;
                let phi = w.powf(-0.5).atan();
                let dphi = -wp / (2.0 * w.sqrt() * (w + 1.0));
                Ok(Complex64::from_polar(1.0, phi) * Complex64::new(1.0, r * dphi))
            }
        }
    }

    /// Central-difference `dz/dr`, for cross-checking [`Self::ray_derivative`].
    pub fn ray_derivative_fd(&self, angle: Option<f64>, r: f64) -> Result<Complex64> {
        let h = r * 1e-5;
        Ok((self.ray_point(angle, r + h)? - self.ray_point(angle, r - h)?) / (2.0 * h))
    }

    fn exponent(&self, z: Complex64) -> Result<Complex64> {
        Ok(Complex64::i() * z * self.sg.w_complex(z)?)
    }

    fn calibrate(&self) -> Result<f64> {
        let angles: Vec<Option<f64>> = match self.path.profile {
            RayProfile::Paper => vec![None],
            RayProfile::Angle(a) => vec![Some(a)],
            RayProfile::Auto => CANDIDATE_ANGLES.iter().map(|&a| Some(a)).collect(),
        };
        let mut excess: f64 = 0.0;
        for angle in angles {
            for k in 0..=16 {
                let r = self.path.r0 * 4f64.powf(k as f64 / 16.0);
                let phi = self.ray_angle(angle, r)?;
                let z = Complex64::from_polar(r, phi);
                let actual = self.exponent(z)?.re;
                let lead = decay_bound_formula(r, self.sg.w(r)?, phi.sin(), 0.0, Complex64::new(0.0, 0.0));
                excess = excess.max((actual - lead) / r);
            }
        }
        Ok(C_EMP_SAFETY * excess)
    }

    /// Decay bound for the ray used at `s`, in log-magnitude.
    pub fn decay_bound(&self, r: f64, s: Complex64) -> Result<f64> {
        let ray = self.resolve(s)?;
        let phi = self.ray_angle(ray.angle, r)?;
        Ok(decay_bound_formula(r, self.sg.w(r)?, phi.sin(), self.c_emp, s))
    }

    /// Scans the ray on `R₀·2^{k/8}` and returns the truncation radius and
    /// peak exponent. The ray is cut at the first scan point where the
    /// sampled integrand, extrapolated by its local decay rate, leaves a tail
    /// below [`TRUNCATION_TOL`]; `R_max` is then rounded up to `R₀·2^j`.
    fn scan(&self, angle: Option<f64>, s: Complex64, give_up_above: f64) -> Result<Option<ResolvedRay>> {
        let r0 = self.path.r0;
        let cap = self.path.r_max_cap;
        let log_tol = TRUNCATION_TOL.ln();
        let mut peak = f64::NEG_INFINITY;
        let mut prev: Option<(f64, f64)> = None;
        let mut k = 0i32;
        loop {
            let r = r0 * SCAN_STEP.powi(k);
            if r > cap * (1.0 + 1e-12) {
                return Ok(None);
            }
            let z = self.ray_point(angle, r)?;
            let e = (self.exponent(z)? - s * z).re + self.ray_derivative(angle, r)?.norm().ln();
            peak = peak.max(e);
            if peak > give_up_above {
                return Ok(None);
            }
            if let Some((r_prev, e_prev)) = prev {
                let slope = (e - e_prev) / (r - r_prev);
                if slope < 0.0 && e - (-slope).ln() < log_tol {
                    let doublings = (r / r0).log2().ceil().max(0.0);
                    let r_max = (r0 * 2f64.powf(doublings)).min(cap).max(r);
                    return Ok(Some(ResolvedRay { angle, r_max, peak_exponent: peak }));
                }
            }
            prev = Some((r, e));
            k += 1;
        }
    }

    /// Ray and truncation radius for `s`.
    pub fn resolve(&self, s: Complex64) -> Result<ResolvedRay> {
        let found = match self.path.profile {
            RayProfile::Paper => self.scan(None, s, f64::INFINITY)?,
            RayProfile::Angle(a) => self.scan(Some(a), s, f64::INFINITY)?,
            RayProfile::Auto => {
                let mut best: Option<(f64, ResolvedRay)> = None;
                for &a in &CANDIDATE_ANGLES {
                    let limit = best.map_or(f64::INFINITY, |(score, _)| score);
                    if let Some(ray) = self.scan(Some(a), s, limit)? {
                        let score = ray.peak_exponent + RADIUS_PENALTY * (ray.r_max / self.path.r0).log2();
                        if best.is_none_or(|(b, _)| score < b) {
                            best = Some((score, ray));
                        }
                    }
                }
                best.map(|(_, ray)| ray)
            }
        };
        found.ok_or(Error::TruncationCap { s, cap: self.path.r_max_cap })
    }

    /// `F(s)` along the deformed contour.
    pub fn contour_f(&self, s: Complex64) -> Result<ContourValue> {
        if !(s.re.is_finite() && s.im.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite s = {s}")));
        }
        let ray = self.resolve(s)?;
        self.contour_f_on(s, ray)
    }

    /// [`Self::contour_f`] along an explicitly chosen ray.
    pub fn contour_f_on(&self, s: Complex64, ray: ResolvedRay) -> Result<ContourValue> {
        if let Some(a) = ray.angle {
            check_angle(a)?;
        }
        if !(ray.r_max >= self.path.r0) || !ray.r_max.is_finite() {
            return Err(Error::InvalidArgument(format!("R_max = {} is below R0", ray.r_max)));
        }
        let r0 = self.path.r0;
        let cfg = *self.quad();

        let segment = guarded(|fail| {
            integrate(
                |x| match self.sg.phase(x) {
                    Ok(p) => Complex64::new(0.0, p).exp() * (-s * x).exp(),
                    Err(e) => fail(e),
                },
                0.0,
                r0,
                &cfg,
            )
        })?;

        let theta_end = self.ray_angle(ray.angle, r0)?;
        let arc = guarded(|fail| {
            integrate(
                |t| {
                    let z = Complex64::from_polar(r0, t);
                    match self.exponent(z) {
                        Ok(e) => (e - s * z).exp() * Complex64::i() * z,
                        Err(err) => fail(err),
                    }
                },
                0.0,
                theta_end,
                &cfg,
            )
        })?;

        let mut edges = vec![r0];
        while *edges.last().unwrap() < ray.r_max * (1.0 - 1e-12) {
            let next = (edges.last().unwrap() * 2.0).min(ray.r_max);
            edges.push(next);
        }
        let ray_est = guarded(|fail| {
            integrate_points(
                |r| {
                    let eval = || -> Result<Complex64> {
                        let z = self.ray_point(ray.angle, r)?;
                        Ok((self.exponent(z)? - s * z).exp() * self.ray_derivative(ray.angle, r)?)
                    };
                    match eval() {
                        Ok(v) => v,
                        Err(e) => fail(e),
                    }
                },
                &edges,
                &cfg,
            )
        })?;

        let mut path_peak = ray.peak_exponent.max((-s.re * r0).max(0.0));
        for k in 0..=16 {
            let z = Complex64::from_polar(r0, theta_end * k as f64 / 16.0);
            path_peak = path_peak.max((self.exponent(z)? - s * z).re + r0.ln());
        }
        Ok(ContourValue {
            s,
            value: segment.value + arc.value + ray_est.value,
            segment: segment.value,
            arc: arc.value,
            ray: ray_est.value,
            error_estimate: segment.error + arc.error + ray_est.error,
            resolved: ray,
            path_peak,
        })
    }

    /// `L{cos φ; s} = (F(s) + conj F(conj s))/2`.
    pub fn laplace_cos(&self, s: Complex64) -> Result<Complex64> {
        let a = self.contour_f(s)?.value;
        let b = self.contour_f(s.conj())?.value;
        Ok((a + b.conj()) / 2.0)
    }

    /// Laplace–Stieltjes transform of `dS = eˣ(1 + cos φ(x)) dx`:
    /// `1/(s−1) + L{cos φ; s−1}`.
    pub fn laplace_ds(&self, s: Complex64) -> Result<Complex64> {
        if s == Complex64::new(1.0, 0.0) {
            return Err(Error::Pole(s));
        }
        let one = Complex64::new(1.0, 0.0);
        Ok(one / (s - one) + self.laplace_cos(s - one)?)
    }

    /// `τ(0) = ∫₀^∞ cos φ`, computed once.
    pub fn tau0(&self) -> Result<f64> {
        if let Some(&v) = self.tau0.get() {
            return Ok(v);
        }
        let v = eval_tau(&self.sg, 0.0)?;
        let _ = self.tau0.set(v);
        Ok(v)
    }

    /// `L{τ; s} = (τ(0) − L{cos φ; s})/s`. At `s = 0` the mean over
    /// `±h, ±ih`; for `0 < |s| < h` the Cauchy formula on `|ζ| = 4h`.
    pub fn laplace_tau(&self, s: Complex64) -> Result<Complex64> {
        let h = TAU_LIMIT_STEP;
        if s.norm() >= h {
            return self.tau_quotient(s);
        }
        if s == Complex64::new(0.0, 0.0) {
            let pts = [h, -h].map(|v| Complex64::new(v, 0.0));
            let pts = [pts[0], pts[1], Complex64::new(0.0, h), Complex64::new(0.0, -h)];
            let vals = map_ordered(&pts, |&p| self.tau_quotient(p));
            let mut acc = Complex64::new(0.0, 0.0);
            for v in vals {
                acc += v?;
            }
            return Ok(acc / 4.0);
        }
        let n = 32;
        let radius = 4.0 * h;
        let nodes: Vec<Complex64> =
            (0..n).map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64)).collect();
        let vals = map_ordered(&nodes, |&z| self.tau_quotient(z));
        let mut acc = Complex64::new(0.0, 0.0);
        for (z, v) in nodes.iter().zip(vals) {
            acc += v? * z / (z - s);
        }
        Ok(acc / n as f64)
    }

    fn tau_quotient(&self, s: Complex64) -> Result<Complex64> {
        Ok((self.tau0()? - self.laplace_cos(s)?) / s)
    }

    /// [`Self::contour_f`] over many points, in parallel.
    pub fn contour_f_many(&self, ss: &[Complex64]) -> Vec<Result<ContourValue>> {
        map_ordered(ss, |&s| self.contour_f(s))
    }
}

/// Runs a quadrature whose integrand can fail, returning the first failure.
fn guarded<T, Q>(run: Q) -> Result<crate::quadrature::Estimate<T>>
where
    T: Scalar,
    Q: FnOnce(&mut dyn FnMut(Error) -> T) -> Result<crate::quadrature::Estimate<T>>,
{
    let mut failure = None;
    let est = run(&mut |e| {
        failure.get_or_insert(e);
        T::zero()
    });
    match failure {
        Some(e) => Err(e),
        None => est,
    }
}

/// A circle integral together with `max |G|` over the nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleIntegral {
    pub value: Complex64,
    pub max_abs: f64,
}

/// `(1/2πi)∮ G(s) ds` over `|s − s0| = radius` by the `n`-point trapezoid rule.
pub fn cauchy_circle<G>(g: G, s0: Complex64, radius: f64, n: usize) -> Result<Complex64>
where
    G: Fn(Complex64) -> Result<Complex64> + Sync + Send,
{
    cauchy_circle_detailed(g, s0, radius, n).map(|c| c.value)
}

/// [`cauchy_circle`] that also reports the largest `|G|` on the circle.
pub fn cauchy_circle_detailed<G>(g: G, s0: Complex64, radius: f64, n: usize) -> Result<CircleIntegral>
where
    G: Fn(Complex64) -> Result<Complex64> + Sync + Send,
{
    if n < 16 {
        return Err(Error::InvalidArgument(format!("cauchy_circle needs N >= 16, got {n}")));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!("bad circle radius {radius}")));
    }
    let offsets: Vec<Complex64> =
        (0..n).map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64)).collect();
    let vals = map_ordered(&offsets, |&d| g(s0 + d));
    let mut re = NeumaierSum::new();
    let mut im = NeumaierSum::new();
    let mut max_abs: f64 = 0.0;
    for (d, v) in offsets.iter().zip(vals) {
        let v = v?;
        max_abs = max_abs.max(v.norm());
        let t = v * d;
        re.add(t.re);
        im.add(t.im);
    }
    Ok(CircleIntegral { value: Complex64::new(re.total(), im.total()) / n as f64, max_abs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillatory::{direct_cutoff, direct_f, direct_real_laplace, eval_tau_many};
    use crate::quadrature::QuadratureConfig;
    use crate::rate::{growth_target, GrowthTarget, RateFunction};
    use std::f64::consts::SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_speed() -> Continuation {
        // W ≡ 1, so F(s) = 1/(s − i)
        let sg = SmoothedGrowth::new(GrowthTarget::constant(2.0 / PI), QuadratureConfig::default());
        Continuation::new(sg, ContourPath::auto()).unwrap()
    }

    fn sqrt_sg() -> SmoothedGrowth {
        SmoothedGrowth::new(GrowthTarget::power(1.0, 0.5), QuadratureConfig::default())
    }

    fn log_sg() -> SmoothedGrowth {
        SmoothedGrowth::new(growth_target(&RateFunction::log()).unwrap(), QuadratureConfig::default())
    }

    #[test]
    fn r0_for_square_root_growth() {
        // W(y) = (π/√2)√y exceeds 16 once y > (16√2/π)²
        let y = (16.0 * SQRT_2 / PI).powi(2);
        let k = (y.log10() * 32.0).ceil();
        let expected = 10f64.powf(k / 32.0);
        assert!((choose_r0(&sqrt_sg()).unwrap() - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn r0_search_gives_up_on_slow_growth() {
        assert!(matches!(choose_r0(&log_sg()), Err(Error::SearchCap { .. })));
    }

    #[test]
    fn decay_bound_example() {
        let w: f64 = 100.0;
        let b = decay_bound_formula(10.0, w, 1.0 / (1.0 + w).sqrt(), 0.0, c(0.0, 10.0));
        assert!((b - (-500.0 / 101f64.sqrt() + 100.0)).abs() < 1e-12);
    }

    #[test]
    fn ray_tangent_matches_finite_difference() {
        let sg = sqrt_sg();
        let cont = Continuation::new(sg.clone(), ContourPath::paper(&sg).unwrap()).unwrap();
        for angle in [None, Some(0.6)] {
            for r in [60.0, 300.0] {
                let a = cont.ray_derivative(angle, r).unwrap();
                let b = cont.ray_derivative_fd(angle, r).unwrap();
                assert!((a - b).norm() < 1e-8 * a.norm(), "{angle:?} {r}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn paths_are_validated() {
        let sg = log_sg();
        assert!(Continuation::new(sg.clone(), ContourPath::new(-1.0, RayProfile::Auto)).is_err());
        assert!(Continuation::new(sg.clone(), ContourPath::new(1.0, RayProfile::Angle(1.5))).is_err());
        assert!(Continuation::new(sg.clone(), ContourPath::new(1.0, RayProfile::Paper)).is_err());
        assert!(Continuation::new(sg, ContourPath::auto().with_r_max_cap(0.5)).is_err());
    }

    #[test]
    fn circle_rule_on_rational_functions() {
        let one = c(1.0, 0.0);
        let r = cauchy_circle(|s| Ok(one / (s - one)), one, 0.3, 64).unwrap();
        assert!((r - one).norm() < 1e-12);
        let r = cauchy_circle(|s| Ok(s * s), c(-2.0, 3.0), 0.5, 16).unwrap();
        assert!(r.norm() < 1e-12);
        let d = cauchy_circle_detailed(Ok, c(5.0, 0.0), 1.0, 32).unwrap();
        assert!((d.max_abs - 6.0).abs() < 1e-12);
        assert!(cauchy_circle(Ok, one, 1.0, 8).is_err());
        assert!(cauchy_circle(Ok, one, 0.0, 32).is_err());
    }

    #[test]
    fn constant_speed_continues_to_a_simple_pole() {
        let cont = unit_speed();
        let i = c(0.0, 1.0);
        // a constant-angle ray reaches s only when (Im s − 1) sin θ < Re s cos θ
        for s in [c(2.0, 0.0), c(-1.0, 0.0), c(0.5, 2.0), c(-2.0, -1.0), c(0.0, -1.0)] {
            let f = cont.contour_f(s).unwrap().value;
            let exact = 1.0 / (s - i);
            assert!((f - exact).norm() < 1e-9 * exact.norm(), "{s}: {f} vs {exact}");
        }
        for s in [c(-1.0, 0.0), c(1.0, 0.5), c(3.0, 0.0)] {
            let lcos = cont.laplace_cos(s).unwrap();
            let exact = s / (s * s + 1.0);
            assert!((lcos - exact).norm() < 1e-9 * (1.0 + exact.norm()), "{s}: {lcos} vs {exact}");
        }
        assert!(matches!(cont.contour_f(c(-2.0, 3.0)), Err(Error::TruncationCap { .. })));
    }

    #[test]
    fn pole_of_the_stieltjes_transform() {
        let cont = unit_speed();
        assert!(matches!(cont.laplace_ds(c(1.0, 0.0)), Err(Error::Pole(_))));
        let r = cauchy_circle(|s| cont.laplace_ds(s), c(1.0, 0.0), 0.3, 64).unwrap();
        assert!((r - 1.0).norm() < 1e-9, "{r}");
    }

    #[test]
    fn contour_matches_direct_integral() {
        let cont = Continuation::new(log_sg(), ContourPath::auto()).unwrap();
        for s in [c(1.0, 0.0), c(2.0, -5.0)] {
            let v = cont.contour_f(s).unwrap();
            let d = direct_f(cont.sg(), s, direct_cutoff(s, 1e-13).unwrap()).unwrap().value;
            assert!((v.value - d).norm() < 1e-8 * (1.0 + d.norm()), "{s}");
            assert!(v.cancellation_digits() < 3.0);
        }
        let real = cont.laplace_cos(c(-1.0, 0.0)).unwrap();
        assert!(real.im.abs() < 1e-12 * (1.0 + real.norm()));
    }

    #[test]
    fn paper_profile_agrees_with_auto() {
        let sg = sqrt_sg();
        let paper = Continuation::new(sg.clone(), ContourPath::paper(&sg).unwrap()).unwrap();
        let auto = Continuation::new(sg, ContourPath::auto()).unwrap();
        let s = c(2.0, 1.0);
        let a = paper.contour_f(s).unwrap().value;
        let b = auto.contour_f(s).unwrap().value;
        assert!((a - b).norm() < 1e-10 * a.norm(), "{a} vs {b}");
        assert!(paper.contour_f(s).unwrap().resolved.angle.is_none());
    }

    #[test]
    fn tau_transform_is_regular_at_zero() {
        let cont = Continuation::new(log_sg(), ContourPath::auto()).unwrap();
        let at0 = cont.laplace_tau(c(0.0, 0.0)).unwrap();
        let near = cont.laplace_tau(c(3e-3, -2e-3)).unwrap();
        let out = cont.laplace_tau(c(0.05, 0.0)).unwrap();
        assert!(at0.norm().is_finite());
        assert!((at0 - near).norm() < 1e-2 * (1.0 + at0.norm()));
        assert!((near - out).norm() < 0.1 * (1.0 + at0.norm()));
    }

    #[test]
    fn derived_transforms_match_direct_quadrature() {
        let cont = Continuation::new(log_sg(), ContourPath::auto()).unwrap();
        let sg = cont.sg();
        let s = c(2.0, 0.0);
        let direct = direct_real_laplace(sg, s, |_, p| p.cos()).unwrap();
        assert!((cont.laplace_cos(s).unwrap() - direct).norm() < 1e-9);

        let s = c(3.0, 1.0);
        let direct = direct_real_laplace(sg, s - 1.0, |_, p| 1.0 + p.cos()).unwrap();
        assert!((cont.laplace_ds(s).unwrap() - direct).norm() < 1e-9 * (1.0 + direct.norm()));

        // ∫₀^∞ τ(x) e^{-2x} dx by composite Simpson on [0, 24]
        let n = 4800;
        let h = 24.0 / n as f64;
        let xs: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
        let tau = eval_tau_many(sg, &xs).unwrap();
        let mut acc = crate::summation::NeumaierSum::new();
        for (i, (&x, &t)) in xs.iter().zip(&tau).enumerate() {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc.add(w * t * (-2.0 * x).exp());
        }
        let direct = acc.total() * h / 3.0;
        let lt = cont.laplace_tau(c(2.0, 0.0)).unwrap();
        assert!((lt - direct).norm() < 1e-8, "{lt} vs {direct}");
    }

    #[test]
    fn stable_under_longer_truncation() {
        let cont = Continuation::new(log_sg(), ContourPath::auto()).unwrap();
        for s in [c(-1.0, 0.0), c(-2.0, 3.0)] {
            let ray = cont.resolve(s).unwrap();
            let a = cont.contour_f_on(s, ray).unwrap().value;
            let longer = ResolvedRay { r_max: 1.2 * ray.r_max, ..ray };
            let b = cont.contour_f_on(s, longer).unwrap().value;
            assert!((a - b).norm() < 1e-9 * a.norm(), "{s}: {a} vs {b}");
        }
        let ray = cont.resolve(c(2.0, 0.0)).unwrap();
        assert!(cont.contour_f_on(c(2.0, 0.0), ResolvedRay { r_max: 0.5, ..ray }).is_err());
    }
}
