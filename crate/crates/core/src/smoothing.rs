//! Poisson smoothing of a growth target on the half-line.
//!
//! `W(y) = ∫₀^∞ ω(x) P(x, y) dx = ∫₀^∞ ω(xy) P(x, 1) dx` with the real-line
//! Poisson kernel `P(x, y) = y/(y² + x²)`. After `x = tan θ` the kernel turns
//! into `dθ`, so `W(y) = ∫₀^{π/2} ω(y tan θ) dθ`; the same substitution gives
//! the derivatives
//!
//! `W⁽ⁿ⁾(y) = (−1)ⁿ n! y⁻ⁿ ∫₀^{π/2} ω(y tan θ) cosⁿ⁻¹θ cos((n+1)θ) dθ`
//!
//! and, for `z = r e^{iα}` with `|α| < π/2`, the analytic extension
//!
//! `W(z) = ∫₀^{π/2} ω(r tan θ) e^{iα} / (sin²θ + e^{2iα} cos²θ) dθ`.
//!
//! Near `θ = π/2` the integrand may blow up like `(π/2 − θ)^{-1/2}` (when
//! `ω(x) ~ √x`); that end is integrated in `w` with `θ = π/2 − w²`.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::Mutex;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_points, QuadratureConfig, Scalar};
use crate::rate::GrowthTarget;

/// Default highest derivative order of `W`.
pub const DEFAULT_N_MAX: usize = 6;

/// Largest `|arg z|` accepted by [`SmoothedGrowth::w_complex`]. The kernel
/// integral converges on the whole open right half-plane; the margin keeps
/// the near-pole of the kernel at `tan²θ = −cos 2α` resolvable.
pub const SECTOR_LIMIT: f64 = 0.45 * std::f64::consts::PI;

const CACHE_CAP: usize = 1 << 20;

/// The Poisson kernel of the real line, `y/(y² + x²)`.
pub fn poisson_kernel(x: f64, y: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::InvalidArgument(format!("Poisson kernel needs y > 0, got {y}")));
    }
    Ok(y / (y * y + x * x))
}

/// `∂ⁿP/∂yⁿ(x, y)` from `P = (i/2)(1/(x+iy) − 1/(x−iy))`:
/// `(i/2)[(−i)ⁿ n!/(x+iy)ⁿ⁺¹ − iⁿ n!/(x−iy)ⁿ⁺¹] = −Im[(−i)ⁿ n! (x+iy)⁻⁽ⁿ⁺¹⁾]`.
pub fn kernel_derivative(n: usize, x: f64, y: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::InvalidArgument(format!("kernel derivative needs y > 0, got {y}")));
    }
    let rotation = match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    };
    let base = Complex64::new(x, y).powi(-(n as i32 + 1));
    Ok(-(rotation * base).im * factorial(n))
}

/// `2ⁿ⁺¹ n! / (y² + x²)^{(n+1)/2}`, the bound on `|∂ⁿP/∂yⁿ|`.
pub fn kernel_derivative_bound(n: usize, x: f64, y: f64) -> f64 {
    2f64.powi(n as i32 + 1) * factorial(n) / (y * y + x * x).powf((n as f64 + 1.0) / 2.0)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Point on the θ-path, with `tan θ`, `cos θ` and `sin θ` evaluated stably
/// near `π/2`.
#[derive(Clone, Copy)]
struct Angle {
    theta: f64,
    tan: f64,
    cos: f64,
    sin: f64,
}

impl Angle {
    fn direct(theta: f64) -> Self {
        Self { theta, tan: theta.tan(), cos: theta.cos(), sin: theta.sin() }
    }

    /// `θ = π/2 − w²`
    fn near_end(w: f64) -> Self {
        let u = w * w;
        Self { theta: FRAC_PI_2 - u, tan: 1.0 / u.tan(), cos: u.sin(), sin: u.cos() }
    }
}

/// `∫₀^{π/2} g(θ) dθ` with `ω`-breakpoints `x_b` mapped to `θ_b = atan(x_b/r)`.
fn theta_integral<T, G>(
    r: f64,
    x_breaks: &[f64],
    extra_angles: &[f64],
    g: G,
    cfg: &QuadratureConfig,
) -> Result<T>
where
    T: Scalar,
    G: Fn(Angle) -> T,
{
    let mut angles: Vec<f64> = x_breaks
        .iter()
        .map(|&xb| (xb / r).atan())
        .chain(extra_angles.iter().copied())
        .filter(|&t| t > 1e-12 && t < FRAC_PI_2 - 1e-9)
        .collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup();

    let split = angles.last().copied().unwrap_or(0.0).max(std::f64::consts::FRAC_PI_4);
    let mut points = vec![0.0];
    points.extend(angles.iter().copied().filter(|&t| t < split));
    points.push(split);

    let head = integrate_points(|theta| g(Angle::direct(theta)), &points, cfg)?;
    let w_end = (FRAC_PI_2 - split).sqrt();
    let tail = integrate_points(|w| g(Angle::near_end(w)) * (2.0 * w), &[0.0, w_end], cfg)?;
    Ok(head.value + tail.value)
}

/// `W(y)` for `y > 0`.
pub fn smooth(target: &GrowthTarget, y: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::InvalidArgument(format!("W(y) needs y > 0, got {y}")));
    }
    theta_integral(y, target.breakpoints(), &[], |a| target.omega(y * a.tan), cfg)
}

/// `W⁽ⁿ⁾(y)` for `n ≥ 1`, from the closed-form kernel derivative.
pub fn smooth_derivative(target: &GrowthTarget, n: usize, y: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if n == 0 {
        return smooth(target, y, cfg);
    }
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::InvalidArgument(format!("W^({n})(y) needs y > 0, got {y}")));
    }
    let m = n as i32;
    let integral = theta_integral(
        y,
        target.breakpoints(),
        &[],
        |a| target.omega(y * a.tan) * a.cos.powi(m - 1) * ((m + 1) as f64 * a.theta).cos(),
        cfg,
    )?;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * factorial(n) * y.powi(-m) * integral)
}

/// `W(z)` for `z` in the sector `|arg z| < SECTOR_LIMIT`.
pub fn smooth_complex(target: &GrowthTarget, z: Complex64, cfg: &QuadratureConfig) -> Result<Complex64> {
    let (r, alpha) = z.to_polar();
    if !(r > 0.0) || !r.is_finite() || alpha.abs() >= SECTOR_LIMIT {
        return Err(Error::OutsideSector { z, limit: SECTOR_LIMIT });
    }
    if alpha == 0.0 {
        return smooth(target, r, cfg).map(|w| Complex64::new(w, 0.0));
    }
    let rot = Complex64::from_polar(1.0, alpha);
    let rot2 = rot * rot;
    // the kernel peaks where sin²θ + cos 2α cos²θ = 0
    let c2 = (2.0 * alpha).cos();
    let peak = if c2 < 0.0 { vec![(-c2).sqrt().atan()] } else { Vec::new() };
    theta_integral(
        r,
        target.breakpoints(),
        &peak,
        |a| rot * target.omega(r * a.tan) / (a.sin * a.sin + rot2 * (a.cos * a.cos)),
        cfg,
    )
}

/// Evaluator handle for `W`, its derivatives, `V`, the phase `φ(y) = yW(y)`
/// and the complex extension, with an internal memo.
///
/// All methods are pure functions of the target and configuration; the memo
/// only short-circuits repeated evaluations at bit-identical arguments.
#[derive(Debug)]
pub struct SmoothedGrowth {
    target: GrowthTarget,
    quad: QuadratureConfig,
    n_max: usize,
    real_cache: Option<Mutex<HashMap<(usize, u64), f64>>>,
    complex_cache: Option<Mutex<HashMap<(u64, u64), Complex64>>>,
}

impl Clone for SmoothedGrowth {
    fn clone(&self) -> Self {
        Self::with_options(self.target.clone(), self.quad, self.n_max, self.real_cache.is_some())
    }
}

impl SmoothedGrowth {
    pub fn new(target: GrowthTarget, quad: QuadratureConfig) -> Self {
        Self::with_options(target, quad, DEFAULT_N_MAX, true)
    }

    pub fn with_options(target: GrowthTarget, quad: QuadratureConfig, n_max: usize, memo: bool) -> Self {
        Self {
            target,
            quad,
            n_max,
            real_cache: memo.then(|| Mutex::new(HashMap::new())),
            complex_cache: memo.then(|| Mutex::new(HashMap::new())),
        }
    }

    pub fn target(&self) -> &GrowthTarget {
        &self.target
    }

    pub fn quad(&self) -> &QuadratureConfig {
        &self.quad
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn omega(&self, x: f64) -> f64 {
        self.target.omega(x)
    }

    fn cached_real(&self, n: usize, y: f64, eval: impl FnOnce() -> Result<f64>) -> Result<f64> {
        let Some(cache) = &self.real_cache else {
            return eval();
        };
        let key = (n, y.to_bits());
        if let Some(&v) = cache.lock().unwrap().get(&key) {
            return Ok(v);
        }
        let v = eval()?;
        let mut guard = cache.lock().unwrap();
        if guard.len() >= CACHE_CAP {
            guard.clear();
        }
        guard.insert(key, v);
        Ok(v)
    }

    pub fn w(&self, y: f64) -> Result<f64> {
        self.cached_real(0, y, || smooth(&self.target, y, &self.quad))
    }

    /// `W⁽ⁿ⁾(y)` for `0 ≤ n ≤ n_max`.
    pub fn derivative(&self, n: usize, y: f64) -> Result<f64> {
        if n > self.n_max {
            return Err(Error::OrderTooHigh { n, n_max: self.n_max });
        }
        self.cached_real(n, y, || smooth_derivative(&self.target, n, y, &self.quad))
    }

    /// `V(y) = W(y) + yW'(y)`, the derivative of the phase.
    pub fn v(&self, y: f64) -> Result<f64> {
        Ok(self.w(y)? + y * self.derivative(1, y)?)
    }

    /// `φ(y) = yW(y)`, extended by `φ(0) = 0`.
    pub fn phase(&self, y: f64) -> Result<f64> {
        if y == 0.0 {
            return Ok(0.0);
        }
        Ok(y * self.w(y)?)
    }

    /// `c_{n,x} = W⁽ⁿ⁾(x)/n!`.
    pub fn taylor_coeff(&self, n: usize, x: f64) -> Result<f64> {
        Ok(self.derivative(n, x)? / factorial(n))
    }

    /// `W(z)` on the sector `|arg z| < SECTOR_LIMIT`.
    pub fn w_complex(&self, z: Complex64) -> Result<Complex64> {
        let Some(cache) = &self.complex_cache else {
            return smooth_complex(&self.target, z, &self.quad);
        };
        let key = (z.re.to_bits(), z.im.to_bits());
        if let Some(&v) = cache.lock().unwrap().get(&key) {
            return Ok(v);
        }
        let v = smooth_complex(&self.target, z, &self.quad)?;
        let mut guard = cache.lock().unwrap();
        if guard.len() >= CACHE_CAP {
            guard.clear();
        }
        guard.insert(key, v);
        Ok(v)
    }

    /// Taylor polynomial of `W` around the real point `x`, evaluated at `z`,
    /// using coefficients up to order `order ≤ n_max`.
    pub fn taylor_polynomial(&self, x: f64, order: usize, z: Complex64) -> Result<Complex64> {
        let h = z - x;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut power = Complex64::new(1.0, 0.0);
        for n in 0..=order {
            acc += power * self.taylor_coeff(n, x)?;
            power *= h;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rate::{growth_target, RateFunction};
    use std::f64::consts::{PI, SQRT_2};

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn poisson_kernel_values() {
        assert_eq!(poisson_kernel(0.0, 1.0).unwrap(), 1.0);
        assert_eq!(poisson_kernel(1.0, 1.0).unwrap(), 0.5);
        assert!((poisson_kernel(3.0, 2.0).unwrap() - 2.0 / 13.0).abs() < 1e-16);
        assert!(poisson_kernel(1.0, 0.0).is_err());
        assert!(poisson_kernel(1.0, -1.0).is_err());
    }

    #[test]
    fn kernel_derivative_values() {
        assert!((kernel_derivative(0, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-16);
        assert!((kernel_derivative(1, 2.0, 1.0).unwrap() - 0.12).abs() < 1e-16);
        assert!(kernel_derivative(2, 1.0, 0.0).is_err());
    }

    #[test]
    fn kernel_derivative_matches_finite_differences() {
        // fourth-order central stencil for the third derivative in y
        let p = |y: f64| poisson_kernel(1.0, y).unwrap();
        let (y, h) = (2.0, 1e-2);
        let fd = (-p(y + 3.0 * h) + 8.0 * p(y + 2.0 * h) - 13.0 * p(y + h) + 13.0 * p(y - h)
            - 8.0 * p(y - 2.0 * h)
            + p(y - 3.0 * h))
            / (8.0 * h * h * h);
        let exact = kernel_derivative(3, 1.0, 2.0).unwrap();
        assert!(((fd - exact) / exact).abs() < 1e-6, "{fd} vs {exact}");
    }

    #[test]
    fn kernel_derivative_bound_holds() {
        for n in 0..=8 {
            for &(x, y) in &[(0.0, 1.0), (0.3, 2.0), (5.0, 0.1), (-2.0, 3.0), (1.0, 1.0)] {
                let v = kernel_derivative(n, x, y).unwrap().abs();
                assert!(v <= kernel_derivative_bound(n, x, y) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn constant_omega_smooths_to_half_pi() {
        let t = GrowthTarget::constant(1.0);
        for y in [0.01, 1.0, 37.0, 1e5] {
            assert!((smooth(&t, y, &cfg()).unwrap() - PI / 2.0).abs() < 1e-13);
            assert!(smooth_derivative(&t, 1, y, &cfg()).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn sqrt_omega_closed_form() {
        // ∫₀^∞ √x/(1+x²) dx = π/√2
        let t = GrowthTarget::power(1.0, 0.5);
        for y in [1.0f64, 4.0, 100.0] {
            let w = smooth(&t, y, &cfg()).unwrap();
            assert!((w - PI / SQRT_2 * y.sqrt()).abs() < 1e-10 * w, "{y}: {w}");
        }
        for y in [1.0f64, 9.0] {
            let wp = smooth_derivative(&t, 1, y, &cfg()).unwrap();
            let exact = PI / (2.0 * SQRT_2) / y.sqrt();
            assert!((wp - exact).abs() < 1e-10 * exact, "{y}: {wp} vs {exact}");
        }
    }

    #[test]
    fn derivative_matches_finite_difference_for_log_rate() {
        let t = growth_target(&RateFunction::log()).unwrap();
        let (y, h) = (5.0, 1e-3);
        let w = |y| smooth(&t, y, &cfg()).unwrap();
        let fd = (w(y - 2.0 * h) - 8.0 * w(y - h) + 8.0 * w(y + h) - w(y + 2.0 * h)) / (12.0 * h);
        let d = smooth_derivative(&t, 1, y, &cfg()).unwrap();
        assert!(d >= 0.0);
        assert!(((fd - d) / d).abs() < 1e-6, "{fd} vs {d}");
    }

    #[test]
    fn complex_extension_restricts_to_real_axis() {
        let sg = SmoothedGrowth::new(growth_target(&RateFunction::log()).unwrap(), cfg());
        let z = Complex64::new(3.0, 0.0);
        let wz = sg.w_complex(z).unwrap();
        assert!((wz.re - sg.w(3.0).unwrap()).abs() < 1e-12 && wz.im == 0.0);
        // approaching the axis from above
        let wz = sg.w_complex(Complex64::from_polar(3.0, 1e-9)).unwrap();
        assert!((wz.re - sg.w(3.0).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn complex_extension_conjugate_symmetry() {
        let sg = SmoothedGrowth::new(growth_target(&RateFunction::log()).unwrap(), cfg());
        let z = Complex64::from_polar(7.0, 0.4);
        let a = sg.w_complex(z).unwrap();
        let b = sg.w_complex(z.conj()).unwrap();
        assert!((a - b.conj()).norm() < 1e-13 * a.norm());
    }

    #[test]
    fn complex_extension_of_power_profile() {
        // ω = √x gives W(z) = (π/√2)√z on the right half-plane
        let t = GrowthTarget::power(1.0, 0.5);
        for &(r, a) in &[(2.0, 0.3), (10.0, -1.0), (50.0, 1.2)] {
            let z = Complex64::from_polar(r, a);
            let w = smooth_complex(&t, z, &cfg()).unwrap();
            let exact = z.sqrt() * (PI / SQRT_2);
            assert!((w - exact).norm() < 1e-10 * exact.norm(), "{z}: {w} vs {exact}");
        }
    }

    #[test]
    fn complex_extension_matches_taylor_series() {
        let sg = SmoothedGrowth::new(growth_target(&RateFunction::log()).unwrap(), cfg());
        let z = Complex64::from_polar(10.0, 0.05);
        let direct = sg.w_complex(z).unwrap();
        // coefficients from W⁽ⁿ⁾ exist up to n_max = 6; the step |z − 10| ≈ 0.5 is
        // a tenth of the convergence radius, so the n ≤ 6 truncation is ~1e-8
        let taylor = sg.taylor_polynomial(10.0, 6, z).unwrap();
        assert!((direct - taylor).norm() < 1e-6 * direct.norm(), "{direct} vs {taylor}");
    }

    #[test]
    fn sector_is_enforced() {
        let sg = SmoothedGrowth::new(GrowthTarget::constant(1.0), cfg());
        assert!(matches!(sg.w_complex(Complex64::new(-1.0, 0.1)), Err(Error::OutsideSector { .. })));
        assert!(sg.w_complex(Complex64::new(0.0, 0.0)).is_err());
        assert!(matches!(sg.derivative(7, 1.0), Err(Error::OrderTooHigh { .. })));
    }

    #[test]
    fn taylor_coefficients() {
        let sg = SmoothedGrowth::new(GrowthTarget::constant(1.0), cfg());
        assert!((sg.taylor_coeff(0, 4.0).unwrap() - PI / 2.0).abs() < 1e-13);
        assert!(sg.taylor_coeff(1, 4.0).unwrap().abs() < 1e-12);

        let sg = SmoothedGrowth::new(growth_target(&RateFunction::log()).unwrap(), cfg());
        let c2 = sg.taylor_coeff(2, 20.0).unwrap();
        let bound = 8.0 * sg.w(20.0).unwrap() / 400.0;
        assert!(c2.abs() <= bound);
    }

    #[test]
    fn memo_is_transparent() {
        let t = growth_target(&RateFunction::log()).unwrap();
        let memo = SmoothedGrowth::with_options(t.clone(), cfg(), 6, true);
        let plain = SmoothedGrowth::with_options(t, cfg(), 6, false);
        for y in [0.5, 3.0, 3.0, 200.0] {
            assert_eq!(memo.w(y).unwrap().to_bits(), plain.w(y).unwrap().to_bits());
            assert_eq!(memo.v(y).unwrap().to_bits(), plain.v(y).unwrap().to_bits());
        }
    }
}
