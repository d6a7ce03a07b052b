//! Oscillatory integrals against the monotone phase `φ(u) = uW(u)`.
//!
//! Every integral here is split at the points where `φ` crosses a multiple of
//! `π`. Between two such knots the integrand makes half an oscillation, so a
//! Gauss–Kronrod panel resolves it with a handful of subdivisions at most.
//! Panel contributions are combined in a fixed order with compensated
//! summation.
//!
//! Exponentially weighted quantities are returned scaled by `e^{-x}`: the
//! weight `eᵘ` is rewritten as `e^{u−x} ≤ 1` on `[0, x]`.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::map_ordered;
use crate::quadrature::{integrate, Scalar};
use crate::roots::brent;
use crate::smoothing::SmoothedGrowth;
use crate::summation::{ComplexSum, NeumaierSum};

/// Relative tolerance for phase knots and half-knots.
pub const KNOT_REL_TOL: f64 = 1e-13;

/// Number of integration-by-parts terms in the `τ` tail (needs `W` up to
/// order `TAIL_TERMS + 1`).
pub const TAIL_TERMS: usize = 4;

/// Safety factor applied to the tail remainder estimate when picking `Y`.
pub const TAIL_SAFETY: f64 = 4.0;

/// Knots of `φ` on an interval: the points where `φ(u) = kπ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePartition {
    pub x0: f64,
    pub x1: f64,
    /// Multiple of `π` hit at `knots[0]`.
    pub first_multiple: i64,
    pub knots: Vec<f64>,
}

impl PhasePartition {
    /// `[x0, knots..., x1]`
    pub fn panel_edges(&self) -> Vec<f64> {
        let mut edges = Vec::with_capacity(self.knots.len() + 2);
        edges.push(self.x0);
        edges.extend(self.knots.iter().copied());
        edges.push(self.x1);
        edges
    }
}

/// Solves `φ(u) = target` on `[lo, hi]` (the root must be bracketed).
pub fn solve_phase(sg: &SmoothedGrowth, target: f64, lo: f64, hi: f64) -> Result<f64> {
    brent(|u| Ok(sg.phase(u)? - target), lo, hi, KNOT_REL_TOL, 200)
}

/// All `u ∈ (x0, x1)` with `φ(u) ≡ 0 (mod π)`, ascending.
pub fn phase_panels(sg: &SmoothedGrowth, x0: f64, x1: f64) -> Result<PhasePartition> {
    if !(x0 >= 0.0) || !(x1 > x0) || !x1.is_finite() {
        return Err(Error::InvalidArgument(format!("phase partition needs 0 <= x0 < x1, got [{x0}, {x1}]")));
    }
    let (p0, p1) = (sg.phase(x0)?, sg.phase(x1)?);
    if p1 <= p0 {
        return Err(Error::InvalidArgument(format!("phase is not increasing on [{x0}, {x1}]")));
    }
    let k_lo = (p0 / PI).floor() as i64 + 1;
    let k_hi = (p1 / PI).ceil() as i64 - 1;
    let mut knots = Vec::with_capacity((k_hi - k_lo + 1).max(0) as usize);
    let mut lo = x0;
    for k in k_lo..=k_hi {
        let u = solve_phase(sg, k as f64 * PI, lo, x1)?;
        knots.push(u);
        lo = u;
    }
    Ok(PhasePartition { x0, x1, first_multiple: k_lo, knots })
}

/// `∫_a^b f(u, φ(u)) du`, panel by panel over the phase partition.
pub fn phase_integral<T, F>(sg: &SmoothedGrowth, a: f64, b: f64, f: F) -> Result<(T, usize)>
where
    T: Scalar,
    F: Fn(f64, f64) -> T + Sync + Send,
{
    if a == b {
        return Ok((T::zero(), 0));
    }
    let partition = phase_panels(sg, a, b)?;
    let edges = partition.panel_edges();
    let panels: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
    let cfg = *sg.quad();
    let values = map_ordered(&panels, |&(lo, hi)| {
        let mut failure = None;
        let est = integrate(
            |u| match sg.phase(u) {
                Ok(p) => f(u, p),
                Err(e) => {
                    failure.get_or_insert(e);
                    T::zero()
                }
            },
            lo,
            hi,
            &cfg,
        );
        match failure {
            Some(e) => Err(e),
            None => est.map(|e| e.value),
        }
    });
    let values = values.into_iter().collect::<Result<Vec<T>>>()?;
    Ok((sum_scalars(&values), panels.len()))
}

fn sum_scalars<T: Scalar>(values: &[T]) -> T {
    T::from_complex(values.iter().map(|v| v.to_complex()).collect::<ComplexSum>().total())
}

/// `e^{-x} T(x) = ∫₀ˣ e^{u−x} cos φ(u) du`.
pub fn eval_t_scaled(sg: &SmoothedGrowth, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!("T(x) needs x >= 0, got {x}")));
    }
    let (v, _) = phase_integral(sg, 0.0, x, |u, p| (u - x).exp() * p.cos())?;
    Ok(v)
}

/// `e^{-x} T(x)` at every point of an ascending list, accumulating panel
/// integrals between consecutive points.
pub fn eval_t_scaled_many(sg: &SmoothedGrowth, xs: &[f64]) -> Result<Vec<f64>> {
    check_ascending(xs)?;
    let mut edges = vec![0.0];
    edges.extend(xs.iter().copied());
    let pieces = map_ordered(&edges.windows(2).map(|w| (w[0], w[1])).collect::<Vec<_>>(), |&(a, b)| {
        phase_integral(sg, a, b, |u, p| (u - b).exp() * p.cos()).map(|(v, _)| v)
    });
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    for (piece, w) in pieces.into_iter().zip(edges.windows(2)) {
        acc = acc * (w[0] - w[1]).exp() + piece?;
        out.push(acc);
    }
    Ok(out)
}

/// The main term `sin φ(x) / V(x)` of `e^{-x} T(x)`.
pub fn eval_t_main(sg: &SmoothedGrowth, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidArgument(format!("main term needs x > 0, got {x}")));
    }
    Ok(sg.phase(x)?.sin() / sg.v(x)?)
}

/// Truncated Taylor series `Σ c_k hᵏ` about a fixed point.
#[derive(Debug, Clone)]
struct Jet(Vec<f64>);

impl Jet {
    fn order(&self) -> usize {
        self.0.len() - 1
    }

    fn mul(&self, other: &Jet) -> Jet {
        let m = self.order().min(other.order());
        Jet((0..=m).map(|n| (0..=n).map(|k| self.0[k] * other.0[n - k]).sum()).collect())
    }

    fn recip(&self) -> Jet {
        let a0 = self.0[0];
        let mut r = vec![1.0 / a0];
        for n in 1..=self.order() {
            let s: f64 = (1..=n).map(|k| self.0[k] * r[n - k]).sum();
            r.push(-s / a0);
        }
        Jet(r)
    }

    fn derivative(&self) -> Jet {
        Jet((1..self.0.len()).map(|k| k as f64 * self.0[k]).collect())
    }
}

/// Coefficients `Dᵏ(1/V)(Y)` for `k = 0..=terms`, where `D = (1/V) d/du` is
/// differentiation with respect to the phase.
fn phase_derivatives_of_inverse_v(sg: &SmoothedGrowth, y: f64, terms: usize) -> Result<Vec<f64>> {
    // W jet up to order terms + 1 gives V = W + uW' to order terms.
    let mut w = Vec::with_capacity(terms + 2);
    let mut fact = 1.0;
    for n in 0..=terms + 1 {
        if n > 0 {
            fact *= n as f64;
        }
        w.push(sg.derivative(n, y)? / fact);
    }
    let w = Jet(w);
    let wp = w.derivative();
    let mut u = vec![0.0; terms + 1];
    u[0] = y;
    if terms >= 1 {
        u[1] = 1.0;
    }
    let uwp = Jet(u).mul(&wp);
    let v = Jet((0..=terms).map(|k| w.0[k] + uwp.0[k]).collect());
    let inv_v = v.recip();

    let mut out = Vec::with_capacity(terms + 1);
    let mut current = inv_v.clone();
    out.push(current.0[0]);
    for _ in 0..terms {
        current = current.derivative().mul(&inv_v);
        out.push(current.0[0]);
    }
    Ok(out)
}

/// Asymptotic tail `∫_Y^∞ e^{iφ(u)} du = i e^{iφ(Y)} Σ_{k<K} iᵏ Dᵏ(1/V)(Y)`,
/// with the remainder bounded by `2|Dᴷ(1/V)(Y)|`.
#[derive(Debug, Clone, Copy)]
pub struct Tail {
    pub value: Complex64,
    pub remainder_bound: f64,
}

pub fn oscillatory_tail(sg: &SmoothedGrowth, y: f64) -> Result<Tail> {
    let terms = TAIL_TERMS.min(sg.n_max().saturating_sub(1)).max(1);
    let d = phase_derivatives_of_inverse_v(sg, y, terms)?;
    let i = Complex64::i();
    let mut series = Complex64::new(0.0, 0.0);
    let mut ik = Complex64::new(1.0, 0.0);
    for dk in d.iter().take(terms) {
        series += ik * *dk;
        ik *= i;
    }
    let value = i * Complex64::from_polar(1.0, sg.phase(y)?) * series;
    Ok(Tail { value, remainder_bound: 2.0 * d[terms].abs() })
}

/// Picks the cutoff `Y ≥ x` for the τ tail: the first `Y` in a geometric
/// sequence with `TAIL_SAFETY · remainder < abs_tol`.
pub fn tail_cutoff(sg: &SmoothedGrowth, x: f64) -> Result<(f64, Tail)> {
    let tol = sg.quad().abs_tol;
    let cap = sg.quad().tail_cutoff;
    let mut y = x.max(1.0);
    loop {
        let tail = oscillatory_tail(sg, y)?;
        if TAIL_SAFETY * tail.remainder_bound < tol {
            return Ok((y, tail));
        }
        if y >= cap {
            return Err(Error::TailCap { tolerance: tol, cap });
        }
        y = (y * 1.25).min(cap);
    }
}

/// `τ(x) = ∫_x^∞ cos φ(u) du` for `x ≥ 0`.
pub fn eval_tau(sg: &SmoothedGrowth, x: f64) -> Result<f64> {
    Ok(eval_tau_many(sg, &[x])?[0])
}

/// `τ` at every point of an ascending list. One tail is computed beyond the
/// largest point and the panels between consecutive points are accumulated
/// downwards.
pub fn eval_tau_many(sg: &SmoothedGrowth, xs: &[f64]) -> Result<Vec<f64>> {
    check_ascending(xs)?;
    if xs.is_empty() {
        return Ok(Vec::new());
    }
    if xs[0] < 0.0 {
        return Err(Error::InvalidArgument(format!("tau(x) needs x >= 0, got {}", xs[0])));
    }
    let last = *xs.last().unwrap();
    let (y, tail) = tail_cutoff(sg, last)?;
    let mut edges: Vec<f64> = xs.to_vec();
    edges.push(y);
    let pieces = map_ordered(&edges.windows(2).map(|w| (w[0], w[1])).collect::<Vec<_>>(), |&(a, b)| {
        phase_integral(sg, a, b, |_, p| p.cos()).map(|(v, _)| v)
    });
    let pieces = pieces.into_iter().collect::<Result<Vec<f64>>>()?;
    let mut out = vec![0.0; xs.len()];
    let mut acc = NeumaierSum::new();
    acc.add(tail.value.re);
    for (i, piece) in pieces.iter().enumerate().rev() {
        acc.add(*piece);
        out[i] = acc.total();
    }
    Ok(out)
}

/// `∫_a^b cos φ(u) du`.
pub fn cos_phase_integral(sg: &SmoothedGrowth, a: f64, b: f64) -> Result<f64> {
    phase_integral(sg, a, b, |_, p| p.cos()).map(|(v, _)| v)
}

/// Truncated direct Laplace integral `∫₀^R e^{iφ(x)} e^{-sx} dx`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DirectF {
    pub value: Complex64,
    pub r_trunc: f64,
    /// `e^{-Re s·R}/Re s`
    pub truncation_bound: f64,
}

/// Cutoff with `e^{-Re s·R}/Re s ≤ abs_tol`.
pub fn direct_cutoff(s: Complex64, abs_tol: f64) -> Result<f64> {
    if !(s.re > 0.0) {
        return Err(Error::InvalidArgument(format!("direct Laplace integral needs Re s > 0, got s = {s}")));
    }
    Ok(((1.0 / (abs_tol * s.re)).ln() / s.re).max(1.0))
}

pub fn direct_f(sg: &SmoothedGrowth, s: Complex64, r_trunc: f64) -> Result<DirectF> {
    direct_laplace(sg, s, r_trunc, 1.0)
}

/// `∫₀^R e^{i·sign·φ(x)} e^{-sx} dx`; `sign = −1` gives the conjugate-phase variant.
pub fn direct_laplace(sg: &SmoothedGrowth, s: Complex64, r_trunc: f64, sign: f64) -> Result<DirectF> {
    if !(s.re > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "direct Laplace integral needs Re s > 0 (use the contour continuation), got s = {s}"
        )));
    }
    if !(r_trunc > 0.0) || !r_trunc.is_finite() {
        return Err(Error::InvalidArgument(format!("bad truncation radius {r_trunc}")));
    }
    let (value, _) =
        phase_integral(sg, 0.0, r_trunc, |u, p| Complex64::new(-s.re * u, sign * p - s.im * u).exp())?;
    Ok(DirectF { value, r_trunc, truncation_bound: (-s.re * r_trunc).exp() / s.re })
}

/// Direct quadrature of `∫₀^∞ g(x) e^{-sx} dx` for a real weight `g(x, φ(x))`.
pub fn direct_real_laplace<G>(sg: &SmoothedGrowth, s: Complex64, g: G) -> Result<Complex64>
where
    G: Fn(f64, f64) -> f64 + Sync + Send,
{
    let r = direct_cutoff(s, sg.quad().abs_tol * 1e-2)?;
    phase_integral(sg, 0.0, r, |u, p| (-s * u).exp() * g(u, p)).map(|(v, _)| v)
}

fn check_ascending(xs: &[f64]) -> Result<()> {
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("evaluation points must be strictly ascending".into()));
    }
    Ok(())
}

/// `mantissa · e^{log_scale}` with `|mantissa| ∈ [1, 10)` (or zero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledValue {
    mantissa: f64,
    log_scale: f64,
}

impl ScaledValue {
    pub fn new(mantissa: f64, log_scale: f64) -> Self {
        if mantissa == 0.0 || !mantissa.is_finite() {
            return Self { mantissa, log_scale: if mantissa == 0.0 { 0.0 } else { log_scale } };
        }
        let k = mantissa.abs().log10().floor();
        let mut m = mantissa / 10f64.powf(k);
        let mut l = log_scale + k * std::f64::consts::LN_10;
        // guard against log10 rounding at exact powers of ten
        if m.abs() >= 10.0 {
            m /= 10.0;
            l += std::f64::consts::LN_10;
        } else if m.abs() < 1.0 {
            m *= 10.0;
            l -= std::f64::consts::LN_10;
        }
        Self { mantissa: m, log_scale: l }
    }

    pub fn from_f64(v: f64) -> Self {
        Self::new(v, 0.0)
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// `ln |value|` (−∞ for zero).
    pub fn ln_abs(&self) -> f64 {
        if self.mantissa == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.mantissa.abs().ln() + self.log_scale
        }
    }

    pub fn signum(&self) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else {
            self.mantissa.signum()
        }
    }

    /// May overflow to ±∞.
    pub fn to_f64(&self) -> f64 {
        self.mantissa * self.log_scale.exp()
    }

    pub fn mul(&self, other: &ScaledValue) -> ScaledValue {
        ScaledValue::new(self.mantissa * other.mantissa, self.log_scale + other.log_scale)
    }

    pub fn compare(&self, other: &ScaledValue) -> Ordering {
        let (a, b) = (self.signum(), other.signum());
        if a != b {
            return a.total_cmp(&b);
        }
        if a == 0.0 {
            return Ordering::Equal;
        }
        let ord = self.ln_abs().total_cmp(&other.ln_abs());
        if a > 0.0 {
            ord
        } else {
            ord.reverse()
        }
    }
}
