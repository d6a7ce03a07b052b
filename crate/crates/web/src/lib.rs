//! WebAssembly bindings behind the browser demo in `www/`.
//!
//! Every table is returned as a flat `Float64Array` in row-major order; the
//! column layout is given on each method.

use tauberlab::continuation::{cauchy_circle, Continuation, ContourPath};
use tauberlab::counterexample::{deviation_d, eval_s_scaled_many, omega_pm_witnesses};
use tauberlab::oscillatory::eval_tau_many;
use tauberlab::quadrature::QuadratureConfig;
use tauberlab::rate::{growth_target, linear_grid, log_grid, RateFunction};
use tauberlab::smoothing::SmoothedGrowth;
use tauberlab::{Complex64, Error, Result};
use wasm_bindgen::prelude::*;

/// A rate function together with its smoothed growth and contour.
#[wasm_bindgen]
pub struct Demo {
    rho: RateFunction,
    sg: SmoothedGrowth,
    cont: Option<Continuation>,
}

fn check_range(x_min: f64, x_max: f64, n: usize) -> Result<()> {
    if !(x_min > 0.0 && x_max > x_min && x_max.is_finite()) || !(2..=5000).contains(&n) {
        return Err(Error::InvalidArgument(format!("bad range [{x_min}, {x_max}] with {n} points")));
    }
    Ok(())
}

impl Demo {
    /// `alpha` is only read by the `pow` rate; NaN selects its default.
    pub fn build(rate: &str, alpha: f64) -> Result<Self> {
        let rho = RateFunction::from_name(rate, alpha.is_finite().then_some(alpha))?;
        rho.check()?;
        let sg = SmoothedGrowth::new(growth_target(&rho)?, QuadratureConfig::default());
        Ok(Self { rho, sg, cont: None })
    }

    fn continuation(&mut self) -> Result<&Continuation> {
        if self.cont.is_none() {
            self.cont = Some(Continuation::new(self.sg.clone(), ContourPath::auto())?);
        }
        Ok(self.cont.as_ref().unwrap())
    }

    /// Columns `x, ω, W, V` on a log grid.
    pub fn profile_rows(&self, x_min: f64, x_max: f64, n: usize) -> Result<Vec<f64>> {
        check_range(x_min, x_max, n)?;
        let mut out = Vec::with_capacity(4 * n);
        for x in log_grid(x_min, x_max, n) {
            out.extend([x, self.sg.omega(x), self.sg.w(x)?, self.sg.v(x)?]);
        }
        Ok(out)
    }

    /// Columns `x, D(x), τ(x)/ρ(x)` on a linear grid.
    pub fn oscillation_rows(&self, x_min: f64, x_max: f64, n: usize) -> Result<Vec<f64>> {
        check_range(x_min, x_max, n)?;
        let xs = linear_grid(x_min, x_max, n);
        let s = eval_s_scaled_many(&self.sg, &xs)?;
        let tau = eval_tau_many(&self.sg, &xs)?;
        let mut out = Vec::with_capacity(3 * n);
        for ((&x, s), t) in xs.iter().zip(s).zip(tau) {
            let r = self.rho.eval(x);
            out.extend([x, (s - 1.0) / r, t / r]);
        }
        Ok(out)
    }

    /// Columns `k, x_k, D(x_k)` for the half-knots in `[x_min, x_max]`.
    pub fn witness_rows(&self, x_min: f64, x_max: f64) -> Result<Vec<f64>> {
        let set = omega_pm_witnesses(&self.sg, &self.rho, (x_min, x_max))?;
        Ok(set.witnesses.iter().flat_map(|w| [w.k as f64, w.x_k, w.deviation]).collect())
    }

    /// `log10 |L{cos φ; s}|` on an `n_re × n_im` grid, rows from the top
    /// (largest `Im s`) down. Unreachable points are NaN.
    pub fn continuation_rows(
        &mut self,
        re: (f64, f64),
        im: (f64, f64),
        n_re: usize,
        n_im: usize,
    ) -> Result<Vec<f64>> {
        if !(re.1 > re.0 && im.1 > im.0) || n_re < 2 || n_im < 2 || n_re * n_im > 4096 {
            return Err(Error::InvalidArgument("bad continuation window".into()));
        }
        let cont = self.continuation()?;
        let mut out = Vec::with_capacity(n_re * n_im);
        for b in linear_grid(im.0, im.1, n_im).into_iter().rev() {
            for a in linear_grid(re.0, re.1, n_re) {
                let v = cont.laplace_cos(Complex64::new(a, b)).map(|v| v.norm().log10());
                out.push(v.unwrap_or(f64::NAN));
            }
        }
        Ok(out)
    }

    /// `re, im` of `(1/2πi)∮ L{dS} ds` around `|s − 1| = radius`.
    pub fn residue_value(&mut self, radius: f64) -> Result<Vec<f64>> {
        let cont = self.continuation()?;
        let r = cauchy_circle(|s| cont.laplace_ds(s), Complex64::new(1.0, 0.0), radius, 64)?;
        Ok(vec![r.re, r.im])
    }

    pub fn deviation(&self, x: f64) -> Result<f64> {
        deviation_d(&self.sg, &self.rho, x)
    }
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(rate: &str, alpha: f64) -> std::result::Result<Demo, JsError> {
        Demo::build(rate, alpha).map_err(js)
    }

    pub fn label(&self) -> String {
        self.rho.to_string()
    }

    pub fn profile(&self, x_min: f64, x_max: f64, n: usize) -> std::result::Result<Vec<f64>, JsError> {
        self.profile_rows(x_min, x_max, n).map_err(js)
    }

    pub fn oscillation(&self, x_min: f64, x_max: f64, n: usize) -> std::result::Result<Vec<f64>, JsError> {
        self.oscillation_rows(x_min, x_max, n).map_err(js)
    }

    pub fn witnesses(&self, x_min: f64, x_max: f64) -> std::result::Result<Vec<f64>, JsError> {
        self.witness_rows(x_min, x_max).map_err(js)
    }

    #[wasm_bindgen(js_name = continuationMap)]
    pub fn continuation_map(
        &mut self,
        re_min: f64,
        re_max: f64,
        im_min: f64,
        im_max: f64,
        n_re: usize,
        n_im: usize,
    ) -> std::result::Result<Vec<f64>, JsError> {
        self.continuation_rows((re_min, re_max), (im_min, im_max), n_re, n_im).map_err(js)
    }

    pub fn residue(&mut self, radius: f64) -> std::result::Result<Vec<f64>, JsError> {
        self.residue_value(radius).map_err(js)
    }
}
