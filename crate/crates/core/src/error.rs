use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid rate function: {0}")]
    InvalidRate(String),

    #[error(
        "quadrature did not converge on [{a}, {b}]: error estimate {error:e} exceeds tolerance {tolerance:e} after {subdivisions} subdivisions"
    )]
    Quadrature { a: f64, b: f64, error: f64, tolerance: f64, subdivisions: usize },

    #[error("root not bracketed on [{lo}, {hi}] (f(lo) = {f_lo:e}, f(hi) = {f_hi:e})")]
    NotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("root finder did not converge after {iterations} iterations")]
    RootNotConverged { iterations: usize },

    #[error("derivative order {n} exceeds n_max = {n_max}")]
    OrderTooHigh { n: usize, n_max: usize },

    #[error("point {z} lies outside the sector |arg z| < {limit}")]
    OutsideSector { z: Complex64, limit: f64 },

    #[error("W(R) stays <= {threshold} up to the search cap R = {cap:e}")]
    SearchCap { threshold: f64, cap: f64 },

    #[error("contour truncation radius for s = {s} exceeds the cap {cap:e}")]
    TruncationCap { s: Complex64, cap: f64 },

    #[error("tail cutoff Y for tolerance {tolerance:e} exceeds the cap {cap:e}")]
    TailCap { tolerance: f64, cap: f64 },

    #[error("pole at s = {0}")]
    Pole(Complex64),

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
