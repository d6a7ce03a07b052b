//! Run configuration: an optional JSON file merged with command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use tauberlab::counterexample::{CheckId, SuiteConfig};
use tauberlab::quadrature::QuadratureConfig;
use tauberlab::rate::{GridScale, GridSpec, RateFunction, RateTable};
use tauberlab::Complex64;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub rate: Option<RateSection>,
    pub grids: Option<GridSection>,
    pub s_grid: Option<Vec<[f64; 2]>>,
    pub tolerances: Option<Tolerances>,
    pub checks: Option<Vec<String>>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSection {
    pub kind: String,
    pub alpha: Option<f64>,
    /// CSV path, relative to the config file.
    pub table: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Option<GridScale>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub abs: Option<f64>,
    pub rel: Option<f64>,
}

/// Flag values that override the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub rate: Option<String>,
    pub alpha: Option<f64>,
    pub table: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub only: Option<String>,
    pub x_range: Option<String>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub rate: RateFunction,
    /// Explicit table grid; `None` means the subcommand default.
    pub grid: Option<GridSpec>,
    pub s_grid: Vec<Complex64>,
    pub quad: QuadratureConfig,
    pub checks: Vec<CheckId>,
    pub out_dir: PathBuf,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

pub fn parse_file(text: &str, origin: &Path) -> Result<FileConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        ConfigError(format!("{}: field `{}`: {}", origin.display(), e.path(), inner))
    })
}

/// `A:B:N` into a grid with the given scale.
pub fn parse_x_range(spec: &str, scale: GridScale) -> Result<GridSpec, ConfigError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return err(format!("--x-range expects A:B:N, got '{spec}'"));
    }
    let num = |s: &str| {
        s.trim().parse::<f64>().map_err(|_| ConfigError(format!("--x-range: '{s}' is not a number")))
    };
    let n = parts[2]
        .trim()
        .parse::<usize>()
        .map_err(|_| ConfigError(format!("--x-range: '{}' is not a point count", parts[2])))?;
    Ok(GridSpec::new(num(parts[0])?, num(parts[1])?, n, scale))
}

pub fn default_s_grid() -> Vec<Complex64> {
    let mut out = Vec::new();
    for re in [-2.0, -1.0, 0.0, 1.0, 2.0, 3.0] {
        for im in [-5.0, -1.0, 0.0, 1.0, 5.0] {
            out.push(Complex64::new(re, im));
        }
    }
    out
}

pub fn parse_checks(list: &[String]) -> Result<Vec<CheckId>, ConfigError> {
    let mut out = Vec::new();
    for name in list {
        let id: CheckId = name.parse().map_err(|e: tauberlab::Error| ConfigError(e.to_string()))?;
        if !out.contains(&id) {
            out.push(id);
        }
    }
    if out.is_empty() {
        return err("no checks selected");
    }
    Ok(out)
}

impl RunConfig {
    pub fn load(path: Option<&Path>, flags: &Overrides) -> Result<Self, ConfigError> {
        let (file, base) = match path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| ConfigError(format!("cannot read {}: {e}", p.display())))?;
                let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
                (parse_file(&text, p)?, base)
            }
            None => (FileConfig::default(), PathBuf::new()),
        };
        Self::resolve(file, &base, flags)
    }

    pub fn resolve(file: FileConfig, base: &Path, flags: &Overrides) -> Result<Self, ConfigError> {
        let (mut kind, mut alpha, mut table) = match file.rate {
            Some(r) => (r.kind, r.alpha, r.table.map(|t| base.join(t))),
            None => ("log".to_string(), None, None),
        };
        if let Some(k) = &flags.rate {
            kind = k.clone();
        }
        if flags.alpha.is_some() {
            alpha = flags.alpha;
        }
        if let Some(t) = &flags.table {
            table = Some(t.clone());
        }
        let rate = if kind == "table" {
            let Some(path) = table else {
                return err("rate kind 'table' needs a table path (rate.table or --table)");
            };
            let text = fs::read_to_string(&path)
                .map_err(|e| ConfigError(format!("cannot read rate table {}: {e}", path.display())))?;
            RateFunction::table(RateTable::parse_csv(&text).map_err(|e| ConfigError(e.to_string()))?)
        } else {
            RateFunction::from_name(&kind, alpha).map_err(|e| ConfigError(e.to_string()))?
        };
        rate.check().map_err(|e| ConfigError(e.to_string()))?;

        let mut grid = file
            .grids
            .map(|g| GridSpec::new(g.x_min, g.x_max, g.points, g.scale.unwrap_or(GridScale::Linear)));
        if let Some(spec) = &flags.x_range {
            let scale = grid.map_or(GridScale::Linear, |g| g.scale);
            grid = Some(parse_x_range(spec, scale)?);
        }
        if let Some(g) = &grid {
            g.validate().map_err(|e| ConfigError(e.to_string()))?;
        }

        let s_grid = match file.s_grid {
            Some(v) if v.is_empty() => return err("s_grid is empty"),
            Some(v) => v.into_iter().map(|[a, b]| Complex64::new(a, b)).collect(),
            None => default_s_grid(),
        };
        if s_grid.iter().any(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return err("s_grid entries must be finite");
        }

        let mut quad = QuadratureConfig::default();
        if let Some(t) = file.tolerances {
            if let Some(a) = t.abs {
                quad.abs_tol = a;
            }
            if let Some(r) = t.rel {
                quad.rel_tol = r;
            }
        }
        quad.validate().map_err(|e| ConfigError(e.to_string()))?;

        let checks = match (&flags.only, file.checks) {
            (Some(only), _) => parse_checks(&only.split(',').map(str::to_string).collect::<Vec<_>>())?,
            (None, Some(list)) => parse_checks(&list)?,
            (None, None) => CheckId::ALL.to_vec(),
        };

        let out_dir = flags.out.clone().or(file.out_dir).unwrap_or_else(|| PathBuf::from("out"));
        Ok(Self { rate, grid, s_grid, quad, checks, out_dir })
    }

    pub fn grid_or(&self, default: GridSpec) -> GridSpec {
        self.grid.unwrap_or(default)
    }

    pub fn suite(&self) -> SuiteConfig {
        SuiteConfig {
            rate: self.rate.clone(),
            quad: self.quad,
            checks: self.checks.clone(),
            ..SuiteConfig::default()
        }
    }
}
