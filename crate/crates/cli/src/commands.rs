use std::fs;
use std::path::Path;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;
use tauberlab::continuation::{Continuation, ContourPath};
use tauberlab::counterexample::{
    omega_pm_witnesses, run_check_standalone, run_suite, CheckId, OscillationWitness,
};
use tauberlab::oscillatory::{direct_cutoff, direct_f, eval_t_main, eval_t_scaled_many, eval_tau_many};
use tauberlab::rate::{growth_target, GridScale, GridSpec};
use tauberlab::report::{CheckRecord, Status, VerificationReport};
use tauberlab::smoothing::SmoothedGrowth;
use tauberlab::Complex64;

use crate::config::RunConfig;
use crate::output::{fmt_num, write_json, Table};

/// Outcome of a subcommand that ran to completion.
pub enum Outcome {
    Ok,
    Failed,
}

pub type CmdResult = Result<Outcome, String>;

pub const CONSTRUCT_GRID: GridSpec = GridSpec { x_min: 1.0, x_max: 1e4, points: 200, scale: GridScale::Log };
pub const OSCILLATE_GRID: GridSpec =
    GridSpec { x_min: 1.0, x_max: 60.0, points: 240, scale: GridScale::Linear };
/// `L{dS}` is left blank this close to its pole.
pub const POLE_EXCLUSION: f64 = 1e-3;
pub const OVERLAP_TOL: f64 = 1e-6;
pub const CANCELLATION_WARN: f64 = 6.0;

fn smoothed(cfg: &RunConfig) -> Result<SmoothedGrowth, String> {
    let target = growth_target(&cfg.rate).map_err(|e| e.to_string())?;
    Ok(SmoothedGrowth::new(target, cfg.quad))
}

fn prepare_out(cfg: &RunConfig) -> Result<(), String> {
    fs::create_dir_all(&cfg.out_dir).map_err(|e| format!("cannot create {}: {e}", cfg.out_dir.display()))
}

fn write_err(path: &Path, e: std::io::Error) -> String {
    format!("cannot write {}: {e}", path.display())
}

pub fn construct(cfg: &RunConfig) -> CmdResult {
    let grid = cfg.grid_or(CONSTRUCT_GRID);
    if grid.x_min <= 0.0 {
        return Err("construct needs a positive grid".into());
    }
    let sg = smoothed(cfg)?;
    let xs = grid.points();
    let rows: Vec<[f64; 6]> = xs
        .par_iter()
        .map(|&x| -> tauberlab::Result<[f64; 6]> {
            let w = sg.w(x)?;
            let wp = sg.derivative(1, x)?;
            Ok([x, sg.omega(x), w, wp, w + x * wp, x * w])
        })
        .collect::<tauberlab::Result<_>>()
        .map_err(|e| e.to_string())?;
    prepare_out(cfg)?;
    let mut table = Table::new(&["x", "omega", "W", "Wp", "V", "phase"]);
    for r in &rows {
        table.numbers(r);
    }
    let path = cfg.out_dir.join("w_profile.csv");
    table.write(&path).map_err(|e| write_err(&path, e))?;
    println!("wrote {} ({} rows, rate {})", path.display(), rows.len(), cfg.rate);
    Ok(Outcome::Ok)
}

pub fn oscillate(cfg: &RunConfig) -> CmdResult {
    let grid = cfg.grid_or(OSCILLATE_GRID);
    if grid.x_min <= 0.0 {
        return Err("oscillate needs a positive grid".into());
    }
    let sg = smoothed(cfg)?;
    let xs = grid.points();
    let t = eval_t_scaled_many(&sg, &xs).map_err(|e| e.to_string())?;
    let tau = eval_tau_many(&sg, &xs).map_err(|e| e.to_string())?;
    let rows: Vec<([f64; 6], f64)> = xs
        .par_iter()
        .zip(t.par_iter().zip(tau.par_iter()))
        .map(|(&x, (&t, &tau))| -> tauberlab::Result<([f64; 6], f64)> {
            let main = eval_t_main(&sg, x)?;
            let s_scaled = -(-x).exp_m1() + t;
            let d = (t - (-x).exp()) / cfg.rate.eval(x);
            let v = sg.v(x)?;
            Ok(([x, t, main, s_scaled, tau, d], (t - main).abs() * v * v))
        })
        .collect::<tauberlab::Result<_>>()
        .map_err(|e| e.to_string())?;

    let witnesses: Vec<OscillationWitness> =
        match omega_pm_witnesses(&sg, &cfg.rate, (grid.x_min, grid.x_max)) {
            Ok(set) => set.witnesses,
            Err(e) => {
                warn!("no witnesses on [{}, {}]: {e}", grid.x_min, grid.x_max);
                Vec::new()
            }
        };

    prepare_out(cfg)?;
    let mut table = Table::new(&["x", "T_scaled", "T_main", "S_scaled", "tau", "D"]);
    for (r, _) in &rows {
        table.numbers(r);
    }
    let path = cfg.out_dir.join("oscillation.csv");
    table.write(&path).map_err(|e| write_err(&path, e))?;

    let mut wt = Table::new(&["k", "x_k", "deviation", "sign"]);
    for w in &witnesses {
        wt.row([w.k.to_string(), fmt_num(w.x_k), fmt_num(w.deviation), w.sign.to_string()]);
    }
    let wpath = cfg.out_dir.join("witnesses.csv");
    wt.write(&wpath).map_err(|e| write_err(&wpath, e))?;

    let max_rem = rows.iter().map(|(_, r)| *r).fold(0.0, f64::max);
    let alternating = witnesses.windows(2).all(|w| w[0].sign * w[1].sign == -1);
    println!(
        "wrote {} ({} rows) and {} ({} witnesses)",
        path.display(),
        rows.len(),
        wpath.display(),
        witnesses.len()
    );
    println!("max |T_scaled - T_main| V^2 = {}", fmt_num(max_rem));
    println!("witness signs alternate: {alternating}");
    Ok(if alternating { Outcome::Ok } else { Outcome::Failed })
}

#[derive(Serialize)]
struct OverlapRow {
    re_s: f64,
    im_s: f64,
    rel_diff: f64,
    passed: bool,
}

#[derive(Serialize)]
struct ContinuationChecks {
    rate: String,
    grid_overlap: Vec<OverlapRow>,
    grid_errors: Vec<String>,
    records: Vec<CheckRecord>,
}

struct SRow {
    f: Complex64,
    lcos: Complex64,
    lds: Option<Complex64>,
}

pub fn continue_(cfg: &RunConfig) -> CmdResult {
    let sg = smoothed(cfg)?;
    let cont = Continuation::new(sg.clone(), ContourPath::auto()).map_err(|e| e.to_string())?;
    let rows: Vec<Result<SRow, String>> = cfg
        .s_grid
        .par_iter()
        .map(|&s| {
            let eval = || -> tauberlab::Result<SRow> {
                let fv = cont.contour_f(s)?;
                let lost = fv.cancellation_digits();
                if lost > CANCELLATION_WARN {
                    warn!("s = {s}: about {lost:.0} digits lost to cancellation on the contour");
                }
                let f = fv.value;
                let lcos = cont.laplace_cos(s)?;
                let one = Complex64::new(1.0, 0.0);
                let lds = if (s - one).norm() < POLE_EXCLUSION { None } else { Some(cont.laplace_ds(s)?) };
                Ok(SRow { f, lcos, lds })
            };
            eval().map_err(|e| format!("s = {s}: {e}"))
        })
        .collect();

    let overlap: Vec<OverlapRow> = cfg
        .s_grid
        .par_iter()
        .zip(rows.par_iter())
        .filter(|(s, r)| s.re > 0.0 && r.is_ok())
        .map(|(&s, r)| {
            let f = r.as_ref().unwrap().f;
            let rel_diff = direct_cutoff(s, 1e-3 * cfg.quad.abs_tol)
                .and_then(|cut| direct_f(&sg, s, cut))
                .map(|d| (f - d.value).norm() / (1.0 + f.norm()))
                .unwrap_or(f64::NAN);
            OverlapRow { re_s: s.re, im_s: s.im, rel_diff, passed: rel_diff <= OVERLAP_TOL }
        })
        .collect();

    let mut suite = cfg.suite();
    suite.checks = vec![CheckId::Continuation, CheckId::Residue];
    let mut records = Vec::new();
    for id in suite.checks.clone() {
        info!("running {id}");
        records.push(run_check_standalone(&suite, id).map_err(|e| e.to_string())?);
    }

    prepare_out(cfg)?;
    let mut table = Table::new(&["re_s", "im_s", "re_F", "im_F", "re_Lcos", "im_Lcos", "re_LdS", "im_LdS"]);
    let mut errors = Vec::new();
    for (s, row) in cfg.s_grid.iter().zip(&rows) {
        match row {
            Ok(r) => {
                let mut cells = vec![s.re, s.im, r.f.re, r.f.im, r.lcos.re, r.lcos.im]
                    .into_iter()
                    .map(fmt_num)
                    .collect::<Vec<_>>();
                match r.lds {
                    Some(v) => cells.extend([fmt_num(v.re), fmt_num(v.im)]),
                    None => cells.extend([String::new(), String::new()]),
                }
                table.row(cells);
            }
            Err(e) => {
                warn!("{e}");
                errors.push(e.clone());
                let mut cells = vec![fmt_num(s.re), fmt_num(s.im)];
                cells.extend(std::iter::repeat_n(String::new(), 6));
                table.row(cells);
            }
        }
    }
    let path = cfg.out_dir.join("continuation.csv");
    table.write(&path).map_err(|e| write_err(&path, e))?;

    let failed = !errors.is_empty()
        || overlap.iter().any(|o| !o.passed)
        || records.iter().any(|r| r.status == Status::Fail);
    let checks = ContinuationChecks {
        rate: cfg.rate.to_string(),
        grid_overlap: overlap,
        grid_errors: errors,
        records,
    };
    let cpath = cfg.out_dir.join("checks.json");
    write_json(&cpath, &checks).map_err(|e| write_err(&cpath, e))?;
    println!("wrote {} ({} rows) and {}", path.display(), cfg.s_grid.len(), cpath.display());
    for r in &checks.records {
        println!("{} {}", status_word(r.status), r.name);
    }
    Ok(if failed { Outcome::Failed } else { Outcome::Ok })
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Warn => "WARN",
    }
}

pub fn verify(cfg: &RunConfig) -> CmdResult {
    let suite = cfg.suite();
    let report: VerificationReport = run_suite(&suite).map_err(|e| e.to_string())?;
    prepare_out(cfg)?;
    let path = cfg.out_dir.join("report.json");
    write_json(&path, &report).map_err(|e| write_err(&path, e))?;
    for r in &report.records {
        let secs = report.timings.per_check.get(&r.name).copied().unwrap_or(0.0);
        println!("{} {} ({secs:.2} s)", status_word(r.status), r.name);
        for c in r.criteria.iter().filter(|c| !c.passed) {
            println!(
                "    {}: {} {} {}",
                c.name,
                fmt_num(c.value),
                c.relation,
                c.limit.map(fmt_num).unwrap_or_default()
            );
        }
        if let Some(e) = &r.error {
            println!("    error: {e}");
        }
    }
    println!("wrote {}", path.display());
    Ok(if report.passed() { Outcome::Ok } else { Outcome::Failed })
}
