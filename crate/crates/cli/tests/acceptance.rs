//! End-to-end acceptance run: one line per criterion, non-zero exit on failure.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use serde_json::Value;
use tauberlab::continuation::{Continuation, ContourPath};
use tauberlab::counterexample::{run_suite, SuiteConfig};
use tauberlab::oscillatory::eval_t_scaled_many;
use tauberlab::report::{CheckRecord, Status, VerificationReport};
use tauberlab::smoothing::SmoothedGrowth;
use tauberlab::Complex64;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn record<'a>(rep: &'a VerificationReport, name: &str) -> &'a CheckRecord {
    rep.record(name).unwrap_or_else(|| panic!("no {name} record"))
}

fn failing(rec: &CheckRecord) -> String {
    let mut bad: Vec<String> =
        rec.criteria.iter().filter(|c| !c.passed).map(|c| format!("{} = {:e}", c.name, c.value)).collect();
    if let Some(e) = &rec.error {
        bad.push(e.clone());
    }
    bad.join("; ")
}

fn criterion_value(rec: &CheckRecord, name: &str) -> f64 {
    rec.criteria.iter().find(|c| c.name == name).map(|c| c.value).unwrap_or(f64::NAN)
}

fn check_passed(rec: &CheckRecord) -> bool {
    rec.status != Status::Fail
}

fn timed(rep: &VerificationReport, name: &str) -> f64 {
    rep.timings.per_check.get(name).copied().unwrap_or(f64::INFINITY)
}

fn smoothing(rep: &VerificationReport) -> Outcome {
    let rec = record(rep, "smoothing");
    let secs = timed(rep, "smoothing");
    let ok = check_passed(rec) && secs < 60.0;
    outcome(
        ok,
        format!(
            "min W' = {:.2e}, derivative ratio = {:.3}, c1 = {:.3}, c2 = {:.3}, {secs:.1} s {}",
            criterion_value(rec, "min W'"),
            criterion_value(rec, "max |W^(n)| y^n / (2^(n+1) n! W)"),
            criterion_value(rec, "c1 = min W/omega"),
            criterion_value(rec, "c2 = max W/(omega(y^2)+1)"),
            failing(rec)
        ),
    )
}

/// Composite Simpson for `∫₀ˣ e^{u−x} cos φ(u) du`, sized for 512 points per
/// oscillation at the largest frequency on `[0, x]`.
fn simpson_oracle(sg: &SmoothedGrowth, x: f64) -> (f64, f64) {
    let v = sg.v(x).unwrap();
    let mut n = ((512.0 * v * x / (2.0 * PI)).ceil() as usize).max(2);
    n += n % 2;
    let h = x / n as f64;
    let mut acc = 0.0;
    let mut comp = 0.0;
    for i in 0..=n {
        let u = if i == n { x } else { i as f64 * h };
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let term = w * (u - x).exp() * sg.phase(u).unwrap().cos();
        let y = term - comp;
        let t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    (acc * h / 3.0, 2.0 * PI / (v * h))
}

fn remainder(rep: &VerificationReport, sg: &SmoothedGrowth) -> Outcome {
    let rec = record(rep, "remainder");
    let r = &rec.grids["remainder"];
    let mut sorted = r.clone();
    sorted.sort_by(f64::total_cmp);
    let median = 0.5 * (sorted[(sorted.len() - 1) / 2] + sorted[sorted.len() / 2]);
    let max = sorted[sorted.len() - 1];
    let xs = [10.0, 20.0, 30.0];
    let ours = eval_t_scaled_many(sg, &xs).unwrap();
    let mut worst: f64 = 0.0;
    let mut ppo = f64::INFINITY;
    for (&x, &q) in xs.iter().zip(&ours) {
        let (reference, p) = simpson_oracle(sg, x);
        worst = worst.max((q - reference).abs());
        ppo = ppo.min(p);
    }
    let secs = timed(rep, "remainder");
    let ok = check_passed(rec) && max <= 10.0 * median && worst <= 1e-8 && ppo >= 50.0 && secs < 120.0;
    outcome(
        ok,
        format!(
            "max/median = {:.3}, Simpson diff = {worst:.1e} at {ppo:.0} pts/oscillation, {secs:.1} s {}",
            max / median,
            failing(rec)
        ),
    )
}

fn continuation(rep: &VerificationReport) -> Outcome {
    let rec = record(rep, "continuation");
    let secs = timed(rep, "continuation");
    outcome(
        check_passed(rec) && secs < 300.0,
        format!(
            "overlap = {:.1e}, path = {:.1e}, holomorphy = {:.1e}, {secs:.1} s {}",
            criterion_value(rec, "overlap |contour_F - direct_F|/(1+|F|)"),
            criterion_value(rec, "path independence R0 -> 2R0 (relative)"),
            criterion_value(rec, "cauchy_circle(L cos) / max|L cos|"),
            failing(rec)
        ),
    )
}

fn residue(rep: &VerificationReport, cont: &Continuation) -> Outcome {
    // plain trapezoid rule on |s − 1| = 0.3, 64 nodes
    let n = 64;
    let one = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let d = Complex64::from_polar(0.3, 2.0 * PI * k as f64 / n as f64);
        acc += cont.laplace_ds(one + d).unwrap() * d;
    }
    let res = acc / n as f64;
    let err = (res - one).norm();
    let rec = record(rep, "residue");
    outcome(
        check_passed(rec) && err <= 1e-4,
        format!("residue = {:.12} {:+.1e}i, |res - 1| = {err:.1e} {}", res.re, res.im, failing(rec)),
    )
}

fn witnesses(rep: &VerificationReport, sg: &SmoothedGrowth, name: &str) -> Outcome {
    let rec = record(rep, name);
    let rho = &rep.config.rate;
    let w = &rec.witnesses;
    let in_range = w.iter().all(|w| (10.0..=60.0).contains(&w.x_k));
    let alternating = w.windows(2).all(|p| p[0].deviation * p[1].deviation < 0.0);
    let c = w.iter().map(|w| w.deviation.abs()).fold(f64::INFINITY, f64::min);
    let ratios: Vec<f64> =
        w.iter().map(|w| w.deviation.abs() * rho.eval(w.x_k) * sg.v(w.x_k).unwrap()).collect();
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ok =
        check_passed(rec) && w.len() >= 10 && in_range && alternating && c > 0.0 && lo >= 0.5 && hi <= 1.5;
    outcome(
        ok,
        format!(
            "{} witnesses, alternating = {alternating}, c = {c:.3}, ratios in [{lo:.4}, {hi:.4}] {}",
            w.len(),
            failing(rec)
        ),
    )
}

fn removable(rep: &VerificationReport) -> Outcome {
    let rec = record(rep, "removable");
    outcome(
        check_passed(rec),
        format!(
            "|L cos(0) - tau(0)| = {:.1e}, L tau(0) = {:.6}, L tau(-2+3i) = {:.6}{:+.6}i {}",
            criterion_value(rec, "|L cos(0) - tau(0)|"),
            rec.measured["re L tau(0+0i)"],
            rec.measured["re L tau(-2+3i)"],
            rec.measured["im L tau(-2+3i)"],
            failing(rec)
        ),
    )
}

fn run_cli(out: &Path, threads: &str) -> Result<(), String> {
    for cmd in ["construct", "oscillate", "continue", "verify"] {
        let status = Command::new(env!("CARGO_BIN_EXE_tauberlab"))
            .args([cmd, "--out"])
            .arg(out)
            .env("TAUBERLAB_THREADS", threads)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("{cmd} exited with {}", status.status));
        }
    }
    Ok(())
}

fn without_timings(text: &str) -> Value {
    let mut v: Value = serde_json::from_str(text).unwrap();
    if let Some(obj) = v.as_object_mut() {
        obj.remove("timings");
    }
    v
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    if let Err(e) = run_cli(a.path(), "4").and_then(|_| run_cli(b.path(), "1")) {
        return outcome(false, e);
    }
    let files = [
        "w_profile.csv",
        "oscillation.csv",
        "witnesses.csv",
        "continuation.csv",
        "checks.json",
        "report.json",
    ];
    let mut differing = Vec::new();
    for f in files {
        let x = std::fs::read_to_string(a.path().join(f)).unwrap_or_default();
        let y = std::fs::read_to_string(b.path().join(f)).unwrap_or_default();
        let same = if f == "report.json" {
            without_timings(&x) == without_timings(&y)
        } else {
            x == y && !x.is_empty()
        };
        if !same {
            differing.push(f);
        }
    }
    outcome(
        differing.is_empty(),
        format!("{} files compared across 4 and 1 threads, differing: {differing:?}", files.len()),
    )
}

fn main() {
    let cfg = SuiteConfig::default();
    let start = Instant::now();
    let rep = run_suite(&cfg).expect("suite runs");
    let sg = cfg.smoothed().unwrap();
    let cont = Continuation::new(sg.clone(), ContourPath::auto()).unwrap();

    let results = [
        ("smoothing battery", smoothing(&rep)),
        ("remainder battery", remainder(&rep, &sg)),
        ("continuation battery", continuation(&rep)),
        ("residue at s = 1", residue(&rep, &cont)),
        ("oscillation of S", witnesses(&rep, &sg, "omega_s")),
        ("oscillation of tau", witnesses(&rep, &sg, "omega_tau")),
        ("removable singularity", removable(&rep)),
        ("deterministic outputs", determinism()),
    ];
    let mut failures = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        let word = if o.passed { "PASS" } else { "FAIL" };
        println!("{word} criterion {} ({name}): {}", i + 1, o.detail.trim_end());
        failures += usize::from(!o.passed);
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1} s",
        results.len() - failures,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
