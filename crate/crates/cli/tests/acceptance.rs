//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Built with `harness = false`; exits non-zero when any criterion fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use graphscale_cli::{run_experiment, Command, ExperimentConfig};
use graphscale_core::diagnostics::{check_conjugacy_bound, distortion_sweep, AlphaSchedule};
use graphscale_core::graph::{compute_graph, reduce_multiplier};
use graphscale_core::maps::{acim_mean_log_g, find_periodic_orbits, validate_hypotheses, StateMultiplier};
use graphscale_core::pressure::{convexity_violations, find_sstar, pressure, PressureOptions};
use graphscale_core::scaling::{global_xi, local_sigma_empirical, tail_exponent, IndexOptions};
use graphscale_core::{presets, DrivenSystem, HyperbolicDriver, MatrixMode};

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: usize, pass: bool, what: &str, detail: String) {
        println!(
            "{} criterion {id:>2} {what}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass {
            self.failures += 1;
        }
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Positive root of `t^3 - 2t + 1` below 1, mapped to `s = -log2 t`.
fn pc42_oracle() -> f64 {
    -bisect(|t| t * t * t - 2.0 * t + 1.0, 0.3, 0.9).log2()
}

/// Root of `t^2 + t + t^-2 = 3` in `(0, 1)`, mapped to `s = -log3 t`.
fn t3_oracle() -> f64 {
    -bisect(|t| t * t + t + 1.0 / (t * t) - 3.0, 0.5, 0.999).ln() / 3f64.ln()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn criterion_1(r: &mut Report) {
    let sys = presets::pc42();
    let oracle = pc42_oracle();
    let exact = PressureOptions {
        mode: MatrixMode::ExactMarkov,
        ..PressureOptions::default()
    };
    let (e, te) = timed(|| find_sstar(&sys, &exact).map(|c| c.s_star));
    let ulam = PressureOptions {
        resolution: 4096,
        mode: MatrixMode::Ulam,
        ..PressureOptions::default()
    };
    let (u, tu) = timed(|| find_sstar(&sys, &ulam).map(|c| c.s_star));
    match (e, u) {
        (Ok(e), Ok(u)) => {
            let pass = (e - oracle).abs() <= 1e-6
                && (u - oracle).abs() <= 1e-4
                && te.as_secs_f64() < 5.0
                && tu.as_secs_f64() < 5.0;
            r.line(
                1,
                pass,
                "PC42 pressure zero",
                format!(
                    "oracle {oracle:.9}, exact {e:.9} (err {:.1e}, {te:.2?}), ulam N=4096 {u:.9} (err {:.1e}, {tu:.2?})",
                    e - oracle,
                    u - oracle
                ),
            );
        }
        (e, u) => r.line(1, false, "PC42 pressure zero", format!("{e:?} {u:?}")),
    }
}

fn criterion_2(r: &mut Report) {
    let sys = presets::t3();
    let oracle = t3_oracle();
    let (s, t) = timed(|| find_sstar(&sys, &PressureOptions::best_for(&sys, 4096)).map(|c| c.s_star));
    match s {
        Ok(s) => r.line(
            2,
            (s - 0.2011).abs() <= 1e-3 && (s - oracle).abs() <= 1e-6 && t.as_secs_f64() < 5.0,
            "T3 pressure zero",
            format!("s* {s:.7} vs quoted 0.2011 and oracle {oracle:.7}, {t:.2?}"),
        ),
        Err(e) => r.line(2, false, "T3 pressure zero", e.to_string()),
    }
}

/// Criteria 3 and 4 share the million-point graphs.
fn criteria_3_4(r: &mut Report) {
    let mut tail_ok = true;
    let mut xi_ok = true;
    let mut tail_detail = Vec::new();
    let mut xi_detail = Vec::new();
    for (name, sys, s, tol) in [
        ("PC42", presets::pc42(), pc42_oracle(), 0.07),
        ("T3", presets::t3(), t3_oracle(), 0.03),
    ] {
        let (g, t) = timed(|| compute_graph(&sys, 1_000_000, 60, 1e-10, 1e-14));
        let g = match g {
            Ok(g) => g,
            Err(e) => {
                tail_ok = false;
                xi_ok = false;
                tail_detail.push(format!("{name}: {e}"));
                continue;
            }
        };
        match tail_exponent(&g, None) {
            Ok(tr) => {
                let ok = (tr.slope - s).abs() <= tol && t.as_secs_f64() < 120.0;
                tail_ok &= ok;
                tail_detail.push(format!(
                    "{name} slope {:.4} vs {s:.4} +-{tol} on [{:.1e}, {:.1e}] (graph {t:.1?})",
                    tr.slope, tr.window.0, tr.window.1
                ));
            }
            Err(e) => {
                tail_ok = false;
                tail_detail.push(format!("{name}: {e}"));
            }
        }
        match global_xi(&g, None, None) {
            Ok(xr) => {
                let ok = xr.slope_log_xi.abs() <= 0.05 && (xr.slope_log_one_minus_xi - s).abs() <= 0.07;
                xi_ok &= ok;
                xi_detail.push(format!(
                    "{name} log Xi slope {:.4}, log(1-Xi) slope {:.4} vs {s:.4}",
                    xr.slope_log_xi, xr.slope_log_one_minus_xi
                ));
            }
            Err(e) => {
                xi_ok = false;
                xi_detail.push(format!("{name}: {e}"));
            }
        }
    }
    r.line(3, tail_ok, "tail law", tail_detail.join("; "));
    r.line(4, xi_ok, "global index", xi_detail.join("; "));
}

fn criterion_5(r: &mut Report) {
    let sys = presets::t3();
    let s = t3_oracle();
    let opts = IndexOptions::default();
    let mut pass = true;
    let mut detail = Vec::new();
    for (theta, target) in [(0.0, 3.0 * s), (0.5, 1.0)] {
        let (rep, t) = timed(|| local_sigma_empirical(&sys, theta, 2..=13, s, &opts));
        match rep {
            Ok(rep) => {
                let rel = (rep.empirical - target).abs() / target;
                pass &= rel <= 0.15 && rep.rungs.len() >= 12 && t.as_secs_f64() < 120.0;
                detail.push(format!(
                    "theta={theta}: {:.4} vs {target:.4} ({:.1}%, {} rungs, {t:.1?})",
                    rep.empirical,
                    100.0 * rel,
                    rep.rungs.len()
                ));
            }
            Err(e) => {
                pass = false;
                detail.push(format!("theta={theta}: {e}"));
            }
        }
    }
    r.line(5, pass, "T3 local indices", detail.join("; "));
}

/// 4 significant figures.
fn sig4(x: f64) -> f64 {
    let p = 10f64.powi(3 - x.abs().log10().floor() as i32);
    (x * p).round() / p
}

fn criterion_6(r: &mut Report) {
    let run = || -> graphscale_core::Result<(bool, String)> {
        let sys = presets::baker_system(0.45, 1.0)?;
        let mean = acim_mean_log_g(&sys, 4096)?;
        let c: f64 = 1.01;
        let closed = ((c + (c * c - 1.0).sqrt()) / 2.0).ln();
        let quad_ok = (mean - 0.57589f64.ln()).abs() <= 1e-4 && (mean - closed).abs() <= 1e-4;

        let orbits = find_periodic_orbits(sys.base(), sys.mult(), 12)?;
        let worst = &orbits[0];
        let expect = [0.10255, 0.22788, 0.50640];
        let mut pts = worst.points.clone();
        pts.sort_by(f64::total_cmp);
        let orbit_ok = worst.period == 3
            && pts.iter().zip(expect).all(|(a, b)| (a - b).abs() <= 5e-4)
            && (worst.geometric_mean() - 0.28216).abs() <= 5e-4;

        let (lo, hi) = validate_hypotheses(&sys, 12, 4096)?.scale_window();
        let window_ok = sig4(lo) == 1.736 && sig4(hi) == 3.544;
        Ok((
            quad_ok && orbit_ok && window_ok,
            format!(
                "acim mean exp {:.6} (closed form {:.6}); worst orbit p={} {:?} gm {:.6}; r window [{lo:.5}, {hi:.5}]",
                mean.exp(),
                closed.exp(),
                worst.period,
                pts.iter().map(|x| format!("{x:.5}")).collect::<Vec<_>>(),
                worst.geometric_mean()
            ),
        ))
    };
    match run() {
        Ok((pass, detail)) => r.line(6, pass, "baker constants", detail),
        Err(e) => r.line(6, false, "baker constants", e.to_string()),
    }
}

fn criterion_7(r: &mut Report) {
    let sched = AlphaSchedule::new(0.1);
    let mut pass = true;
    let mut detail = Vec::new();
    let (_, t) = timed(|| {
        for (name, sys) in [("PC42", presets::pc42()), ("T3", presets::t3())] {
            let s = distortion_sweep(&sys, 1000, &[10, 30, 60], &[1.0, 0.5, 0.1], &sched, 7);
            let worst = s
                .worst_lower_margin
                .min(s.worst_upper_margin)
                .min(s.worst_lower_bound_margin)
                .min(s.worst_sum_margin);
            pass &= s.distortion_failures == 0 && s.lower_bound_failures == 0 && worst >= -1e-12;
            detail.push(format!(
                "{name}: {} + {} checks, {} + {} failures, worst margin {worst:.3e}",
                s.distortion_checks, s.lower_bound_checks, s.distortion_failures, s.lower_bound_failures
            ));
        }
    });
    pass &= t.as_secs_f64() < 60.0;
    r.line(7, pass, "distortion suite", format!("{} ({t:.1?})", detail.join("; ")));
}

fn criterion_8(r: &mut Report) {
    let run = || -> graphscale_core::Result<(bool, String)> {
        let driver = HyperbolicDriver::baker(0.45)?;
        let fiber = presets::baker_system(0.45, 1.0)?.fiber().clone();
        let mut pass = true;
        let mut detail = Vec::new();
        for scale in [1.0, 2.2] {
            let ghat = StateMultiplier::cosine_exp(scale, 0.01, 0.1);
            let red = reduce_multiplier(&driver, &ghat, 40)?;
            let rep = check_conjugacy_bound(&driver, &ghat, &fiber, &red, 1000, 40, 8, 1e-14)?;
            let mut residual = 0.0f64;
            for i in 0..32 {
                for j in 0..32 {
                    let p = graphscale_core::maps::DriverState::new((i as f64 + 0.5) / 32.0, (j as f64 + 0.5) / 32.0);
                    residual = residual.max(red.coboundary_residual(p).abs());
                }
            }
            pass &= rep.pass && rep.violations == 0 && residual <= red.residual_bound() + 1e-12;
            detail.push(format!(
                "r={scale}: max gap {:.4} <= bound {:.4} on {} samples, residual {residual:.1e} <= {:.1e}",
                rep.max_gap,
                rep.bound,
                rep.compared,
                red.residual_bound()
            ));
        }
        Ok((pass, detail.join("; ")))
    };
    let (res, t) = timed(run);
    match res {
        Ok((pass, detail)) => r.line(
            8,
            pass && t.as_secs_f64() < 60.0,
            "conjugacy bound",
            format!("{detail} ({t:.1?})"),
        ),
        Err(e) => r.line(8, false, "conjugacy bound", e.to_string()),
    }
}

fn criterion_9(r: &mut Report) {
    let run = || -> graphscale_core::Result<(bool, String)> {
        let systems: Vec<(&str, DrivenSystem)> = vec![
            ("PC42", presets::pc42()),
            ("T3", presets::t3()),
            ("baker", presets::baker_system(0.45, 2.2)?),
            ("perturbed", presets::perturbed(0.3)?),
        ];
        let mut worst_psi0 = 0.0f64;
        let mut convexity = 0;
        let mut worst_scale = 0.0f64;
        let mut worst_ulam = 0.0f64;
        for (_, sys) in &systems {
            let opts = PressureOptions::best_for(sys, 1024);
            worst_psi0 = worst_psi0.max(pressure(sys, 0.0, &opts)?.abs());
            let samples = (0..=30)
                .map(|i| {
                    let s = 0.1 * i as f64;
                    pressure(sys, s, &opts).map(|p| (s, p))
                })
                .collect::<graphscale_core::Result<Vec<_>>>()?;
            convexity += convexity_violations(&samples, 1e-8);
            let scaled = sys.with_multiplier(sys.mult().scaled(0.5)?)?;
            for s in [0.1, 0.5, 1.0, 2.0] {
                let d = pressure(&scaled, s, &opts)? - (pressure(sys, s, &opts)? - s * 0.5f64.ln());
                worst_scale = worst_scale.max(d.abs());
            }
            if opts.mode == MatrixMode::ExactMarkov {
                let cells = sys.base().num_cells();
                for m in [2, 16, 128] {
                    let ulam = PressureOptions {
                        resolution: m * cells,
                        mode: MatrixMode::Ulam,
                        ..opts
                    };
                    for s in [0.1, 0.5, 1.0, 2.0] {
                        let d = pressure(sys, s, &ulam)? - pressure(sys, s, &opts)?;
                        worst_ulam = worst_ulam.max(d.abs());
                    }
                }
            }
        }
        let pass = worst_psi0 <= 1e-8 && convexity == 0 && worst_scale <= 1e-8 && worst_ulam <= 1e-8;
        Ok((
            pass,
            format!(
                "|psi(0)| {worst_psi0:.1e}, convexity violations {convexity}, scale error {worst_scale:.1e}, \
                 ulam vs exact {worst_ulam:.1e} (systems: {})",
                systems.iter().map(|s| s.0).collect::<Vec<_>>().join(", ")
            ),
        ))
    };
    match run() {
        Ok((pass, detail)) => r.line(9, pass, "operator sanity", detail),
        Err(e) => r.line(9, false, "operator sanity", e.to_string()),
    }
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .map(|rd| {
            rd.filter_map(|e| e.ok())
                .map(|e| {
                    (
                        e.file_name().to_string_lossy().into_owned(),
                        fs::read(e.path()).unwrap_or_default(),
                    )
                })
                .collect()
        })
        .unwrap_or_default();
    out.sort();
    out
}

fn criterion_10(r: &mut Report) {
    let configs = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs");
    let tmp = tempfile::tempdir().expect("temp dir");
    let mut pass = true;
    let mut detail = Vec::new();
    for name in ["pc42", "t3", "baker-r1.74", "baker-r2.2", "baker-r2.5"] {
        let cfg = match ExperimentConfig::load(&configs.join(format!("{name}.toml"))) {
            Ok(c) => c,
            Err(e) => {
                pass = false;
                detail.push(format!("{name}: {e}"));
                continue;
            }
        };
        let (a, b) = (
            tmp.path().join(format!("{name}-a")),
            tmp.path().join(format!("{name}-b")),
        );
        let ra = run_experiment(&cfg, Command::All, &a);
        let rb = run_experiment(&cfg, Command::All, &b);
        let (fa, fb) = (files(&a), files(&b));
        let same = ra.code == 0 && rb.code == 0 && !fa.is_empty() && fa == fb;
        pass &= same;
        detail.push(format!(
            "{name}: {} files {}",
            fa.len(),
            if same { "identical" } else { "DIFFER" }
        ));
    }
    r.line(10, pass, "determinism", detail.join("; "));
}

fn main() {
    let mut r = Report { failures: 0 };
    criterion_1(&mut r);
    criterion_2(&mut r);
    criteria_3_4(&mut r);
    criterion_5(&mut r);
    criterion_6(&mut r);
    criterion_7(&mut r);
    criterion_8(&mut r);
    criterion_9(&mut r);
    criterion_10(&mut r);
    println!("acceptance: {} of 10 criteria failed", r.failures);
    if r.failures > 0 {
        std::process::exit(1);
    }
}
