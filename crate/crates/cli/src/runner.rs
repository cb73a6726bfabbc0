//! Command pipelines and artifact output.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use graphscale_core::diagnostics::{check_conjugacy_bound, distortion_sweep, AlphaSchedule};
use graphscale_core::graph::{compute_graph_with, reduce_multiplier};
use graphscale_core::maps::{validate_hypotheses, DriverState, HypothesisStatus, StateMultiplier};
use graphscale_core::pressure::{find_sstar, pressure, PressureOptions};
use graphscale_core::scaling::{global_xi, local_sigma_empirical, tail_exponent};
use graphscale_core::{DrivenSystem, GraphSample, HyperbolicDriver, HypothesisReport, MatrixMode, PressureCurve};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Format, MapSpec, MultiplierSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Tolerance of the operator sanity checks.
const SANITY_TOL: f64 = 1e-8;
/// Factor used in the scale-equivariance check; below 1 so the ceiling condition survives.
const SCALE_FACTOR: f64 = 0.5;
/// Side of the grid on which the coboundary residual is sampled.
const RESIDUAL_GRID: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Graph,
    Pressure,
    Tail,
    Xi,
    Index,
    Check,
    All,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Graph => "graph",
            Command::Pressure => "pressure",
            Command::Tail => "tail",
            Command::Xi => "xi",
            Command::Index => "index",
            Command::Check => "check",
            Command::All => "all",
        }
    }

    fn includes(self, step: Command) -> bool {
        self == step || self == Command::All
    }

    fn needs_hypothesis(self) -> bool {
        matches!(self, Command::Pressure | Command::Index | Command::Check | Command::All)
    }
}

/// Exit code, manifest and human-readable notes of one run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub manifest: Value,
    pub notes: Vec<String>,
}

enum Failure {
    Core(graphscale_core::Error),
    Io(String),
}

impl From<graphscale_core::Error> for Failure {
    fn from(e: graphscale_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Step<T> = std::result::Result<T, Failure>;

struct Run<'a> {
    cfg: &'a ExperimentConfig,
    sys: DrivenSystem,
    out: PathBuf,
    manifest: Map<String, Value>,
    notes: Vec<String>,
    curve: Option<PressureCurve>,
    graph: Option<GraphSample>,
}

/// SHA-256 of the effective configuration, as hex.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let digest = Sha256::digest(cfg.to_toml().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs `command` and writes artifacts under `out`.
pub fn run_experiment(cfg: &ExperimentConfig, command: Command, out: &Path) -> Outcome {
    let mut manifest = Map::new();
    manifest.insert("command".into(), json!(command.as_str()));
    manifest.insert("system".into(), json!(cfg.system.name));
    manifest.insert("config_sha256".into(), json!(config_hash(cfg)));
    manifest.insert("seed".into(), json!(cfg.compute.seed));
    manifest.insert(
        "versions".into(),
        json!({ "graphscale": env!("CARGO_PKG_VERSION"), "graphscale_core": graphscale_core::VERSION }),
    );

    let sys = match cfg.system.build() {
        Ok(s) => s,
        Err(e) => {
            manifest.insert("status".into(), json!("invalid-system"));
            manifest.insert("error".into(), json!(e.to_string()));
            let notes = vec![format!("invalid system: {e}")];
            return finish(cfg, out, manifest, notes, EXIT_VALIDATION);
        }
    };

    let mut run = Run {
        cfg,
        sys,
        out: out.to_path_buf(),
        manifest,
        notes: Vec::new(),
        curve: None,
        graph: None,
    };
    let mut code = EXIT_OK;
    let mut violated = false;
    let result = (|| -> Step<()> {
        fs::create_dir_all(&run.out)?;
        if command.needs_hypothesis() {
            violated = run.hypothesis()?.status == HypothesisStatus::Violated;
            if violated {
                run.notes.push(
                    "log g fails the sign test (acim mean not positive or g does not straddle 1); \
                     the pressure zero and the local indices are not covered by the scaling laws"
                        .into(),
                );
            }
        }
        if command.includes(Command::Pressure) {
            run.pressure()?;
        }
        if command.includes(Command::Graph) {
            run.graph()?;
            run.write_csv("graph.csv", |w| run.graph.as_ref().unwrap().write_csv(w))?;
        }
        if command.includes(Command::Tail) {
            run.tail()?;
        }
        if command.includes(Command::Xi) {
            run.xi()?;
        }
        if command.includes(Command::Index) {
            run.index()?;
        }
        if command.includes(Command::Check) && !run.check()? {
            code = EXIT_VALIDATION;
        }
        Ok(())
    })();

    let downgrade = violated && matches!(command, Command::Pressure | Command::Index | Command::All);
    let status = match &result {
        Ok(()) if downgrade => {
            code = EXIT_VALIDATION;
            "hypothesis-violated"
        }
        Ok(()) if code == EXIT_OK => "ok",
        Ok(()) => "check-failed",
        Err(Failure::Core(e)) => {
            run.manifest.insert("error".into(), json!(e.to_string()));
            run.notes.push(e.to_string());
            code = if downgrade {
                EXIT_VALIDATION
            } else if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_VALIDATION
            };
            if e.is_numerical() {
                "numerical-failure"
            } else {
                "invalid-input"
            }
        }
        Err(Failure::Io(e)) => {
            run.manifest.insert("error".into(), json!(e));
            run.notes.push(format!("i/o: {e}"));
            code = EXIT_IO;
            "io-error"
        }
    };
    run.manifest.insert("status".into(), json!(status));
    finish(cfg, out, run.manifest, run.notes, code)
}

fn finish(
    cfg: &ExperimentConfig,
    out: &Path,
    mut manifest: Map<String, Value>,
    mut notes: Vec<String>,
    mut code: i32,
) -> Outcome {
    manifest.insert("exit_code".into(), json!(code));
    let manifest = Value::Object(manifest);
    if cfg.output.formats.contains(&Format::Json) {
        let written = fs::create_dir_all(out).and_then(|_| {
            let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
            text.push('\n');
            fs::write(out.join("manifest.json"), text)
        });
        if let Err(e) = written {
            notes.push(format!("i/o: manifest: {e}"));
            code = EXIT_IO;
        }
    }
    Outcome { code, manifest, notes }
}

impl Run<'_> {
    fn write_csv(&self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> graphscale_core::Result<()>) -> Step<()> {
        if !self.cfg.output.formats.contains(&Format::Csv) {
            return Ok(());
        }
        let mut w = BufWriter::new(File::create(self.out.join(name))?);
        f(&mut w)?;
        w.flush()?;
        Ok(())
    }

    fn pressure_options(&self) -> PressureOptions {
        self.cfg.compute.pressure_options(&self.sys)
    }

    fn hypothesis(&mut self) -> Step<HypothesisReport> {
        let c = &self.cfg.compute;
        let rep = validate_hypotheses(&self.sys, c.hypothesis_period, c.acim_resolution)?;
        let mut v = serde_json::to_value(&rep).expect("report serializes");
        let (lo, hi) = rep.scale_window();
        v["acim_mean_exp"] = json!(rep.acim_log_g_mean.exp());
        v["scale_window"] = json!([lo, hi]);
        if let Some(o) = &rep.witness {
            v["witness_geometric_mean"] = json!(o.geometric_mean());
        }
        if let MultiplierSpec::Cosine { r, .. } = &self.cfg.system.multiplier {
            // the window for r in g = r g0
            v["r_window"] = json!([r.value() * lo, r.value() * hi]);
            v["acim_mean_exp_unscaled"] = json!(rep.acim_log_g_mean.exp() / r.value());
            if let Some(o) = &rep.witness {
                v["witness_geometric_mean_unscaled"] = json!(o.geometric_mean() / r.value());
            }
        }
        self.manifest.insert("hypothesis".into(), v);
        Ok(rep)
    }

    fn pressure(&mut self) -> Step<f64> {
        if let Some(c) = &self.curve {
            return Ok(c.s_star);
        }
        let curve = find_sstar(&self.sys, &self.pressure_options())?;
        self.write_csv("pressure.csv", |w| curve.write_csv(w))?;
        self.manifest.insert("pressure".into(), curve.summary_json());
        let s = curve.s_star;
        self.curve = Some(curve);
        Ok(s)
    }

    fn graph(&mut self) -> Step<()> {
        if self.graph.is_none() {
            let g = compute_graph_with(&self.sys, &self.cfg.compute.graph_options())?;
            self.manifest.insert("graph".into(), g.summary_json());
            self.graph = Some(g);
        }
        Ok(())
    }

    fn tail(&mut self) -> Step<()> {
        let s = self.pressure()?;
        self.graph()?;
        let rep = tail_exponent(self.graph.as_ref().unwrap(), self.cfg.compute.window)?.with_prediction(s);
        self.write_csv("tail.csv", |w| rep.write_csv(w))?;
        self.manifest.insert(
            "tail".into(),
            json!({
                "window": [rep.window.0, rep.window.1],
                "slope": rep.slope,
                "intercept": rep.intercept,
                "r2": rep.r2,
                "slope_stderr": rep.slope_stderr,
                "fit_points": rep.fit_points,
                "predicted": s,
                "error": rep.slope - s,
            }),
        );
        Ok(())
    }

    fn xi(&mut self) -> Step<()> {
        let s = self.pressure()?;
        self.graph()?;
        let rep = global_xi(self.graph.as_ref().unwrap(), None, self.cfg.compute.window)?;
        self.write_csv("xi.csv", |w| rep.write_csv(w))?;
        self.manifest.insert(
            "xi".into(),
            json!({
                "window": [rep.window.0, rep.window.1],
                "slope_log_xi": rep.slope_log_xi,
                "r2_log_xi": rep.r2_log_xi,
                "slope_log_one_minus_xi": rep.slope_log_one_minus_xi,
                "r2_log_one_minus_xi": rep.r2_log_one_minus_xi,
                "stderr_log_one_minus_xi": rep.stderr_log_one_minus_xi,
                "predicted_log_one_minus_xi": s,
                "error": rep.slope_log_one_minus_xi - s,
            }),
        );
        Ok(())
    }

    fn index(&mut self) -> Step<()> {
        let s = self.pressure()?;
        let c = &self.cfg.compute;
        let opts = c.index_options();
        let mut points = Vec::new();
        for (i, theta) in c.index_points.iter().enumerate() {
            let rep = local_sigma_empirical(&self.sys, theta.value(), c.ladder.0..=c.ladder.1, s, &opts)?;
            self.write_csv(&format!("index_{i}.csv"), |w| rep.write_csv(w))?;
            points.push(json!({
                "theta": rep.theta,
                "gamma": rep.gamma,
                "lambda": rep.lambda,
                "regime": rep.regime,
                "sigma_plus_predicted": rep.predicted_plus,
                "sigma_minus_predicted": rep.predicted_minus,
                "predicted": rep.predicted(),
                "empirical": rep.empirical,
                "relative_error": rep.relative_error,
                "r2": rep.r2,
                "rungs": rep.rungs.len(),
                "rungs_used": rep.rungs.iter().filter(|r| r.used).count(),
                "bound_violations": rep.bound_violations,
            }));
        }
        self.manifest
            .insert("index".into(), json!({ "s_star": s, "points": points }));
        Ok(())
    }

    /// Runtime property checks; false when any of them fails.
    fn check(&mut self) -> Step<bool> {
        let c = self.cfg.compute.clone();
        let sched = AlphaSchedule::new(c.schedule_delta);
        let sweep = distortion_sweep(
            &self.sys,
            c.check_points,
            &c.check_depths,
            &c.check_starts,
            &sched,
            c.seed,
        );
        let mut pass = sweep.distortion_failures == 0 && sweep.lower_bound_failures == 0;
        let mut block = Map::new();
        block.insert("distortion".into(), serde_json::to_value(&sweep).expect("serializes"));

        let (ops, ops_pass) = self.operator_sanity()?;
        pass &= ops_pass;
        block.insert("operator".into(), ops);

        if let Some((conj, conj_pass)) = self.conjugacy()? {
            pass &= conj_pass;
            block.insert("conjugacy".into(), conj);
        }
        block.insert("pass".into(), json!(pass));
        self.manifest.insert("check".into(), Value::Object(block));
        if !pass {
            self.notes.push("runtime property checks failed; see manifest".into());
        }
        Ok(pass)
    }

    fn operator_sanity(&mut self) -> Step<(Value, bool)> {
        let opts = self.pressure_options();
        let s_star = self.pressure()?;
        let psi0 = pressure(&self.sys, 0.0, &opts)?;
        let convexity = self.curve.as_ref().unwrap().convexity_violations(SANITY_TOL);

        let scaled = self.sys.with_multiplier(self.sys.mult().scaled(SCALE_FACTOR)?)?;
        let probes = [0.5 * s_star, s_star, 2.0 * s_star];
        let mut scale_err = 0.0f64;
        for &s in &probes {
            let lhs = pressure(&scaled, s, &opts)?;
            let rhs = pressure(&self.sys, s, &opts)? - s * SCALE_FACTOR.ln();
            scale_err = scale_err.max((lhs - rhs).abs());
        }

        let mut v = json!({
            "psi_at_zero": psi0,
            "convexity_violations": convexity,
            "scale_factor": SCALE_FACTOR,
            "scale_equivariance_error": scale_err,
        });
        let mut pass = psi0.abs() <= SANITY_TOL && convexity == 0 && scale_err <= SANITY_TOL;

        if opts.mode == MatrixMode::ExactMarkov {
            let cells = self.sys.base().num_cells();
            let mut agreement = Vec::new();
            for mult in [2, 16, 128] {
                let ulam = PressureOptions {
                    resolution: mult * cells,
                    mode: MatrixMode::Ulam,
                    ..opts
                };
                let mut err = 0.0f64;
                for &s in &probes {
                    err = err.max((pressure(&self.sys, s, &ulam)? - pressure(&self.sys, s, &opts)?).abs());
                }
                pass &= err <= SANITY_TOL;
                agreement.push(json!({ "resolution": mult * cells, "max_error": err }));
            }
            v["ulam_exact_agreement"] = json!(agreement);
        }
        v["pass"] = json!(pass);
        Ok((v, pass))
    }

    /// Two-sided comparison for baker systems whose multiplier is the cosine family.
    fn conjugacy(&self) -> Step<Option<(Value, bool)>> {
        let (MapSpec::Baker { split }, MultiplierSpec::Cosine { r, eps }) =
            (&self.cfg.system.map, &self.cfg.system.multiplier)
        else {
            return Ok(None);
        };
        let cc = &self.cfg.compute.conjugacy;
        let driver = HyperbolicDriver::baker(split.value())?;
        let ghat = StateMultiplier::cosine_exp(r.value(), eps.value(), cc.beta);
        let reduced = reduce_multiplier(&driver, &ghat, cc.reduction_depth)?;
        let rep = check_conjugacy_bound(
            &driver,
            &ghat,
            self.sys.fiber(),
            &reduced,
            cc.samples,
            cc.depth,
            self.cfg.compute.seed,
            self.cfg.compute.zero_floor,
        )?;

        let mut residual = 0.0f64;
        for i in 0..RESIDUAL_GRID {
            for j in 0..RESIDUAL_GRID {
                let p = DriverState::new(
                    (i as f64 + 0.5) / RESIDUAL_GRID as f64,
                    (j as f64 + 0.5) / RESIDUAL_GRID as f64,
                );
                residual = residual.max(reduced.coboundary_residual(p).abs());
            }
        }
        let residual_ok = residual <= reduced.residual_bound() + 1e-12;
        let pass = rep.pass && residual_ok;
        let mut v = serde_json::to_value(&rep).expect("serializes");
        v["beta"] = json!(cc.beta);
        v["reduction_depth"] = json!(cc.reduction_depth);
        v["truncation_bound"] = json!(reduced.truncation_bound());
        v["b_hat_sup"] = json!(reduced.b_hat_sup());
        v["max_coboundary_residual"] = json!(residual);
        v["residual_bound"] = json!(reduced.residual_bound());
        v["pass"] = json!(pass);
        Ok(Some((v, pass)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_includes_every_step() {
        for c in [
            Command::Graph,
            Command::Pressure,
            Command::Tail,
            Command::Xi,
            Command::Index,
            Command::Check,
        ] {
            assert!(Command::All.includes(c));
            assert!(c.includes(c));
        }
        assert!(!Command::Graph.includes(Command::Pressure));
    }
}
