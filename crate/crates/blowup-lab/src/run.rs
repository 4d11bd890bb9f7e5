//! Experiment dispatch: maps a validated configuration to the underlying
//! operations, writes the CSV/JSON artifacts plus a manifest sufficient to
//! re-run the experiment, and reports an exit code (0 pass / non-verifying,
//! 1 failed verdict).

use crate::artifacts::{
    self, profile_sidecar, report_to_json, write_json, write_profile_csv, write_snapshot_csv,
    write_trace_csv, write_window_csv,
};
use crate::config::{CheckKind, Command, ExperimentConfig};
use crate::rng::{random_bump, SplitMix64};
use crate::suite::{run_suite, SuiteContext};
use blowup_core::evolve::{
    discrete_steady_state, exact_selfsimilar, fit_blowup, run_until_blowup, w_frame_evolve,
    EvolutionState, EvolveOptions, RunCaps,
};
use blowup_core::field::{FarField, PotentialField, WeightedField};
use blowup_core::lambda::{check_lambda_regularization, LambdaScenario};
use blowup_core::mehler::{
    check_hermite_regularization, check_potential_decay, eval_grid, mehler_apply,
    HermiteCheckParams,
};
use blowup_core::model::DomainSpec;
use blowup_core::norms::shifted_norm;
use blowup_core::profile::{scan_alphas, shoot_profile, singular_profile, ShootOptions};
use blowup_core::report::Report;
use blowup_core::verify::{
    final_profile, loglog_profile_check, mm_classify, refined_profile_fit, similarity_convergence,
};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug)]
pub struct RunSummary {
    pub exit_code: i32,
    pub out_dir: PathBuf,
    pub messages: Vec<String>,
}

#[derive(Debug)]
pub enum RunError {
    Runtime(String),
    Io(std::io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Runtime(m) => write!(f, "{m}"),
            RunError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

impl From<blowup_core::Error> for RunError {
    fn from(e: blowup_core::Error) -> Self {
        RunError::Runtime(e.to_string())
    }
}

/// Environment variable naming the default artifact root.
pub const OUT_ROOT_ENV: &str = "BLOWUP_LAB_OUT";

fn resolve_out_dir(cfg: &ExperimentConfig) -> PathBuf {
    if let Some(dir) = &cfg.out_dir {
        return dir.clone();
    }
    let root = std::env::var(OUT_ROOT_ENV).unwrap_or_else(|_| "out".into());
    Path::new(&root).join(cfg.command.as_str().replace('.', "_"))
}

fn shoot_options(cfg: &ExperimentConfig) -> ShootOptions {
    ShootOptions {
        r_max: cfg.profile_r_max,
        tol: cfg.profile_tol,
        record_dr: cfg.record_dr,
        ..ShootOptions::default()
    }
}

struct Manifest {
    command: Command,
    config_text: String,
    artifacts: Vec<String>,
    verdicts: Vec<(String, String)>,
    notes: Vec<String>,
    started: Instant,
}

impl Manifest {
    fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            command: cfg.command,
            config_text: crate::config::serialize_config(cfg),
            artifacts: Vec::new(),
            verdicts: Vec::new(),
            notes: Vec::new(),
            started: Instant::now(),
        }
    }

    fn artifact(&mut self, path: &Path) {
        self.artifacts.push(path.file_name().unwrap().to_string_lossy().into_owned());
    }

    fn verdict_of(&mut self, report: &Report) {
        self.verdicts.push((report.check_name.clone(), report.verdict().as_str().to_string()));
    }

    fn to_json(&self) -> Value {
        json!({
            "command": self.command.as_str(),
            "config": self.config_text,
            "version": env!("CARGO_PKG_VERSION"),
            "wall_time_s": self.started.elapsed().as_secs_f64(),
            "artifacts": self.artifacts,
            "verdicts": self.verdicts.iter().map(|(k, v)| json!({"check": k, "verdict": v})).collect::<Vec<_>>(),
            "notes": self.notes,
        })
    }

    fn failed(&self) -> bool {
        self.verdicts.iter().any(|(_, v)| v == "fail")
    }
}

/// Execute a configuration end to end. Artifacts land in the configured
/// output directory (or `$BLOWUP_LAB_OUT/<command>`).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary, RunError> {
    let out_dir = resolve_out_dir(cfg);
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| RunError::Runtime(format!("output not writable: {e}")))?;
    let probe = out_dir.join(".write_probe");
    std::fs::write(&probe, b"ok")
        .map_err(|e| RunError::Runtime(format!("output not writable: {e}")))?;
    let _ = std::fs::remove_file(&probe);

    let mut manifest = Manifest::new(cfg);
    let mut messages = Vec::new();
    let nl = cfg.nonlinearity()?;

    match cfg.command {
        Command::ProfileShoot => {
            let shot = shoot_profile(cfg.alpha, &nl, cfg.dim, &shoot_options(cfg))?;
            let csv = out_dir.join("profile.csv");
            write_profile_csv(&csv, &shot)?;
            manifest.artifact(&csv);
            let sidecar = out_dir.join("profile.json");
            write_json(&sidecar, &profile_sidecar(&shot, cfg.profile_tol, cfg.record_dr))?;
            manifest.artifact(&sidecar);
            messages.push(format!(
                "alpha = {}, classification {:?}, tail constant {:?}",
                cfg.alpha, shot.classification, shot.tail_constant
            ));
        }
        Command::ProfileScan => {
            let outcome = scan_alphas(
                &nl,
                cfg.dim,
                cfg.scan_lo,
                cfg.scan_hi,
                cfg.scan_grid,
                &shoot_options(cfg),
            )?;
            let mut rows = String::from("alpha,defect\n");
            for (a, d) in &outcome.defects {
                rows.push_str(&format!(
                    "{},{}\n",
                    artifacts::fmt_f64(*a),
                    d.map(artifacts::fmt_f64).unwrap_or_default()
                ));
            }
            let defects_csv = out_dir.join("scan_defects.csv");
            std::fs::write(&defects_csv, rows)?;
            manifest.artifact(&defects_csv);
            let candidates = out_dir.join("candidates.json");
            write_json(
                &candidates,
                &json!({
                    "candidates": outcome.candidates.iter().map(|c| json!({
                        "alpha": c.alpha,
                        "tail_constant": c.tail_constant,
                        "drift": c.drift,
                    })).collect::<Vec<_>>(),
                    "diagnostic": outcome.diagnostic,
                }),
            )?;
            manifest.artifact(&candidates);
            if let Some(d) = &outcome.diagnostic {
                manifest.notes.push(d.clone());
            }
            messages.push(format!("{} candidates", outcome.candidates.len()));
            for c in &outcome.candidates {
                messages.push(format!("  alpha = {:.10}, C = {:.8}", c.alpha, c.tail_constant));
            }
        }
        Command::ProfileSingular => {
            let prof = singular_profile(&nl, cfg.dim)?;
            let csv = out_dir.join("singular_profile.csv");
            write_profile_csv(&csv, &prof)?;
            manifest.artifact(&csv);
            let sidecar = out_dir.join("singular_profile.json");
            write_json(&sidecar, &profile_sidecar(&prof, cfg.profile_tol, cfg.record_dr))?;
            manifest.artifact(&sidecar);
            messages.push(format!("tail constant {:?}", prof.tail_constant));
        }
        Command::SemigroupNorm => {
            let mut rng = SplitMix64::new(cfg.seed);
            let field =
                WeightedField::from_fn(random_bump(&mut rng), 16.0, 640, cfg.dim, FarField::Zero)?;
            let value = shifted_norm(&field, cfg.q, cfg.xi)?;
            let json_path = out_dir.join("norm.json");
            write_json(
                &json_path,
                &json!({"q": cfg.q, "xi": cfg.xi, "seed": cfg.seed, "value": value}),
            )?;
            manifest.artifact(&json_path);
            messages.push(format!("shifted norm = {value:.12e}"));
        }
        Command::SemigroupMehler => {
            let mut rng = SplitMix64::new(cfg.seed);
            let field =
                WeightedField::from_fn(random_bump(&mut rng), 16.0, 640, cfg.dim, FarField::Zero)?;
            let grid = eval_grid(20.0, 0.05);
            let out = mehler_apply(&field, cfg.t, &grid)?;
            let mut rows = String::from("r,psi,evolved\n");
            for &r in out.grid() {
                rows.push_str(&format!(
                    "{},{},{}\n",
                    artifacts::fmt_f64(r),
                    artifacts::fmt_f64(field.eval(r)),
                    artifacts::fmt_f64(out.eval(r))
                ));
            }
            let csv = out_dir.join("kernel_apply.csv");
            std::fs::write(&csv, rows)?;
            manifest.artifact(&csv);
            messages.push(format!("applied the kernel for t = {}", cfg.t));
        }
        Command::SemigroupCheck => {
            let report = semigroup_check(cfg)?;
            let path = out_dir.join("report.json");
            write_json(&path, &report_to_json(&report))?;
            manifest.artifact(&path);
            manifest.verdict_of(&report);
            messages.push(format!("{}: {}", report.check_name, report.verdict().as_str()));
        }
        Command::EvolveRun => {
            let domain = DomainSpec::new(cfg.dim, cfg.radius)?;
            let amplitude = cfg.amplitude;
            let initial = EvolutionState::from_fn(
                |r| amplitude * (1.0 - (r / domain.radius).powi(2)),
                &domain,
                cfg.grid_m,
            )?;
            let caps = RunCaps {
                sup_cap: cfg.effective_sup_cap(),
                t_cap: cfg.t_cap,
                snapshot_sup_levels: vec![],
                track_gradient_margin: !nl.is_power(),
            };
            let opts = EvolveOptions {
                dt_max: cfg.dt_max,
                c_safety: cfg.c_safety,
                ..EvolveOptions::default()
            };
            let run = run_until_blowup(initial, &nl, &domain, &caps, &opts)?;
            let trace_csv = out_dir.join("trace.csv");
            write_trace_csv(&trace_csv, &run.trace)?;
            manifest.artifact(&trace_csv);
            let final_csv = out_dir.join("final_state.csv");
            write_snapshot_csv(&final_csv, &run.final_state)?;
            manifest.artifact(&final_csv);
            match fit_blowup(&run.trace, &nl) {
                Ok(fit) => {
                    let fit_json = out_dir.join("fit.json");
                    write_json(
                        &fit_json,
                        &json!({
                            "blowup_time": fit.blowup_time,
                            "rate_band": [fit.band.0, fit.band.1],
                            "r_squared": fit.r_squared,
                            "slope": fit.slope,
                            "stop": format!("{:?}", run.trace.stop),
                        }),
                    )?;
                    manifest.artifact(&fit_json);
                    messages.push(format!(
                        "stop {:?}; fitted T = {:.10e} (r^2 = {:.6})",
                        run.trace.stop, fit.blowup_time, fit.r_squared
                    ));
                }
                Err(e) => {
                    manifest.notes.push(format!("no blow-up detected: {e}"));
                    messages.push(format!("no blow-up detected: {e}"));
                }
            }
        }
        Command::EvolveWframe => {
            let shot = shoot_profile(cfg.alpha, &nl, cfg.dim, &shoot_options(cfg))?;
            let y_max = cfg.w_y_max;
            let field = WeightedField::from_fn_with_power_tail(
                |y| shot.eval(y),
                y_max + 1.0,
                1700,
                cfg.dim,
                0.0,
            )?;
            let boundary = shot.eval(y_max);
            let (y_grid, steady) = discrete_steady_state(&field, &nl, y_max, boundary, cfg.w_grid)?;
            let steady_field = WeightedField::new(
                y_grid.clone(),
                steady.clone(),
                cfg.dim,
                FarField::PowerLaw { exponent: 0.0, coefficient: *steady.last().unwrap() },
            )?;
            let traj = w_frame_evolve(
                &steady_field,
                &nl,
                y_max,
                cfg.w_span,
                boundary,
                cfg.w_grid,
                cfg.w_ds,
                4,
            )?;
            let drift = y_grid
                .iter()
                .zip(traj.final_values().iter().zip(&steady))
                .filter(|(&y, _)| y <= y_max / 2.0)
                .map(|(_, (&v, &w0))| (v - w0).abs())
                .fold(0.0_f64, f64::max);
            let mut report = Report::new("rescaled_frame_stationarity");
            report.require("drift", drift, blowup_core::Bound::AtMost(1e-3));
            let path = out_dir.join("report.json");
            write_json(&path, &report_to_json(&report))?;
            manifest.artifact(&path);
            manifest.verdict_of(&report);
            messages.push(format!("stationarity drift = {drift:.3e}"));
        }
        Command::VerifyConvergence => {
            let shot = shoot_profile(cfg.alpha, &nl, cfg.dim, &shoot_options(cfg))?;
            let domain = DomainSpec::new(cfg.dim, cfg.radius)?;
            let blowup_time = 1.0;
            let snapshots: Vec<EvolutionState> = [1e-2, 1e-3, 1e-4]
                .iter()
                .map(|&tl| exact_selfsimilar(&shot, tl, blowup_time - tl, &domain, 16384))
                .collect::<Result<_, _>>()?;
            let report = similarity_convergence(
                &snapshots,
                blowup_time,
                &shot,
                cfg.y_cap,
                cfg.tol_conv,
                &nl,
            )?;
            let path = out_dir.join("report.json");
            write_json(&path, &report_to_json(&report))?;
            manifest.artifact(&path);
            manifest.verdict_of(&report);
            messages.push(format!("verdict: {}", report.verdict().as_str()));
        }
        Command::VerifyTheorem2 => {
            let outcome = scan_alphas(&nl, cfg.dim, 5.0, 6.0, 24, &shoot_options(cfg))?;
            let candidate = outcome
                .candidates
                .first()
                .ok_or_else(|| RunError::Runtime("no converged profile candidate".into()))?;
            let shot = shoot_profile(candidate.alpha, &nl, cfg.dim, &shoot_options(cfg))?;
            let tail = shot
                .tail_constant
                .ok_or_else(|| RunError::Runtime("candidate lost tail convergence".into()))?;
            let domain = DomainSpec::new(cfg.dim, cfg.radius)?;
            let state = exact_selfsimilar(&shot, cfg.time_left, 1.0 - cfg.time_left, &domain, 8192)?;
            let window = (10.0 * cfg.time_left.sqrt(), 0.1 * cfg.radius);
            let got = final_profile(&state, &nl, window, cfg.time_left, Some(tail), cfg.tol_prof)?;
            let xs: Vec<f64> = state
                .grid
                .iter()
                .copied()
                .filter(|&x| x >= window.0 && x <= window.1)
                .collect();
            let gs: Vec<f64> = xs.iter().map(|&x| state.eval(x) + 2.0 * x.ln()).collect();
            let csv = out_dir.join("window.csv");
            write_window_csv(&csv, &xs, &gs)?;
            manifest.artifact(&csv);
            let path = out_dir.join("report.json");
            write_json(&path, &report_to_json(&got.report))?;
            manifest.artifact(&path);
            manifest.verdict_of(&got.report);
            messages.push(format!(
                "C_est = {:.8} vs tail constant {tail:.8}; oscillation {:.3e}",
                got.c_estimate, got.oscillation
            ));
        }
        Command::VerifyTheorem4 => {
            let p = cfg.power_exponent.unwrap_or(3.0);
            let dim = if cfg.dim >= 3 { cfg.dim } else { 5 };
            let nl_p = blowup_core::Nonlinearity::power(p)?;
            let a = 2.0 / (p - 1.0);
            let base = a * (dim as f64 - 2.0 - a);
            if base <= 0.0 {
                return Err(RunError::Runtime(
                    "no positive singular amplitude for this (N, p)".into(),
                ));
            }
            let amplitude = base.powf(1.0 / (p - 1.0));
            let domain = DomainSpec::new(dim, cfg.radius)?;
            let state = EvolutionState::from_fn(
                |x| if x == 0.0 { 0.0 } else { amplitude * x.powf(-a) },
                &domain,
                4096,
            )?;
            let got = final_profile(
                &state,
                &nl_p,
                (cfg.window_lo, cfg.window_hi),
                cfg.time_left,
                Some(amplitude),
                cfg.tol_prof,
            )?;
            let path = out_dir.join("report.json");
            write_json(&path, &report_to_json(&got.report))?;
            manifest.artifact(&path);
            manifest.verdict_of(&got.report);
            messages.push(format!(
                "C_est = {:.12} vs L = {amplitude:.12}; oscillation {:.3e}",
                got.c_estimate, got.oscillation
            ));
        }
        Command::VerifyLoglog => {
            let domain = DomainSpec::new(cfg.dim, 0.3)?;
            let c = 3.0;
            let synthetic = EvolutionState::from_fn(
                |x| if x == 0.0 { 0.0 } else { -2.0 * x.ln() - x.ln().abs().ln() + c },
                &domain,
                8192,
            )?;
            let got = loglog_profile_check(
                &synthetic,
                (cfg.window_lo, cfg.window_hi),
                cfg.time_left,
                1e-9,
            )?;
            let path = out_dir.join("report.json");
            write_json(&path, &report_to_json(&got.report))?;
            manifest.artifact(&path);
            manifest.verdict_of(&got.report);
            messages.push(format!(
                "plus (C, osc) = ({:.6}, {:.3e}); minus (C, osc) = ({:.6}, {:.3e})",
                got.plus.0, got.plus.1, got.minus.0, got.minus.1
            ));
        }
        Command::VerifyClassify => {
            let p = cfg.power_exponent.unwrap_or(3.0);
            let dim = if cfg.dim >= 3 { cfg.dim } else { 5 };
            let domain = DomainSpec::new(dim, cfg.radius)?;
            let a = 2.0 / (p - 1.0);
            let alpha_scale = cfg.alpha;
            let state = EvolutionState::from_fn(
                |x| if x == 0.0 { 0.0 } else { alpha_scale * x.powf(-a) },
                &domain,
                4096,
            )?;
            let (label, report) =
                mm_classify(&state, p, dim, (cfg.window_lo, cfg.window_hi), cfg.time_left)?;
            let path = out_dir.join("report.json");
            write_json(&path, &report_to_json(&report))?;
            manifest.artifact(&path);
            manifest.verdict_of(&report);
            messages.push(format!("label: {:?}", label.map(|l| l.as_str())));
        }
        Command::VerifyRefined => {
            let domain = DomainSpec::new(cfg.dim, cfg.radius)?;
            let blowup_time = 1.0;
            let m = 2u32;
            let c = 0.25;
            let snapshots: Vec<EvolutionState> = [1e-4, 1e-5]
                .iter()
                .map(|&tl: &f64| {
                    let lam = blowup_core::model::refined_scale_at(tl, m)?;
                    let mut s = EvolutionState::from_fn(
                        |x| {
                            let xi = x / lam;
                            -tl.ln() - (1.0 + c * xi * xi).ln()
                        },
                        &domain,
                        8192,
                    )?;
                    s.t = blowup_time - tl;
                    Ok::<_, blowup_core::Error>(s)
                })
                .collect::<Result<_, _>>()?;
            let fit = refined_profile_fit(&snapshots, blowup_time, cfg.xi_cap, cfg.tol_fit)?;
            let path = out_dir.join("report.json");
            write_json(&path, &report_to_json(&fit.report))?;
            manifest.artifact(&path);
            manifest.verdict_of(&fit.report);
            messages.push(format!(
                "degree = {}, coefficient = {:.8}, residual = {:.3e}",
                fit.degree, fit.coefficient, fit.residual
            ));
        }
        Command::Suite => {
            let ctx = SuiteContext { seed: cfg.seed, parallelism: cfg.effective_parallelism() };
            let outcome = run_suite(&cfg.suite, &ctx)
                .ok_or_else(|| RunError::Runtime(format!("unknown suite '{}'", cfg.suite)))?;
            let table = outcome.table();
            let table_path = out_dir.join("verdicts.txt");
            std::fs::write(&table_path, &table)?;
            manifest.artifact(&table_path);
            let detail_path = out_dir.join("verdicts_detailed.txt");
            std::fs::write(&detail_path, outcome.detailed())?;
            manifest.artifact(&detail_path);
            for row in &outcome.rows {
                manifest
                    .verdicts
                    .push((row.name.to_string(), if row.passed { "pass" } else { "fail" }.into()));
            }
            messages.push(table.trim_end().to_string());
        }
    }

    let manifest_path = out_dir.join("manifest.json");
    write_json(&manifest_path, &manifest.to_json())?;
    let exit_code = if cfg.command.is_verifying() && manifest.failed() { 1 } else { 0 };
    Ok(RunSummary { exit_code, out_dir, messages })
}

fn semigroup_check(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let mut rng = SplitMix64::new(cfg.seed);
    let psi = WeightedField::from_fn(random_bump(&mut rng), 16.0, 640, cfg.dim, FarField::Zero)?;
    Ok(match cfg.check {
        CheckKind::Hermite => {
            let params = HermiteCheckParams {
                q: cfg.q,
                beta: cfg.beta,
                r: cfg.norm_r,
                r_tilde: cfg.norm_r_tilde,
                t: cfg.t,
            };
            check_hermite_regularization(&psi, &params)?
        }
        CheckKind::PotentialDecay => {
            let pot = PotentialField::capped_singular(cfg.dim.max(3), 0.5, 60.0, 3000)?;
            check_potential_decay(&pot, cfg.alpha_exp, cfg.xi, &cfg.t_list)?
        }
        CheckKind::Evolved => {
            let pot = PotentialField::capped_singular(cfg.dim.max(3), 0.5, 60.0, 3000)?;
            let scenario = LambdaScenario::Evolved {
                s: cfg.s,
                t: cfg.t,
                xi: cfg.xi,
                p: cfg.p_norm,
                beta: cfg.beta,
            };
            check_lambda_regularization(&psi, Some(&pot), &scenario)?
        }
        CheckKind::FullWindow => {
            let pot = PotentialField::capped_singular(cfg.dim.max(3), 0.5, 60.0, 3000)?;
            let scenario = LambdaScenario::FullWindow { s: cfg.s, xi: cfg.xi };
            check_lambda_regularization(&psi, Some(&pot), &scenario)?
        }
        CheckKind::Offset => {
            let pot = PotentialField::capped_singular(cfg.dim.max(3), 0.5, 60.0, 3000)?;
            let scenario = LambdaScenario::Offset { s: cfg.s, s0: cfg.s0, t: cfg.t, xi: cfg.xi };
            check_lambda_regularization(&psi, Some(&pot), &scenario)?
        }
    })
}
