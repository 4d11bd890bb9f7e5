//! CSV and JSON artifact writers. All numbers are written with 17
//! significant digits so that a double round-trips losslessly, and map keys
//! are ordered, so identical inputs produce byte-identical files.

use blowup_core::evolve::{EvolutionState, RunTrace};
use blowup_core::profile::RadialProfile;
use blowup_core::report::{Report, Verdict};
use serde_json::{json, Map, Value};
use std::fs;
use std::io::Write;
use std::path::Path;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_file(path: &Path, contents: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(contents.as_bytes())
}

/// Profile samples: `r, phi, phi_prime`.
pub fn write_profile_csv(path: &Path, profile: &RadialProfile) -> std::io::Result<()> {
    let mut out = String::from("r,phi,phi_prime\n");
    for ((&r, &phi), &prime) in
        profile.r.iter().zip(&profile.phi).zip(&profile.phi_prime)
    {
        out.push_str(&format!("{},{},{}\n", fmt_f64(r), fmt_f64(phi), fmt_f64(prime)));
    }
    write_file(path, &out)
}

/// JSON sidecar of a profile: shooting value, dimension, nonlinearity,
/// tail constant, classification and tolerances.
pub fn profile_sidecar(profile: &RadialProfile, tol: f64, record_dr: f64) -> Value {
    let (kind, p) = match profile.nl {
        blowup_core::Nonlinearity::Exponential => ("exponential", None),
        blowup_core::Nonlinearity::Power { p } => ("power", Some(p)),
    };
    let classification = format!("{:?}", profile.classification);
    json!({
        "alpha": profile.alpha,
        "n": profile.dim,
        "nonlinearity": kind,
        "p": p,
        "tail_constant": profile.tail_constant,
        "classification": classification,
        "r_max": profile.r_max(),
        "samples": profile.r.len(),
        "tol": tol,
        "record_dr": record_dr,
        "diagnostic": profile.diagnostic,
    })
}

/// Run trace: `t, sup_norm, dt, grad_margin` (margin column empty when not
/// tracked).
pub fn write_trace_csv(path: &Path, trace: &RunTrace) -> std::io::Result<()> {
    let mut out = String::from("t,sup_norm,grad_margin\n");
    for (k, (&t, &sup)) in trace.times.iter().zip(&trace.sup_norms).enumerate() {
        let margin = trace.grad_margins.get(k).map(|&m| fmt_f64(m)).unwrap_or_default();
        out.push_str(&format!("{},{},{}\n", fmt_f64(t), fmt_f64(sup), margin));
    }
    write_file(path, &out)
}

/// State snapshot: `r, u`.
pub fn write_snapshot_csv(path: &Path, state: &EvolutionState) -> std::io::Result<()> {
    let mut out = String::from("r,u\n");
    for (&r, &u) in state.grid.iter().zip(&state.u) {
        out.push_str(&format!("{},{}\n", fmt_f64(r), fmt_f64(u)));
    }
    write_file(path, &out)
}

/// Window extraction: `x, g`.
pub fn write_window_csv(path: &Path, xs: &[f64], gs: &[f64]) -> std::io::Result<()> {
    let mut out = String::from("x,g\n");
    for (&x, &g) in xs.iter().zip(gs) {
        out.push_str(&format!("{},{}\n", fmt_f64(x), fmt_f64(g)));
    }
    write_file(path, &out)
}

/// Structured report as ordered JSON.
pub fn report_to_json(report: &Report) -> Value {
    let mut measured = Map::new();
    for (k, v) in &report.measured {
        measured.insert(k.clone(), json!(v));
    }
    let mut tolerances = Map::new();
    for (k, bound) in &report.tolerances {
        let (op, value) = bound.describe();
        tolerances.insert(k.clone(), json!({ "op": op, "value": value }));
    }
    let mut inputs = Map::new();
    for (k, v) in &report.inputs {
        inputs.insert(k.clone(), json!(v));
    }
    json!({
        "check": report.check_name,
        "parameters": inputs,
        "measured": measured,
        "tolerances": tolerances,
        "verdict": report.verdict().as_str(),
        "notes": report.notes,
    })
}

pub fn write_json(path: &Path, value: &Value) -> std::io::Result<()> {
    write_file(path, &format!("{}\n", serde_json::to_string_pretty(value).unwrap()))
}

/// Verdict rollup helper for manifests.
pub fn verdicts_pass(reports: &[&Report]) -> bool {
    reports.iter().all(|r| {
        matches!(r.verdict(), Verdict::Pass | Verdict::Inapplicable | Verdict::Inconclusive)
    })
}
