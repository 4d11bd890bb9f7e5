//! Acceptance battery: every criterion runs at its stated tolerance and
//! prints one pass/fail line (visible with `--nocapture`).
//!
//! Criterion 12 (determinism) replays the whole battery and compares the
//! rendered verdict tables, so it runs the other criteria a second time.

use blowup_lab::suite::{run_criterion, run_suite, SuiteContext};

fn ctx() -> SuiteContext {
    SuiteContext::default()
}

fn assert_criterion(id: usize) {
    let result = run_criterion(id, &ctx());
    println!("{}", result.line());
    for d in &result.details {
        println!("    {d}");
    }
    assert!(result.passed, "criterion {id} failed:\n{}", result.details.join("\n"));
}

#[test]
fn criterion_01_singular_profile_residuals() {
    assert_criterion(1);
}

#[test]
fn criterion_02_kappa_identities() {
    assert_criterion(2);
}

#[test]
fn criterion_03_kernel_engine() {
    assert_criterion(3);
}

#[test]
fn criterion_04_regularization_sweep() {
    assert_criterion(4);
}

#[test]
fn criterion_05_perturbed_semigroup() {
    assert_criterion(5);
}

#[test]
fn criterion_06_profile_scan() {
    assert_criterion(6);
}

#[test]
fn criterion_07_evolution_engine() {
    assert_criterion(7);
}

#[test]
fn criterion_08_final_time_profiles() {
    assert_criterion(8);
}

#[test]
fn criterion_09_loglog_family() {
    assert_criterion(9);
}

#[test]
fn criterion_10_rescaled_frame_stationarity() {
    assert_criterion(10);
}

#[test]
fn criterion_11_classification_table() {
    assert_criterion(11);
}

#[test]
fn criterion_12_determinism_of_the_full_battery() {
    let outcome = run_suite("all", &ctx()).expect("known suite");
    print!("{}", outcome.table());
    let det = outcome.rows.iter().find(|r| r.id == 12).expect("determinism row");
    assert!(det.passed, "determinism failed:\n{}", det.details.join("\n"));
    assert!(outcome.all_passed, "battery failures:\n{}", outcome.detailed());
}
