//! CLI surface: exit codes, config validation, artifact layout, and
//! byte-determinism of CSV outputs for a fixed seed.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_blowup-lab"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn usage_errors_exit_2() {
    let (code, _, err) = run(&["bogus", "cmd"]);
    assert_eq!(code, 2, "{err}");
    let (code, _, err) = run(&["profile", "shoot", "n=2.5"]);
    assert_eq!(code, 2);
    assert!(err.contains("N must be integer"), "{err}");
    let (code, _, _) = run(&["suite", "nonsense"]);
    assert_eq!(code, 2);
}

#[test]
fn runtime_errors_exit_3_with_machine_readable_json() {
    let (code, out, _) = run(&["profile", "shoot", "out_dir=/proc/not_writable"]);
    assert_eq!(code, 3);
    let v: serde_json::Value = serde_json::from_str(out.lines().next().unwrap()).unwrap();
    assert!(v["error"].as_str().unwrap().contains("output not writable"));
}

#[test]
fn shoot_writes_csv_sidecar_and_manifest() {
    let dir = std::env::temp_dir().join("blowup_lab_test_shoot");
    let _ = std::fs::remove_dir_all(&dir);
    let (code, _, err) = run(&[
        "profile",
        "shoot",
        "alpha=0.5",
        "n=3",
        &format!("out_dir={}", dir.display()),
    ]);
    assert_eq!(code, 0, "{err}");
    for name in ["profile.csv", "profile.json", "manifest.json"] {
        assert!(dir.join(name).exists(), "{name} missing");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "profile.shoot");
    // the manifest embeds a config sufficient to re-run
    assert!(manifest["config"].as_str().unwrap().contains("profile.alpha"));
}

#[test]
fn config_file_plus_overrides() {
    let dir = std::env::temp_dir().join("blowup_lab_test_config");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("run.cfg");
    std::fs::write(
        &cfg_path,
        "# demo config\n[profile]\nalpha = 0.25\nr_max = 30\n",
    )
    .unwrap();
    let (code, out, err) = run(&[
        "profile",
        "shoot",
        "--config",
        cfg_path.to_str().unwrap(),
        "alpha=0.75", // override wins
        &format!("out_dir={}", dir.display()),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("alpha = 0.75"), "{out}");
}

#[test]
fn csv_outputs_are_byte_identical_for_a_seed() {
    let dir_a = std::env::temp_dir().join("blowup_lab_det_a");
    let dir_b = std::env::temp_dir().join("blowup_lab_det_b");
    for d in [&dir_a, &dir_b] {
        let _ = std::fs::remove_dir_all(d);
    }
    for d in [&dir_a, &dir_b] {
        let (code, _, err) = run(&[
            "semigroup",
            "mehler",
            "seed=77",
            "semigroup.t=0.8",
            &format!("out_dir={}", d.display()),
        ]);
        assert_eq!(code, 0, "{err}");
    }
    let a = std::fs::read(dir_a.join("kernel_apply.csv")).unwrap();
    let b = std::fs::read(dir_b.join("kernel_apply.csv")).unwrap();
    assert_eq!(a, b, "kernel CSV differs between identical runs");
}

#[test]
fn verifying_command_reports_verdict_in_manifest() {
    let dir = std::env::temp_dir().join("blowup_lab_test_check");
    let _ = std::fs::remove_dir_all(&dir);
    let (code, _, err) = run(&[
        "semigroup",
        "check",
        "semigroup.check=hermite",
        "semigroup.q=2.5",
        "semigroup.beta=3",
        "semigroup.t=1.2",
        &format!("out_dir={}", dir.display()),
    ]);
    assert_eq!(code, 0, "{err}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "pass");
    assert!(report["measured"]["margin"].as_f64().unwrap() >= -1e-8);
}

#[test]
fn loglog_and_classify_commands_pass_on_synthetics() {
    let dir = std::env::temp_dir().join("blowup_lab_test_verify");
    let _ = std::fs::remove_dir_all(&dir);
    let (code, out, err) = run(&[
        "verify",
        "loglog",
        &format!("out_dir={}", dir.join("loglog").display()),
    ]);
    assert_eq!(code, 0, "{out}{err}");
    let (code, out, _) = run(&[
        "verify",
        "classify",
        "p=3",
        "n=5",
        "alpha=2.8284271247461903", // 2 L
        &format!("out_dir={}", dir.join("classify").display()),
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("nonconstant"), "{out}");
}

#[test]
fn out_root_env_is_honored() {
    let root = std::env::temp_dir().join("blowup_lab_root_env");
    let _ = std::fs::remove_dir_all(&root);
    let out = bin()
        .args(["profile", "singular", "n=3"])
        .env("BLOWUP_LAB_OUT", root.as_os_str())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(Path::new(&root).join("profile_singular").join("singular_profile.csv").exists());
}
