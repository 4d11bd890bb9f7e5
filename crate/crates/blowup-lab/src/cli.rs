//! Command-line surface.
//!
//! ```text
//! blowup-lab <area> <action> [--config FILE] [key=value ...]
//! blowup-lab suite <name>    [--config FILE] [key=value ...]
//! ```
//!
//! The subcommand fixes `command`; a config file and inline `key = value`
//! overrides (applied in order) fill the rest. Exit codes: 0 pass or
//! non-verifying, 1 failed verdict, 2 usage error, 3 runtime error.

use crate::config::{parse_config, serialize_config, Command, ExperimentConfig};
use crate::run::run_experiment;
use serde_json::json;

const USAGE: &str = "usage: blowup-lab <command> [--config FILE] [key=value ...]

commands:
  profile shoot|scan|singular
  semigroup norm|mehler|check
  evolve run|wframe
  verify convergence|theorem2|theorem4|loglog|classify|refined
  suite semigroup|profiles|evolution|theorems|all

keys use the config-file names (alpha, n, r, profile.tol, semigroup.q, ...);
see the README for the full table.";

pub fn main_with_args(args: &[String]) -> i32 {
    match execute(args) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("{msg}");
            eprintln!();
            eprintln!("{USAGE}");
            2
        }
        Err(CliError::Runtime(msg)) => {
            // machine-readable error on stdout, human-readable on stderr
            println!("{}", json!({ "error": msg }));
            eprintln!("error: {msg}");
            3
        }
    }
}

enum CliError {
    Usage(String),
    Runtime(String),
}

fn execute(args: &[String]) -> Result<i32, CliError> {
    if args.is_empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help" {
        println!("{USAGE}");
        return Ok(if args.is_empty() { 2 } else { 0 });
    }

    // Resolve the command from one or two leading words.
    let (command, mut rest): (Command, &[String]) = if args[0] == "suite" {
        if args.len() < 2 {
            return Err(CliError::Usage("suite needs a name".into()));
        }
        (Command::Suite, &args[1..])
    } else {
        if args.len() < 2 {
            return Err(CliError::Usage(format!("incomplete command '{}'", args[0])));
        }
        let dotted = format!("{}.{}", args[0], args[1]);
        let Some(cmd) = Command::parse(&dotted) else {
            return Err(CliError::Usage(format!("unknown command '{} {}'", args[0], args[1])));
        };
        (cmd, &args[2..])
    };

    // The suite name rides as the first positional argument.
    let mut overrides: Vec<String> = Vec::new();
    if command == Command::Suite {
        let name = &rest[0];
        overrides.push(format!("suite.name = {name}"));
        rest = &rest[1..];
    }

    let mut config_text = format!("command = {}\n", command.as_str());
    let mut i = 0;
    while i < rest.len() {
        let arg = &rest[i];
        if arg == "--config" {
            let Some(path) = rest.get(i + 1) else {
                return Err(CliError::Usage("--config needs a file path".into()));
            };
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Runtime(format!("cannot read config '{path}': {e}")))?;
            // strip any command line in the file; the subcommand wins
            for line in text.lines() {
                let trimmed = line.split('#').next().unwrap_or("").trim();
                if trimmed.starts_with("command") {
                    continue;
                }
                config_text.push_str(line);
                config_text.push('\n');
            }
            // return to the top-level section so that bare override keys
            // are not captured by the file's last section header
            config_text.push_str("[]\n");
            i += 2;
            continue;
        }
        if let Some((_, _)) = arg.split_once('=') {
            overrides.push(arg.clone());
            i += 1;
            continue;
        }
        return Err(CliError::Usage(format!("unexpected argument '{arg}'")));
    }
    for line in &overrides {
        config_text.push_str(line);
        config_text.push('\n');
    }

    let cfg: ExperimentConfig =
        parse_config(&config_text).map_err(|e| CliError::Usage(e.to_string()))?;

    let summary = run_experiment(&cfg).map_err(|e| CliError::Runtime(e.to_string()))?;
    for message in &summary.messages {
        println!("{message}");
    }
    println!("artifacts: {}", summary.out_dir.display());
    Ok(summary.exit_code)
}

/// Canonical echo of a parsed config, used by tooling tests.
pub fn canonical_config(text: &str) -> Result<String, String> {
    parse_config(text).map(|cfg| serialize_config(&cfg)).map_err(|e| e.to_string())
}
