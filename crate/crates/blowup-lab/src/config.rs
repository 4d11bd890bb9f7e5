//! Experiment configuration: a line-oriented `key = value` format with
//! optional `[section]` headers that prefix the keys that follow
//! (`[profile]` + `alpha` means `profile.alpha`), `#` comments, and full
//! validation against the known-key table. Unknown keys are rejected with
//! the offending line number.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "config line {}: {}", self.line, self.message)
        } else {
            write!(f, "config: {}", self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

/// CLI command addressed by a config.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    ProfileShoot,
    ProfileScan,
    ProfileSingular,
    SemigroupNorm,
    SemigroupMehler,
    SemigroupCheck,
    EvolveRun,
    EvolveWframe,
    VerifyConvergence,
    VerifyTheorem2,
    VerifyTheorem4,
    VerifyLoglog,
    VerifyClassify,
    VerifyRefined,
    Suite,
}

impl Command {
    pub fn parse(text: &str) -> Option<Self> {
        Some(match text {
            "profile.shoot" => Command::ProfileShoot,
            "profile.scan" => Command::ProfileScan,
            "profile.singular" => Command::ProfileSingular,
            "semigroup.norm" => Command::SemigroupNorm,
            "semigroup.mehler" => Command::SemigroupMehler,
            "semigroup.check" => Command::SemigroupCheck,
            "evolve.run" => Command::EvolveRun,
            "evolve.wframe" => Command::EvolveWframe,
            "verify.convergence" => Command::VerifyConvergence,
            "verify.theorem2" => Command::VerifyTheorem2,
            "verify.theorem4" => Command::VerifyTheorem4,
            "verify.loglog" => Command::VerifyLoglog,
            "verify.classify" => Command::VerifyClassify,
            "verify.refined" => Command::VerifyRefined,
            "suite" => Command::Suite,
            _ => return None,
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Command::ProfileShoot => "profile.shoot",
            Command::ProfileScan => "profile.scan",
            Command::ProfileSingular => "profile.singular",
            Command::SemigroupNorm => "semigroup.norm",
            Command::SemigroupMehler => "semigroup.mehler",
            Command::SemigroupCheck => "semigroup.check",
            Command::EvolveRun => "evolve.run",
            Command::EvolveWframe => "evolve.wframe",
            Command::VerifyConvergence => "verify.convergence",
            Command::VerifyTheorem2 => "verify.theorem2",
            Command::VerifyTheorem4 => "verify.theorem4",
            Command::VerifyLoglog => "verify.loglog",
            Command::VerifyClassify => "verify.classify",
            Command::VerifyRefined => "verify.refined",
            Command::Suite => "suite",
        }
    }

    /// Commands that carry a pass/fail verdict (exit code 1 on failure).
    pub fn is_verifying(&self) -> bool {
        matches!(
            self,
            Command::SemigroupCheck
                | Command::VerifyConvergence
                | Command::VerifyTheorem2
                | Command::VerifyTheorem4
                | Command::VerifyLoglog
                | Command::VerifyClassify
                | Command::VerifyRefined
                | Command::Suite
        )
    }
}

/// Semigroup check selector for `semigroup.check`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Hermite,
    PotentialDecay,
    Evolved,
    FullWindow,
    Offset,
}

impl CheckKind {
    pub fn parse(text: &str) -> Option<Self> {
        Some(match text {
            "hermite" => CheckKind::Hermite,
            "potential-decay" => CheckKind::PotentialDecay,
            "evolved" => CheckKind::Evolved,
            "full-window" => CheckKind::FullWindow,
            "offset" => CheckKind::Offset,
            _ => return None,
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            CheckKind::Hermite => "hermite",
            CheckKind::PotentialDecay => "potential-decay",
            CheckKind::Evolved => "evolved",
            CheckKind::FullWindow => "full-window",
            CheckKind::Offset => "offset",
        }
    }
}

/// Fully validated experiment configuration with defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    /// "exponential" or "power"; `p` applies to the power family only.
    pub power_exponent: Option<f64>,
    pub dim: u32,
    pub radius: f64,
    pub out_dir: Option<PathBuf>,
    pub parallelism: usize,
    pub seed: u64,

    // profile
    pub alpha: f64,
    pub profile_r_max: f64,
    pub profile_tol: f64,
    pub record_dr: f64,
    pub scan_lo: f64,
    pub scan_hi: f64,
    pub scan_grid: usize,

    // semigroup
    pub check: CheckKind,
    pub q: f64,
    pub beta: f64,
    pub norm_r: f64,
    pub norm_r_tilde: f64,
    pub t: f64,
    pub xi: f64,
    pub alpha_exp: f64,
    pub t_list: Vec<f64>,
    pub s: f64,
    pub s0: f64,
    pub p_norm: f64,
    pub draws: usize,

    // evolve
    pub grid_m: usize,
    pub sup_cap: Option<f64>,
    pub t_cap: f64,
    pub dt_max: f64,
    pub c_safety: f64,
    pub amplitude: f64,
    pub w_y_max: f64,
    pub w_span: f64,
    pub w_grid: usize,
    pub w_ds: f64,

    // verify
    pub window_lo: f64,
    pub window_hi: f64,
    pub time_left: f64,
    pub tol_prof: f64,
    pub tol_conv: f64,
    pub y_cap: f64,
    pub xi_cap: f64,
    pub tol_fit: f64,

    // suite
    pub suite: String,
}

impl ExperimentConfig {
    pub fn with_command(command: Command) -> Self {
        Self {
            command,
            power_exponent: None,
            dim: 3,
            radius: 1.0,
            out_dir: None,
            parallelism: 0, // 0: use the available parallelism
            seed: 20240,
            alpha: 1.0,
            profile_r_max: 40.0,
            profile_tol: 1e-10,
            record_dr: 2e-3,
            scan_lo: 0.0,
            scan_hi: 20.0,
            scan_grid: 200,
            check: CheckKind::Hermite,
            q: 2.0,
            beta: 2.0,
            norm_r: 1.0,
            norm_r_tilde: 1.0,
            t: 1.0,
            xi: 1.0,
            alpha_exp: 2.0,
            t_list: vec![2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
            s: 4.0,
            s0: 1.0,
            p_norm: 2.0,
            draws: 1000,
            grid_m: 2048,
            sup_cap: None,
            t_cap: 1e3,
            dt_max: 1e-3,
            c_safety: 0.08,
            amplitude: 8.0,
            w_y_max: 16.0,
            w_span: 1.0,
            w_grid: 1600,
            w_ds: 1e-3,
            window_lo: 1e-3,
            window_hi: 0.1,
            time_left: 1e-8,
            tol_prof: 0.05,
            tol_conv: 1e-6,
            y_cap: 1.0,
            xi_cap: 2.0,
            tol_fit: 0.05,
            suite: "all".into(),
        }
    }

    pub fn nonlinearity(&self) -> blowup_core::Result<blowup_core::Nonlinearity> {
        match self.power_exponent {
            None => Ok(blowup_core::Nonlinearity::Exponential),
            Some(p) => blowup_core::Nonlinearity::power(p),
        }
    }

    /// Default sup-norm cap: 25 for the exponential family, 1e6 for power.
    pub fn effective_sup_cap(&self) -> f64 {
        self.sup_cap.unwrap_or(if self.power_exponent.is_some() { 1e6 } else { 25.0 })
    }

    pub fn effective_parallelism(&self) -> usize {
        if self.parallelism > 0 {
            self.parallelism
        } else {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(8)
        }
    }
}

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError { line, message: message.into() }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = value
        .parse()
        .map_err(|_| err(line, format!("{key} must be a real number, got '{value}'")))?;
    if !v.is_finite() {
        return Err(err(line, format!("{key} must be finite")));
    }
    Ok(v)
}

fn parse_positive(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    let v = parse_f64(line, key, value)?;
    if v <= 0.0 {
        return Err(err(line, format!("{key} must be positive, got {v}")));
    }
    Ok(v)
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize, ConfigError> {
    value.parse().map_err(|_| err(line, format!("{key} must be a nonnegative integer, got '{value}'")))
}

/// Parse a config text into a validated configuration with defaults filled.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    // First pass: collect dotted key/value pairs with line numbers.
    let mut section = String::new();
    let mut pairs: Vec<(usize, String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(inner) = line.strip_prefix('[') {
            let Some(name) = inner.strip_suffix(']') else {
                return Err(err(line_no, "unterminated section header"));
            };
            // an empty header `[]` returns to the top-level section
            section = name.trim().to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(line_no, format!("expected key = value, got '{line}'")));
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(err(line_no, "empty key or value"));
        }
        let dotted = if section.is_empty() || key.contains('.') {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        pairs.push((line_no, dotted, value.to_string()));
    }

    // later occurrences override earlier ones (command-line overrides are
    // appended after config-file contents)
    let mut last: BTreeMap<String, (usize, String)> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for (line_no, key, value) in pairs {
        if !last.contains_key(&key) {
            order.push(key.clone());
        }
        last.insert(key, (line_no, value));
    }
    let pairs: Vec<(usize, String, String)> =
        order.into_iter().map(|k| {
            let (line_no, value) = last[&k].clone();
            (line_no, k, value)
        }).collect();

    let command_value = pairs
        .iter()
        .find(|(_, k, _)| k == "command")
        .ok_or_else(|| err(0, "missing required key 'command'"))?;
    let command = Command::parse(&command_value.2)
        .ok_or_else(|| err(command_value.0, format!("unknown command '{}'", command_value.2)))?;

    let mut cfg = ExperimentConfig::with_command(command);
    let mut nonlinearity_kind: Option<String> = None;

    for (line_no, key, value) in &pairs {
        let line_no = *line_no;
        match key.as_str() {
            "command" => {}
            "nonlinearity" => match value.as_str() {
                "exponential" | "power" => nonlinearity_kind = Some(value.clone()),
                other => {
                    return Err(err(
                        line_no,
                        format!("nonlinearity must be 'exponential' or 'power', got '{other}'"),
                    ))
                }
            },
            "p" => {
                let p = parse_f64(line_no, "p", value)?;
                if p <= 1.0 {
                    return Err(err(line_no, format!("p must exceed 1, got {p}")));
                }
                cfg.power_exponent = Some(p);
            }
            "n" => {
                let n: i64 = value
                    .parse()
                    .map_err(|_| err(line_no, format!("N must be integer, got '{value}'")))?;
                if n < 1 {
                    return Err(err(line_no, format!("N must be at least 1, got {n}")));
                }
                cfg.dim = n as u32;
            }
            "r" => cfg.radius = parse_positive(line_no, "R", value)?,
            "out_dir" => cfg.out_dir = Some(PathBuf::from(value)),
            "parallelism" => cfg.parallelism = parse_usize(line_no, "parallelism", value)?,
            "seed" => {
                cfg.seed = value
                    .parse()
                    .map_err(|_| err(line_no, format!("seed must be an integer, got '{value}'")))?
            }
            "profile.alpha" | "alpha" => cfg.alpha = parse_f64(line_no, "alpha", value)?,
            "profile.r_max" => cfg.profile_r_max = parse_positive(line_no, "profile.r_max", value)?,
            "profile.tol" => cfg.profile_tol = parse_positive(line_no, "profile.tol", value)?,
            "profile.record_dr" => {
                cfg.record_dr = parse_positive(line_no, "profile.record_dr", value)?
            }
            "profile.scan_lo" => {
                let v = parse_f64(line_no, "profile.scan_lo", value)?;
                if v < 0.0 {
                    return Err(err(line_no, "profile.scan_lo must be nonnegative"));
                }
                cfg.scan_lo = v;
            }
            "profile.scan_hi" => cfg.scan_hi = parse_positive(line_no, "profile.scan_hi", value)?,
            "profile.scan_grid" => {
                cfg.scan_grid = parse_usize(line_no, "profile.scan_grid", value)?;
                if cfg.scan_grid < 2 {
                    return Err(err(line_no, "profile.scan_grid must be at least 2"));
                }
            }
            "semigroup.check" => {
                cfg.check = CheckKind::parse(value)
                    .ok_or_else(|| err(line_no, format!("unknown check kind '{value}'")))?
            }
            "semigroup.q" => cfg.q = parse_positive(line_no, "semigroup.q", value)?,
            "semigroup.beta" => cfg.beta = parse_positive(line_no, "semigroup.beta", value)?,
            "semigroup.r" => cfg.norm_r = parse_f64(line_no, "semigroup.r", value)?,
            "semigroup.r_tilde" => {
                cfg.norm_r_tilde = parse_f64(line_no, "semigroup.r_tilde", value)?
            }
            "semigroup.t" => cfg.t = parse_positive(line_no, "semigroup.t", value)?,
            "semigroup.xi" => cfg.xi = parse_positive(line_no, "semigroup.xi", value)?,
            "semigroup.alpha_exp" => {
                cfg.alpha_exp = parse_positive(line_no, "semigroup.alpha_exp", value)?
            }
            "semigroup.t_list" => {
                let mut out = Vec::new();
                for part in value.split(',') {
                    out.push(parse_positive(line_no, "semigroup.t_list", part.trim())?);
                }
                if out.len() < 2 {
                    return Err(err(line_no, "semigroup.t_list needs at least two entries"));
                }
                cfg.t_list = out;
            }
            "semigroup.s" => cfg.s = parse_positive(line_no, "semigroup.s", value)?,
            "semigroup.s0" => cfg.s0 = parse_f64(line_no, "semigroup.s0", value)?,
            "semigroup.p" => cfg.p_norm = parse_positive(line_no, "semigroup.p", value)?,
            "semigroup.draws" => cfg.draws = parse_usize(line_no, "semigroup.draws", value)?,
            "evolve.grid_m" => {
                cfg.grid_m = parse_usize(line_no, "evolve.grid_m", value)?;
                if cfg.grid_m < 8 {
                    return Err(err(line_no, "evolve.grid_m must be at least 8"));
                }
            }
            "evolve.sup_cap" => {
                cfg.sup_cap = Some(parse_positive(line_no, "evolve.sup_cap", value)?)
            }
            "evolve.t_cap" => cfg.t_cap = parse_positive(line_no, "evolve.t_cap", value)?,
            "evolve.dt_max" => cfg.dt_max = parse_positive(line_no, "evolve.dt_max", value)?,
            "evolve.c_safety" => cfg.c_safety = parse_positive(line_no, "evolve.c_safety", value)?,
            "evolve.amplitude" => {
                cfg.amplitude = parse_positive(line_no, "evolve.amplitude", value)?
            }
            "evolve.w_y_max" => cfg.w_y_max = parse_positive(line_no, "evolve.w_y_max", value)?,
            "evolve.w_span" => cfg.w_span = parse_positive(line_no, "evolve.w_span", value)?,
            "evolve.w_grid" => cfg.w_grid = parse_usize(line_no, "evolve.w_grid", value)?,
            "evolve.w_ds" => cfg.w_ds = parse_positive(line_no, "evolve.w_ds", value)?,
            "verify.window_lo" => {
                cfg.window_lo = parse_positive(line_no, "verify.window_lo", value)?
            }
            "verify.window_hi" => {
                cfg.window_hi = parse_positive(line_no, "verify.window_hi", value)?
            }
            "verify.time_left" => {
                cfg.time_left = parse_positive(line_no, "verify.time_left", value)?
            }
            "verify.tol_prof" => cfg.tol_prof = parse_positive(line_no, "verify.tol_prof", value)?,
            "verify.tol_conv" => cfg.tol_conv = parse_positive(line_no, "verify.tol_conv", value)?,
            "verify.y_cap" => cfg.y_cap = parse_positive(line_no, "verify.y_cap", value)?,
            "verify.xi_cap" => cfg.xi_cap = parse_positive(line_no, "verify.xi_cap", value)?,
            "verify.tol_fit" => cfg.tol_fit = parse_positive(line_no, "verify.tol_fit", value)?,
            "suite.name" => cfg.suite = value.clone(),
            other => return Err(err(line_no, format!("unknown key '{other}'"))),
        }
    }

    // nonlinearity consistency
    match (nonlinearity_kind.as_deref(), cfg.power_exponent) {
        (Some("power"), None) => {
            return Err(err(0, "nonlinearity = power requires key 'p'"));
        }
        (Some("exponential"), Some(_)) => {
            return Err(err(0, "nonlinearity = exponential conflicts with key 'p'"));
        }
        _ => {}
    }
    if cfg.scan_hi <= cfg.scan_lo {
        return Err(err(0, "profile.scan_hi must exceed profile.scan_lo"));
    }
    if cfg.window_hi <= cfg.window_lo {
        return Err(err(0, "verify.window_hi must exceed verify.window_lo"));
    }
    if cfg.command == Command::Suite
        && !["semigroup", "profiles", "evolution", "theorems", "all"].contains(&cfg.suite.as_str())
    {
        return Err(err(0, format!("unknown suite '{}'", cfg.suite)));
    }
    Ok(cfg)
}

/// Canonical serialization: parsing it back yields an equal configuration.
pub fn serialize_config(cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    let mut push = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    push("command", cfg.command.as_str().to_string());
    match cfg.power_exponent {
        None => push("nonlinearity", "exponential".into()),
        Some(p) => {
            push("nonlinearity", "power".into());
            push("p", format!("{p:.17e}"));
        }
    }
    push("n", cfg.dim.to_string());
    push("r", format!("{:.17e}", cfg.radius));
    if let Some(dir) = &cfg.out_dir {
        push("out_dir", dir.display().to_string());
    }
    push("parallelism", cfg.parallelism.to_string());
    push("seed", cfg.seed.to_string());
    push("profile.alpha", format!("{:.17e}", cfg.alpha));
    push("profile.r_max", format!("{:.17e}", cfg.profile_r_max));
    push("profile.tol", format!("{:.17e}", cfg.profile_tol));
    push("profile.record_dr", format!("{:.17e}", cfg.record_dr));
    push("profile.scan_lo", format!("{:.17e}", cfg.scan_lo));
    push("profile.scan_hi", format!("{:.17e}", cfg.scan_hi));
    push("profile.scan_grid", cfg.scan_grid.to_string());
    push("semigroup.check", cfg.check.as_str().into());
    push("semigroup.q", format!("{:.17e}", cfg.q));
    push("semigroup.beta", format!("{:.17e}", cfg.beta));
    push("semigroup.r", format!("{:.17e}", cfg.norm_r));
    push("semigroup.r_tilde", format!("{:.17e}", cfg.norm_r_tilde));
    push("semigroup.t", format!("{:.17e}", cfg.t));
    push("semigroup.xi", format!("{:.17e}", cfg.xi));
    push("semigroup.alpha_exp", format!("{:.17e}", cfg.alpha_exp));
    push(
        "semigroup.t_list",
        cfg.t_list.iter().map(|t| format!("{t:.17e}")).collect::<Vec<_>>().join(", "),
    );
    push("semigroup.s", format!("{:.17e}", cfg.s));
    push("semigroup.s0", format!("{:.17e}", cfg.s0));
    push("semigroup.p", format!("{:.17e}", cfg.p_norm));
    push("semigroup.draws", cfg.draws.to_string());
    push("evolve.grid_m", cfg.grid_m.to_string());
    if let Some(cap) = cfg.sup_cap {
        push("evolve.sup_cap", format!("{cap:.17e}"));
    }
    push("evolve.t_cap", format!("{:.17e}", cfg.t_cap));
    push("evolve.dt_max", format!("{:.17e}", cfg.dt_max));
    push("evolve.c_safety", format!("{:.17e}", cfg.c_safety));
    push("evolve.amplitude", format!("{:.17e}", cfg.amplitude));
    push("evolve.w_y_max", format!("{:.17e}", cfg.w_y_max));
    push("evolve.w_span", format!("{:.17e}", cfg.w_span));
    push("evolve.w_grid", cfg.w_grid.to_string());
    push("evolve.w_ds", format!("{:.17e}", cfg.w_ds));
    push("verify.window_lo", format!("{:.17e}", cfg.window_lo));
    push("verify.window_hi", format!("{:.17e}", cfg.window_hi));
    push("verify.time_left", format!("{:.17e}", cfg.time_left));
    push("verify.tol_prof", format!("{:.17e}", cfg.tol_prof));
    push("verify.tol_conv", format!("{:.17e}", cfg.tol_conv));
    push("verify.y_cap", format!("{:.17e}", cfg.y_cap));
    push("verify.xi_cap", format!("{:.17e}", cfg.xi_cap));
    push("verify.tol_fit", format!("{:.17e}", cfg.tol_fit));
    push("suite.name", cfg.suite.clone());
    out
}
