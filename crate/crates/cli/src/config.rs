//! Flat `key = value` experiment configuration.
//!
//! Values from a config file are overridden by command-line flags. Every key
//! is validated before anything runs and all violations are reported together.

use std::collections::BTreeMap;
use std::fmt;

use sha2::{Digest, Sha256};


/// Shortest text that parses back to the same `f64`.
fn fmt_num(x: f64) -> String {
    format!("{x}")
}

/// Keys accepted in config files, in emission order.
pub const KEYS: &[&str] = &[
    "command", "model", "nu", "shift", "rho", "n", "beta", "eps", "side", "variant", "statistic",
    "method", "integrand", "seed", "trials", "workers", "format", "output",
];

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "SNTAIL_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Constants,
    Predict,
    Bounds,
    Oracle,
    Mc,
    Verify,
    Counterexample,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Constants,
        Command::Predict,
        Command::Bounds,
        Command::Oracle,
        Command::Mc,
        Command::Verify,
        Command::Counterexample,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::Predict => "predict",
            Command::Bounds => "bounds",
            Command::Oracle => "oracle",
            Command::Mc => "mc",
            Command::Verify => "verify",
            Command::Counterexample => "counterexample",
        }
    }

    fn needs_eps(&self) -> bool {
        matches!(self, Command::Predict | Command::Bounds | Command::Oracle | Command::Mc | Command::Counterexample)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    IidNormal,
    StudentT { nu: f64 },
    FoldedNormal { shift: f64 },
    Equicorrelated { rho: f64 },
    Rademacher,
    DegenerateFirst,
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::IidNormal => "iid-normal",
            ModelSpec::StudentT { .. } => "student-t",
            ModelSpec::FoldedNormal { .. } => "folded-normal",
            ModelSpec::Equicorrelated { .. } => "equicorrelated",
            ModelSpec::Rademacher => "rademacher",
            ModelSpec::DegenerateFirst => "degenerate-first",
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, ModelSpec::Rademacher | ModelSpec::DegenerateFirst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Geometric,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsSpec {
    Value(f64),
    Grid { start: f64, end: f64, spacing: Spacing, count: usize },
}

impl EpsSpec {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            EpsSpec::Value(e) => vec![e],
            EpsSpec::Grid { start, end, spacing: Spacing::Geometric, count } => {
                sntail::oracles::geometric_grid(start, end, count)
            }
            EpsSpec::Grid { start, end, spacing: Spacing::Linear, count } => {
                if count == 1 {
                    return vec![start];
                }
                (0..count).map(|i| start + (end - start) * i as f64 / (count - 1) as f64).collect()
            }
        }
    }

    fn render(&self) -> String {
        match *self {
            EpsSpec::Value(e) => fmt_num(e),
            EpsSpec::Grid { start, end, spacing, count } => format!(
                "{}:{}:{}:{count}",
                fmt_num(start),
                fmt_num(end),
                match spacing {
                    Spacing::Geometric => "geometric",
                    Spacing::Linear => "linear",
                }
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariantSel {
    Paper,
    Corrected,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    Auto,
    Sphere,
    Region,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub model: ModelSpec,
    pub n: usize,
    pub beta: f64,
    pub eps: Option<EpsSpec>,
    pub side: sntail::Side,
    pub variant: VariantSel,
    pub statistic: sntail::StatisticKind,
    pub method: OracleMethod,
    pub integrand: sntail::RegionIntegrand,
    pub seed: u64,
    pub trials: u64,
    pub workers: usize,
    pub format: OutputFormat,
    pub output: Option<String>,
}

/// Every problem found while validating a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub violations: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration:")?;
        for v in &self.violations {
            write!(f, "\n  - {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Parses flat INI text. Section headers and unknown keys are violations.
pub fn parse_ini(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    let mut violations = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = idx + 1;
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if line.starts_with('[') {
            violations.push(format!("line {lineno}: sections are not supported ({line})"));
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            violations.push(format!("line {lineno}: expected `key = value`"));
            continue;
        };
        let key = key.trim().to_ascii_lowercase();
        if !KEYS.contains(&key.as_str()) {
            violations.push(format!("line {lineno}: unknown key `{key}`"));
            continue;
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            violations.push(format!("line {lineno}: duplicate key `{key}`"));
        }
    }
    if violations.is_empty() {
        Ok(map)
    } else {
        Err(ConfigError { violations })
    }
}

/// Worker count from the environment, else the machine's parallelism.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn parse_f64(key: &str, v: &str, errs: &mut Vec<String>) -> Option<f64> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Some(x),
        _ => {
            errs.push(format!("{key}: `{v}` is not a finite number"));
            None
        }
    }
}

/// Positive integer, also written in scientific notation such as `1e7`.
pub fn parse_count(v: &str) -> Option<u64> {
    if let Ok(k) = v.parse::<u64>() {
        return Some(k);
    }
    let x = v.parse::<f64>().ok()?;
    (x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x <= 9.007_199_254_740_992e15).then_some(x as u64)
}

fn parse_eps(v: &str, errs: &mut Vec<String>) -> Option<EpsSpec> {
    let parts: Vec<&str> = v.split(':').collect();
    match parts.as_slice() {
        [single] => {
            let e = parse_f64("eps", single, errs)?;
            if e <= 0.0 {
                errs.push(format!("eps must be positive (got {single})"));
                return None;
            }
            Some(EpsSpec::Value(e))
        }
        [start, end, spacing, count] => {
            let start = parse_f64("eps grid start", start, errs);
            let end = parse_f64("eps grid end", end, errs);
            let spacing = match *spacing {
                "geometric" => Some(Spacing::Geometric),
                "linear" => Some(Spacing::Linear),
                other => {
                    errs.push(format!("eps grid spacing must be geometric or linear (got {other})"));
                    None
                }
            };
            let count = match count.parse::<usize>() {
                Ok(c) if c >= 1 => Some(c),
                _ => {
                    errs.push(format!("eps grid count must be a positive integer (got {count})"));
                    None
                }
            };
            let (start, end, spacing, count) = (start?, end?, spacing?, count?);
            if !(start > 0.0 && end > 0.0) {
                errs.push("eps grid endpoints must be positive".into());
                return None;
            }
            Some(EpsSpec::Grid { start, end, spacing, count })
        }
        _ => {
            errs.push(format!("eps must be a number or start:end:geometric|linear:count (got {v})"));
            None
        }
    }
}

fn pick<T: Copy>(key: &str, v: &str, options: &[(&str, T)], errs: &mut Vec<String>) -> Option<T> {
    match options.iter().find(|(name, _)| *name == v) {
        Some((_, t)) => Some(*t),
        None => {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            errs.push(format!("{key} must be one of {} (got `{v}`)", names.join(", ")));
            None
        }
    }
}

const COMMANDS: [(&str, Command); 7] = [
    ("constants", Command::Constants),
    ("predict", Command::Predict),
    ("bounds", Command::Bounds),
    ("oracle", Command::Oracle),
    ("mc", Command::Mc),
    ("verify", Command::Verify),
    ("counterexample", Command::Counterexample),
];
const SIDES: [(&str, sntail::Side); 3] =
    [("right", sntail::Side::Right), ("left", sntail::Side::Left), ("two-sided", sntail::Side::TwoSided)];
const VARIANTS: [(&str, VariantSel); 3] =
    [("paper", VariantSel::Paper), ("corrected", VariantSel::Corrected), ("both", VariantSel::Both)];
const STATISTICS: [(&str, sntail::StatisticKind); 3] = [
    ("sum", sntail::StatisticKind::Sum),
    ("max-over-zn", sntail::StatisticKind::MaxOverZn),
    ("max-over-zk", sntail::StatisticKind::MaxOverZk),
];
const METHODS: [(&str, OracleMethod); 3] =
    [("auto", OracleMethod::Auto), ("sphere", OracleMethod::Sphere), ("region", OracleMethod::Region)];
const INTEGRANDS: [(&str, sntail::RegionIntegrand); 2] =
    [("weighted", sntail::RegionIntegrand::Weighted), ("paper", sntail::RegionIntegrand::Paper)];
const FORMATS: [(&str, OutputFormat); 2] = [("csv", OutputFormat::Csv), ("json", OutputFormat::Json)];
const MODELS: [&str; 6] = ["iid-normal", "student-t", "folded-normal", "equicorrelated", "rademacher", "degenerate-first"];

fn name_of<T: PartialEq>(options: &[(&'static str, T)], value: &T) -> &'static str {
    options.iter().find(|(_, t)| t == value).map(|(n, _)| *n).expect("every value has a name")
}

impl ExperimentConfig {
    /// Validates a key/value map. `workers` falls back to `default_workers`.
    pub fn from_map(map: &BTreeMap<String, String>, default_workers: usize) -> Result<Self, ConfigError> {
        let mut errs = Vec::new();
        for key in map.keys() {
            if !KEYS.contains(&key.as_str()) {
                errs.push(format!("unknown key `{key}`"));
            }
        }
        let get = |k: &str| map.get(k).map(|s| s.trim());

        let command = match get("command") {
            Some(v) => pick("command", v, &COMMANDS, &mut errs),
            None => {
                errs.push("command is required".into());
                None
            }
        };

        let nu = get("nu").and_then(|v| parse_f64("nu", v, &mut errs));
        let shift = get("shift").and_then(|v| parse_f64("shift", v, &mut errs));
        let rho = get("rho").and_then(|v| parse_f64("rho", v, &mut errs));
        let model_name = get("model").unwrap_or("iid-normal");
        let model = match model_name {
            "iid-normal" => Some(ModelSpec::IidNormal),
            "student-t" => match nu {
                Some(nu) if nu > 2.0 => Some(ModelSpec::StudentT { nu }),
                Some(nu) => {
                    errs.push(format!("nu must be > 2 (got {nu})"));
                    None
                }
                None => {
                    errs.push("model student-t requires nu".into());
                    None
                }
            },
            "folded-normal" => Some(ModelSpec::FoldedNormal { shift: shift.unwrap_or(1.0) }),
            "equicorrelated" => match rho {
                Some(rho) => Some(ModelSpec::Equicorrelated { rho }),
                None => {
                    errs.push("model equicorrelated requires rho".into());
                    None
                }
            },
            "rademacher" => Some(ModelSpec::Rademacher),
            "degenerate-first" => Some(ModelSpec::DegenerateFirst),
            other => {
                errs.push(format!("model must be one of {} (got `{other}`)", MODELS.join(", ")));
                None
            }
        };
        for (key, given, owner) in [("nu", nu, "student-t"), ("shift", shift, "folded-normal"), ("rho", rho, "equicorrelated")] {
            if given.is_some() && model_name != owner {
                errs.push(format!("{key} only applies to model {owner}"));
            }
        }

        let n = match get("n") {
            Some(v) => match v.parse::<usize>() {
                Ok(n) if n >= 2 => Some(n),
                Ok(_) => {
                    errs.push("n must be ≥ 2".into());
                    None
                }
                Err(_) => {
                    errs.push(format!("n must be an integer (got `{v}`)"));
                    None
                }
            },
            None => {
                errs.push("n is required".into());
                None
            }
        };
        let beta = match get("beta") {
            Some(v) => parse_f64("beta", v, &mut errs).filter(|&b| {
                let ok = b > 1.0;
                if !ok {
                    errs.push(format!("beta must be > 1 (got {b})"));
                }
                ok
            }),
            None => Some(2.0),
        };
        let eps = get("eps").and_then(|v| parse_eps(v, &mut errs));
        if let (Some(cmd), None, None) = (command, eps, get("eps")) {
            if cmd.needs_eps() {
                errs.push(format!("eps is required for {}", cmd.as_str()));
            }
        }
        let side = get("side").map_or(Some(sntail::Side::Right), |v| pick("side", v, &SIDES, &mut errs));
        if let (Some(s), Some(b)) = (side, beta) {
            if s != sntail::Side::Right && b != 2.0 {
                errs.push("left and two-sided tails are defined for beta = 2 only".into());
            }
        }
        let variant = get("variant").map_or(Some(VariantSel::Both), |v| pick("variant", v, &VARIANTS, &mut errs));
        let statistic = get("statistic")
            .map_or(Some(sntail::StatisticKind::Sum), |v| pick("statistic", v, &STATISTICS, &mut errs));
        let method = get("method").map_or(Some(OracleMethod::Auto), |v| pick("method", v, &METHODS, &mut errs));
        let integrand = get("integrand")
            .map_or(Some(sntail::RegionIntegrand::Weighted), |v| pick("integrand", v, &INTEGRANDS, &mut errs));
        let seed = match get("seed") {
            Some(v) => v.parse::<u64>().map_err(|_| errs.push(format!("seed must be a 64-bit unsigned integer (got `{v}`)"))).ok(),
            None => Some(1),
        };
        let trials = match get("trials") {
            Some(v) => match parse_count(v) {
                Some(t) if t > 0 => Some(t),
                _ => {
                    errs.push(format!("trials must be a positive integer (got `{v}`)"));
                    None
                }
            },
            None => Some(1_000_000),
        };
        let workers = match get("workers") {
            Some(v) => match v.parse::<usize>() {
                Ok(w) if w > 0 => Some(w),
                _ => {
                    errs.push(format!("workers must be a positive integer (got `{v}`)"));
                    None
                }
            },
            None => Some(default_workers.max(1)),
        };
        let format = get("format").map_or(Some(OutputFormat::Csv), |v| pick("format", v, &FORMATS, &mut errs));
        let output = get("output").filter(|s| !s.is_empty()).map(str::to_string);

        if !errs.is_empty() {
            return Err(ConfigError { violations: errs });
        }
        Ok(Self {
            command: command.unwrap(),
            model: model.unwrap(),
            n: n.unwrap(),
            beta: beta.unwrap(),
            eps,
            side: side.unwrap(),
            variant: variant.unwrap(),
            statistic: statistic.unwrap(),
            method: method.unwrap(),
            integrand: integrand.unwrap(),
            seed: seed.unwrap(),
            trials: trials.unwrap(),
            workers: workers.unwrap(),
            format: format.unwrap(),
            output,
        })
    }

    pub fn from_ini_str(text: &str, default_workers: usize) -> Result<Self, ConfigError> {
        Self::from_map(&parse_ini(text)?, default_workers)
    }

    /// Key/value pairs in [`KEYS`] order; absent optional values are skipped.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![("command", self.command.as_str().to_string()), ("model", self.model.name().to_string())];
        match self.model {
            ModelSpec::StudentT { nu } => out.push(("nu", fmt_num(nu))),
            ModelSpec::FoldedNormal { shift } => out.push(("shift", fmt_num(shift))),
            ModelSpec::Equicorrelated { rho } => out.push(("rho", fmt_num(rho))),
            _ => {}
        }
        out.push(("n", self.n.to_string()));
        out.push(("beta", fmt_num(self.beta)));
        if let Some(eps) = &self.eps {
            out.push(("eps", eps.render()));
        }
        out.push(("side", self.side.as_str().to_string()));
        out.push(("variant", name_of(&VARIANTS, &self.variant).to_string()));
        out.push(("statistic", name_of(&STATISTICS, &self.statistic).to_string()));
        out.push(("method", name_of(&METHODS, &self.method).to_string()));
        out.push(("integrand", name_of(&INTEGRANDS, &self.integrand).to_string()));
        out.push(("seed", self.seed.to_string()));
        out.push(("trials", self.trials.to_string()));
        out.push(("workers", self.workers.to_string()));
        out.push(("format", name_of(&FORMATS, &self.format).to_string()));
        if let Some(path) = &self.output {
            out.push(("output", path.clone()));
        }
        out
    }

    pub fn to_ini_string(&self) -> String {
        self.to_pairs().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// SHA-256 over the keys that affect numeric results.
    pub fn config_hash(&self) -> String {
        let text: String = self
            .to_pairs()
            .into_iter()
            .filter(|(k, _)| !matches!(*k, "workers" | "format" | "output"))
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect();
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn eps_values(&self) -> Vec<f64> {
        self.eps.map(|e| e.values()).unwrap_or_default()
    }
}
