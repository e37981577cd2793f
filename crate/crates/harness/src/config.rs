//! Flat `key = value` experiment files.
//!
//! One experiment per file. `#` starts a comment, blank lines are ignored,
//! lists are comma-separated. Every diagnostic names the line it came from.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use ftsim_core::anyon_mc::MCParams;
use ftsim_core::double::{ClassWeights, MemoryConfig};
use ftsim_core::planner::ErrorBudget;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.line {
            write!(f, "line {l}: ")?;
        }
        if let Some(k) = &self.field {
            write!(f, "field `{k}`: ")?;
        }
        f.write_str(&self.message)
    }
}

/// All problems found in one file.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigError(pub Vec<Diagnostic>);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    ExactDelta,
    McSweep,
    S3Braiding,
    TrotterPlan,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 4] = [
        ExperimentKind::ExactDelta,
        ExperimentKind::McSweep,
        ExperimentKind::S3Braiding,
        ExperimentKind::TrotterPlan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::ExactDelta => "exact-delta",
            ExperimentKind::McSweep => "mc-sweep",
            ExperimentKind::S3Braiding => "s3-braiding",
            ExperimentKind::TrotterPlan => "trotter-plan",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            format!("unknown experiment {s:?}; expected one of exact-delta, mc-sweep, s3-braiding, trotter-plan")
        })
    }
}

/// Raw entries with their line numbers, before typing.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut errs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                errs.push(Diagnostic {
                    line: Some(line),
                    field: None,
                    message: format!("expected `key = value`, found {body:?}"),
                });
                continue;
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                errs.push(Diagnostic {
                    line: Some(line),
                    field: None,
                    message: format!("invalid key {k:?}"),
                });
                continue;
            }
            if let Some((_, first)) = entries.get(k) {
                errs.push(Diagnostic {
                    line: Some(line),
                    field: Some(k.to_string()),
                    message: format!("duplicate; first set on line {first}"),
                });
                continue;
            }
            entries.insert(k.to_string(), (v.to_string(), line));
        }
        if errs.is_empty() {
            Ok(Self { entries })
        } else {
            Err(ConfigError(errs))
        }
    }

    pub fn set(&mut self, key: &str, value: impl fmt::Display) {
        let line = self.entries.get(key).map_or(0, |e| e.1);
        self.entries.insert(key.to_string(), (value.to_string(), line));
    }

    pub fn line_of(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|e| e.1).filter(|&l| l > 0)
    }
}

/// Typed reader that records every problem instead of stopping at the first.
struct Reader<'a> {
    raw: &'a RawConfig,
    used: Vec<&'static str>,
    errs: Vec<Diagnostic>,
}

trait FieldValue: Sized {
    const WHAT: &'static str;
    fn parse_value(s: &str) -> Option<Self>;
}

impl FieldValue for f64 {
    const WHAT: &'static str = "a finite number";
    fn parse_value(s: &str) -> Option<Self> {
        s.parse::<f64>().ok().filter(|v| v.is_finite())
    }
}

impl FieldValue for u64 {
    const WHAT: &'static str = "a nonnegative integer";
    fn parse_value(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl FieldValue for usize {
    const WHAT: &'static str = "a nonnegative integer";
    fn parse_value(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl FieldValue for u32 {
    const WHAT: &'static str = "a nonnegative integer";
    fn parse_value(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl FieldValue for bool {
    const WHAT: &'static str = "true or false";
    fn parse_value(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl<'a> Reader<'a> {
    fn new(raw: &'a RawConfig) -> Self {
        Self {
            raw,
            used: Vec::new(),
            errs: Vec::new(),
        }
    }

    fn fail(&mut self, key: &str, message: impl Into<String>) {
        self.errs.push(Diagnostic {
            line: self.raw.line_of(key),
            field: Some(key.to_string()),
            message: message.into(),
        });
    }

    fn text(&mut self, key: &'static str) -> Option<String> {
        self.used.push(key);
        self.raw.entries.get(key).map(|e| e.0.clone())
    }

    fn opt<T: FieldValue>(&mut self, key: &'static str) -> Option<T> {
        let v = self.text(key)?;
        let parsed = T::parse_value(&v);
        if parsed.is_none() {
            self.fail(key, format!("expected {}, found {v:?}", T::WHAT));
        }
        parsed
    }

    fn get<T: FieldValue>(&mut self, key: &'static str, default: T) -> T {
        self.opt(key).unwrap_or(default)
    }

    fn req<T: FieldValue + Default>(&mut self, key: &'static str) -> T {
        if !self.raw.entries.contains_key(key) {
            self.used.push(key);
            self.errs.push(Diagnostic {
                line: None,
                field: Some(key.to_string()),
                message: "required field is missing".into(),
            });
            return T::default();
        }
        self.get(key, T::default())
    }

    fn list<T: FieldValue>(&mut self, key: &'static str, default: Option<Vec<T>>) -> Vec<T> {
        let Some(v) = self.text(key) else {
            return match default {
                Some(d) => d,
                None => {
                    self.fail(key, "required field is missing");
                    Vec::new()
                }
            };
        };
        let mut out = Vec::new();
        for item in v.split(',') {
            match T::parse_value(item.trim()) {
                Some(x) => out.push(x),
                None => {
                    self.fail(key, format!("list item {:?} is not {}", item.trim(), T::WHAT));
                    return Vec::new();
                }
            }
        }
        if out.is_empty() {
            self.fail(key, "list is empty");
        }
        out
    }

    fn check(&mut self, key: &'static str, ok: bool, message: &str) {
        if !ok {
            self.fail(key, message.to_string());
        }
    }

    fn finish(mut self) -> Vec<Diagnostic> {
        for (k, (_, line)) in &self.raw.entries {
            if !self.used.contains(&k.as_str()) {
                self.errs.push(Diagnostic {
                    line: Some(*line),
                    field: Some(k.clone()),
                    message: "unknown field for this experiment".into(),
                });
            }
        }
        self.errs.sort_by_key(|d| d.line.unwrap_or(0));
        self.errs
    }
}

fn prob(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactDeltaConfig {
    pub k: usize,
    pub gamma: f64,
    pub t_final: f64,
    pub dt_list: Vec<f64>,
    /// Spacing of the times at which δ is reported.
    pub sample_interval: f64,
    /// Step of the master-equation reference.
    pub integrator_dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSweepConfig {
    pub k_list: Vec<usize>,
    pub bias_q_list: Vec<f64>,
    pub p_create: f64,
    pub p_hop: f64,
    pub bias_radius: usize,
    pub t_max: u64,
    pub n_trials: u64,
}

impl McSweepConfig {
    pub fn params(&self, bias_q: f64, seed: u64) -> MCParams {
        MCParams {
            p_create: self.p_create,
            p_hop: self.p_hop,
            bias_q,
            bias_radius: self.bias_radius,
            t_max: self.t_max,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct S3BraidingConfig {
    pub memory: MemoryConfig,
    /// Trials, from index 0, whose event logs are written.
    pub log_trials: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrotterPlanConfig {
    pub budget: ErrorBudget,
    /// Also measure the total error of a noisy one-qubit product formula.
    pub toy_check: bool,
    pub toy_eps: f64,
    pub toy_t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    ExactDelta(ExactDeltaConfig),
    McSweep(McSweepConfig),
    S3Braiding(S3BraidingConfig),
    TrotterPlan(TrotterPlanConfig),
}

impl Experiment {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Experiment::ExactDelta(_) => ExperimentKind::ExactDelta,
            Experiment::McSweep(_) => ExperimentKind::McSweep,
            Experiment::S3Braiding(_) => ExperimentKind::S3Braiding,
            Experiment::TrotterPlan(_) => ExperimentKind::TrotterPlan,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub out_dir: Option<String>,
    pub workers: Option<usize>,
    /// Sorted `key=value` lines of every field that affects results.
    pub canonical: String,
}

impl ExperimentConfig {
    pub fn kind(&self) -> ExperimentKind {
        self.experiment.kind()
    }

    /// Hex SHA-256 of the canonical form.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.canonical.as_bytes()))
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::from_raw(&RawConfig::parse(text)?)
    }

    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let mut r = Reader::new(raw);
        let kind = match r.text("experiment") {
            None => {
                r.errs.push(Diagnostic {
                    line: None,
                    field: Some("experiment".into()),
                    message: "required field is missing".into(),
                });
                return Err(ConfigError(r.errs));
            }
            Some(s) => match s.parse::<ExperimentKind>() {
                Ok(k) => k,
                Err(m) => {
                    r.fail("experiment", m);
                    return Err(ConfigError(r.errs));
                }
            },
        };
        let seed: u64 = r.req("seed");
        let out_dir = r.text("out_dir");
        let workers: Option<usize> = r.opt("workers");
        if workers == Some(0) {
            r.fail("workers", "must be at least 1");
        }
        let experiment = match kind {
            ExperimentKind::ExactDelta => Experiment::ExactDelta(exact_delta(&mut r)),
            ExperimentKind::McSweep => Experiment::McSweep(mc_sweep(&mut r)),
            ExperimentKind::S3Braiding => Experiment::S3Braiding(s3_braiding(&mut r, seed)),
            ExperimentKind::TrotterPlan => Experiment::TrotterPlan(trotter_plan(&mut r)),
        };
        let errs = r.finish();
        if !errs.is_empty() {
            return Err(ConfigError(errs));
        }
        let canonical = raw
            .entries
            .iter()
            .filter(|(k, _)| !matches!(k.as_str(), "out_dir" | "workers"))
            .map(|(k, (v, _))| format!("{k}={v}\n"))
            .collect();
        Ok(Self {
            experiment,
            seed,
            out_dir,
            workers,
            canonical,
        })
    }
}

fn exact_delta(r: &mut Reader) -> ExactDeltaConfig {
    let k = r.get("k", 2usize);
    r.check("k", k == 2, "dense evolution supports only k = 2 (8 qubits)");
    let gamma = r.req("gamma");
    r.check("gamma", gamma >= 0.0, "must be nonnegative");
    let t_final = r.get("t_final", 5.0);
    r.check("t_final", t_final > 0.0, "must be positive");
    let dt_list = r.list("dt_list", Some(vec![0.1, 0.05, 0.025]));
    let sample_interval = r.get("sample_interval", 1.0);
    r.check("sample_interval", sample_interval > 0.0, "must be positive");
    let divides = |a: f64, b: f64| b > 0.0 && ((a / b) - (a / b).round()).abs() < 1e-9;
    for &dt in &dt_list {
        if !(dt > 0.0 && divides(sample_interval, dt)) {
            r.fail(
                "dt_list",
                format!("step {dt} must be positive and divide sample_interval"),
            );
            break;
        }
    }
    r.check(
        "sample_interval",
        divides(t_final, sample_interval),
        "must divide t_final",
    );
    let finest = dt_list.iter().copied().fold(f64::INFINITY, f64::min);
    let integrator_dt = r.get("integrator_dt", finest.min(0.025));
    r.check(
        "integrator_dt",
        divides(sample_interval, integrator_dt),
        "must be positive and divide sample_interval",
    );
    ExactDeltaConfig {
        k,
        gamma,
        t_final,
        dt_list,
        sample_interval,
        integrator_dt,
    }
}

fn mc_sweep(r: &mut Reader) -> McSweepConfig {
    let k_list = r.list("k_list", None);
    if k_list.iter().any(|&k| k < 2) {
        r.fail("k_list", "every k must be at least 2");
    }
    let bias_q_list = r.list("bias_q", Some(vec![0.0]));
    if !bias_q_list.iter().all(|&q| prob(q)) {
        r.fail("bias_q", "every value must lie in [0, 1]");
    }
    let p_create = r.req("p_create");
    r.check("p_create", prob(p_create), "must lie in [0, 1]");
    let p_hop = r.get("p_hop", 0.5);
    r.check("p_hop", prob(p_hop), "must lie in [0, 1]");
    let bias_radius = r.get("bias_radius", 3usize);
    r.check("bias_radius", bias_radius >= 1, "must be at least 1");
    let t_max = r.req("t_max");
    let n_trials: u64 = r.req("n_trials");
    r.check("n_trials", n_trials >= 1, "must be at least 1");
    McSweepConfig {
        k_list,
        bias_q_list,
        p_create,
        p_hop,
        bias_radius,
        t_max,
        n_trials,
    }
}

fn s3_braiding(r: &mut Reader, seed: u64) -> S3BraidingConfig {
    let l = r.get("l", 16usize);
    let p_pair = r.req("p_pair");
    r.check("p_pair", prob(p_pair), "must lie in [0, 1]");
    let radius = r.get("radius", 3usize);
    r.check("radius", radius >= 1, "must be at least 1");
    let n_trials: u64 = r.req("n_trials");
    r.check("n_trials", n_trials >= 1, "must be at least 1");
    let margin = r.get("margin", 3usize);
    let transposition = r.get("weight_transposition", 1.0);
    let three_cycle = r.get("weight_three_cycle", 1.0);
    let log_trials = r.get("log_trials", 1u64);
    let mut memory = MemoryConfig::new(l, p_pair, radius, n_trials, seed);
    memory.margin = margin;
    memory.class_weights = ClassWeights {
        transposition,
        three_cycle,
    };
    if memory.l < 8 || margin < 1 || memory.l < 2 * margin + 2 {
        r.fail(
            "l",
            "grid must be at least 8 wide and leave room for the loop inside the margin",
        );
    }
    if memory.class_weights.validate().is_err() {
        r.fail(
            "weight_transposition",
            "class weights must be nonnegative with a positive sum",
        );
    }
    S3BraidingConfig { memory, log_trials }
}

fn trotter_plan(r: &mut Reader) -> TrotterPlanConfig {
    let mut budget = ErrorBudget::new(
        r.req("h_norm"),
        r.req("t_total"),
        r.req("eps_gate"),
        r.req("gates_per_step"),
        r.req("c_strobe"),
    );
    budget.order = r.get("order", 1.0);
    if let Err(e) = budget.validate() {
        r.fail("h_norm", e.to_string());
    } else if budget.strobe_coefficient() == 0.0 || budget.noise_coefficient() == 0.0 {
        r.fail(
            "eps_gate",
            "both the stroboscopic and the gate-noise terms must be nonzero",
        );
    }
    let toy_check = r.get("toy_check", false);
    let toy_eps = r.get("toy_eps", 0.002);
    r.check("toy_eps", toy_eps > 0.0, "must be positive");
    let toy_t = r.get("toy_t", 1.0);
    r.check("toy_t", toy_t > 0.0, "must be positive");
    TrotterPlanConfig {
        budget,
        toy_check,
        toy_eps,
        toy_t,
    }
}
