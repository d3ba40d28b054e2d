//! Experiment configuration files, schema `v1`.
//!
//! ```json
//! {"version": "v1", "case": 4, "beta": 0.75, "gamma1": 1.5,
//!  "n": [1000], "t": [1], "reps": 100, "seed": 7}
//! ```
//!
//! Keys: `case` (1..=12), `beta` (defaults to 0 for the flat cases 10–12),
//! `gamma1` (defaults to 1 for the moderate cases 7, 8, 9, 12), `c`
//! (default 1), `a0` (`"one"` or `"zeta-balanced"`), `innovation`, `n`,
//! `t`, `reps` (default 4000), `seed`, `cov_pairs`, `presample` (`"auto"`,
//! `"exact"`, `"aggregated"`) and `engine` (`fft_threshold`, `capacity`).
//!
//! `innovation` is `{"kind": "gaussian"}` (the default),
//! `{"kind": "standardized", "base": "uniform"}` or
//! `{"kind": "tapered-pareto", "alpha": 1.5, "gamma": 0.4}`; `kind` may be
//! left out when `base` or `alpha`/`gamma` make it unambiguous.

use std::fmt;

use serde_json::{json, Map, Value};
use taperflow_core::filters::{A0Mode, FilterTaper};
use taperflow_core::innovations::BaseDistribution;
use taperflow_core::montecarlo::{ExperimentConfig, PresampleMode};
use taperflow_core::path_engine::EngineOptions;
use taperflow_core::{CaseId, FilterSpec, InnovationModel, InnovationTaper};

pub const SCHEMA_VERSION: &str = "v1";

const TOP_KEYS: &[&str] = &[
    "version",
    "case",
    "beta",
    "gamma1",
    "c",
    "a0",
    "innovation",
    "n",
    "t",
    "reps",
    "seed",
    "cov_pairs",
    "presample",
    "engine",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub path: String,
    pub message: String,
}

/// Every problem found in a configuration document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub issues: Vec<Issue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration ({} issue(s)):", self.issues.len())?;
        for i in &self.issues {
            writeln!(f, "  {}: {}", i.path, i.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    pub fn paths(&self) -> Vec<&str> {
        self.issues.iter().map(|i| i.path.as_str()).collect()
    }
}

#[derive(Default)]
struct Collector {
    issues: Vec<Issue>,
}

impl Collector {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.issues.push(Issue {
            path: path.into(),
            message: message.into(),
        });
    }

    fn unknown_keys(&mut self, obj: &Map<String, Value>, allowed: &[&str], prefix: &str) {
        for k in obj.keys() {
            if !allowed.contains(&k.as_str()) {
                self.push(join(prefix, k), "unknown key");
            }
        }
    }

    fn number(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.push(path, format!("expected a number, got {v}"));
                None
            }
        }
    }

    fn integer(&mut self, v: &Value, path: &str) -> Option<u64> {
        match v.as_u64() {
            Some(x) => Some(x),
            None => {
                self.push(path, format!("expected a nonnegative integer, got {v}"));
                None
            }
        }
    }

    fn string<'a>(&mut self, v: &'a Value, path: &str) -> Option<&'a str> {
        match v.as_str() {
            Some(s) => Some(s),
            None => {
                self.push(path, format!("expected a string, got {v}"));
                None
            }
        }
    }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

/// Scalars are accepted where a list is expected.
fn as_list(v: &Value) -> Vec<(usize, &Value)> {
    match v {
        Value::Array(items) => items.iter().enumerate().collect(),
        other => vec![(0, other)],
    }
}

fn enum_value<T: serde::de::DeserializeOwned>(c: &mut Collector, v: &Value, path: &str, allowed: &str) -> Option<T> {
    let s = c.string(v, path)?;
    match serde_json::from_value(Value::String(s.to_string())) {
        Ok(x) => Some(x),
        Err(_) => {
            c.push(path, format!("expected one of {allowed}, got \"{s}\""));
            None
        }
    }
}

fn parse_innovation(c: &mut Collector, v: &Value) -> Option<InnovationModel> {
    let Some(obj) = v.as_object() else {
        c.push("innovation", format!("expected an object, got {v}"));
        return None;
    };
    c.unknown_keys(obj, &["kind", "base", "alpha", "gamma"], "innovation");
    let kind = match obj.get("kind") {
        Some(k) => c.string(k, "innovation.kind")?.to_string(),
        None if obj.contains_key("alpha") || obj.contains_key("gamma") => "tapered-pareto".into(),
        None if obj.contains_key("base") => "standardized".into(),
        None => "gaussian".into(),
    };
    let extra = |c: &mut Collector, keys: &[&str]| {
        for k in keys {
            if obj.contains_key(*k) {
                c.push(format!("innovation.{k}"), format!("not used by {kind} innovations"));
            }
        }
    };
    match kind.as_str() {
        "gaussian" => {
            extra(c, &["base", "alpha", "gamma"]);
            Some(InnovationModel::Gaussian)
        }
        "standardized" => {
            extra(c, &["alpha", "gamma"]);
            let Some(b) = obj.get("base") else {
                c.push("innovation.base", "required for standardized innovations");
                return None;
            };
            let base: BaseDistribution = enum_value(
                c,
                b,
                "innovation.base",
                "\"uniform\", \"exponential\", \"rademacher\", \"laplace\"",
            )?;
            Some(InnovationModel::Standardized { base })
        }
        "tapered-pareto" => {
            extra(c, &["base"]);
            let mut get = |key: &str| match obj.get(key) {
                Some(x) => c.number(x, &format!("innovation.{key}")),
                None => {
                    c.push(format!("innovation.{key}"), "required for tapered-pareto innovations");
                    None
                }
            };
            let alpha = get("alpha");
            let gamma = get("gamma");
            let model = InnovationModel::TaperedPareto {
                alpha: alpha?,
                gamma: gamma?,
            };
            if let Err(e) = model.validate() {
                c.push("innovation", e.to_string());
                return None;
            }
            Some(model)
        }
        other => {
            c.push(
                "innovation.kind",
                format!("expected \"gaussian\", \"standardized\" or \"tapered-pareto\", got \"{other}\""),
            );
            None
        }
    }
}

fn parse_engine(c: &mut Collector, v: &Value) -> Option<EngineOptions> {
    let Some(obj) = v.as_object() else {
        c.push("engine", format!("expected an object, got {v}"));
        return None;
    };
    c.unknown_keys(obj, &["fft_threshold", "capacity"], "engine");
    let mut opts = EngineOptions::default();
    if let Some(x) = obj.get("fft_threshold") {
        opts.fft_threshold = c.integer(x, "engine.fft_threshold")? as usize;
    }
    if let Some(x) = obj.get("capacity") {
        let cap = c.integer(x, "engine.capacity")?;
        if cap == 0 {
            c.push("engine.capacity", "must be positive");
            return None;
        }
        opts.capacity = cap as usize;
    }
    Some(opts)
}

/// Attributes a filter validation message to the key that caused it.
fn filter_issue_path(message: &str) -> &'static str {
    if message.contains("gamma1") {
        "gamma1"
    } else if message.contains("a0") {
        "a0"
    } else if message.contains("beta") {
        "beta"
    } else if message.starts_with("configuration error: c ") || message.contains(" c must") {
        "c"
    } else {
        "case"
    }
}

/// Parses and validates a `v1` configuration document, applying defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut c = Collector::default();
    let doc: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => {
            c.push("$", format!("malformed JSON: {e}"));
            return Err(ConfigError { issues: c.issues });
        }
    };
    let Some(obj) = doc.as_object() else {
        c.push("$", "expected a JSON object");
        return Err(ConfigError { issues: c.issues });
    };
    c.unknown_keys(obj, TOP_KEYS, "");

    if let Some(v) = obj.get("version") {
        if let Some(s) = c.string(v, "version") {
            if s != SCHEMA_VERSION {
                c.push(
                    "version",
                    format!("unsupported schema version \"{s}\", expected \"{SCHEMA_VERSION}\""),
                );
            }
        }
    }

    let case = match obj.get("case") {
        None => {
            c.push("case", "required");
            None
        }
        Some(v) => c
            .integer(v, "case")
            .and_then(|j| match u8::try_from(j).ok().map(CaseId::new) {
                Some(Ok(id)) => Some(id),
                _ => {
                    c.push("case", format!("expected a case number 1..=12, got {j}"));
                    None
                }
            }),
    };

    let flat = case.map(|id| id.j() >= 10);
    let moderate = case.map(|id| id.regime() == FilterTaper::Moderate);
    let beta = match obj.get("beta") {
        Some(v) => c.number(v, "beta"),
        None if flat == Some(true) => Some(0.0),
        None => {
            c.push("beta", "required");
            None
        }
    };
    let gamma1 = match obj.get("gamma1") {
        Some(v) => c.number(v, "gamma1"),
        None if moderate == Some(true) => Some(1.0),
        None => {
            c.push("gamma1", "required");
            None
        }
    };
    let cc = match obj.get("c") {
        Some(v) => c.number(v, "c"),
        None => Some(1.0),
    };
    let a0_mode: Option<Option<A0Mode>> = match obj.get("a0") {
        Some(v) => enum_value(&mut c, v, "a0", "\"one\", \"zeta-balanced\"").map(Some),
        None => Some(None),
    };

    if let (Some(case), Some(beta), Some(gamma1), Some(cc), Some(a0)) = (case, beta, gamma1, cc, a0_mode) {
        let spec = FilterSpec::for_case(case, beta, gamma1, cc).and_then(|s| match a0 {
            Some(mode) => s.with_a0_mode(mode),
            None => Ok(s),
        });
        if let Err(e) = spec {
            let msg = e.to_string();
            c.push(filter_issue_path(&msg), msg);
        }
    }

    let innovation = match obj.get("innovation") {
        Some(v) => parse_innovation(&mut c, v),
        None => Some(InnovationModel::Gaussian),
    };
    match innovation.and_then(|m| m.taper_class()) {
        Some(Err(e)) => c.push("innovation", e.to_string()),
        Some(Ok(InnovationTaper::Hard)) | None => {}
        Some(Ok(class)) => c.push(
            "innovation",
            format!("{class:?} tapering is out of scope: only hard tapering (gamma < 1/alpha) has a Gaussian limit"),
        ),
    }

    let n_list: Option<Vec<u64>> = match obj.get("n") {
        None => {
            c.push("n", "required");
            None
        }
        Some(v) => {
            let items = as_list(v);
            if items.is_empty() {
                c.push("n", "must list at least one sample size");
            }
            let mut out = Vec::new();
            let mut ok = !items.is_empty();
            for (i, x) in items {
                let path = format!("n[{i}]");
                match c.integer(x, &path) {
                    Some(0) => {
                        c.push(path, "sample sizes must be positive");
                        ok = false;
                    }
                    Some(n) => out.push(n),
                    None => ok = false,
                }
            }
            ok.then_some(out)
        }
    };

    let t_grid: Option<Vec<f64>> = match obj.get("t") {
        None => {
            c.push("t", "required");
            None
        }
        Some(v) => {
            let items = as_list(v);
            let mut out = Vec::new();
            let mut ok = true;
            for (i, x) in items {
                match c.number(x, &format!("t[{i}]")) {
                    Some(t) => out.push(t),
                    None => ok = false,
                }
            }
            if ok {
                if out.is_empty() {
                    c.push("t", "must list at least one time point");
                    ok = false;
                } else if out.iter().any(|&t| t <= 0.0) {
                    c.push("t", "time points must be positive");
                    ok = false;
                } else if out.windows(2).any(|w| w[1] <= w[0]) {
                    c.push("t", "time points must be strictly increasing");
                    ok = false;
                }
            }
            ok.then_some(out)
        }
    };

    let reps = match obj.get("reps") {
        Some(v) => c.integer(v, "reps").and_then(|r| {
            if r == 0 {
                c.push("reps", "must be at least 1");
                None
            } else {
                Some(r as usize)
            }
        }),
        None => Some(4000),
    };
    let seed = match obj.get("seed") {
        Some(v) => c.integer(v, "seed"),
        None => {
            c.push("seed", "required: every run is seeded explicitly");
            None
        }
    };

    let cov_pairs: Option<Vec<(f64, f64)>> = match obj.get("cov_pairs") {
        None => Some(Vec::new()),
        Some(Value::Array(items)) => {
            let mut out = Vec::new();
            let mut ok = true;
            for (i, p) in items.iter().enumerate() {
                let path = format!("cov_pairs[{i}]");
                match p.as_array().map(|a| a.as_slice()) {
                    Some([s, t]) => match (c.number(s, &format!("{path}[0]")), c.number(t, &format!("{path}[1]"))) {
                        (Some(s), Some(t)) => {
                            let on_grid = |x: f64| t_grid.as_ref().is_none_or(|g| g.contains(&x));
                            if !on_grid(s) || !on_grid(t) {
                                c.push(path, format!("({s}, {t}) is not on the t grid"));
                                ok = false;
                            } else if s == t {
                                c.push(path, "a pair needs two distinct points");
                                ok = false;
                            } else {
                                out.push((s, t));
                            }
                        }
                        _ => ok = false,
                    },
                    _ => {
                        c.push(path, format!("expected [s, t], got {p}"));
                        ok = false;
                    }
                }
            }
            ok.then_some(out)
        }
        Some(v) => {
            c.push("cov_pairs", format!("expected a list of [s, t] pairs, got {v}"));
            None
        }
    };

    let presample = match obj.get("presample") {
        Some(v) => enum_value(&mut c, v, "presample", "\"auto\", \"exact\", \"aggregated\""),
        None => Some(PresampleMode::Auto),
    };
    if presample == Some(PresampleMode::Aggregated) && innovation.is_some_and(|m| !m.is_gaussian()) {
        c.push("presample", "aggregated pre-sample draws need Gaussian innovations");
    }
    let engine = match obj.get("engine") {
        Some(v) => parse_engine(&mut c, v),
        None => Some(EngineOptions::default()),
    };

    if !c.issues.is_empty() {
        return Err(ConfigError { issues: c.issues });
    }
    let cfg = ExperimentConfig {
        case: case.expect("checked"),
        beta: beta.expect("checked"),
        gamma1: gamma1.expect("checked"),
        c: cc.expect("checked"),
        a0_mode: a0_mode.expect("checked"),
        innovation: innovation.expect("checked"),
        n_list: n_list.expect("checked"),
        t_grid: t_grid.expect("checked"),
        reps: reps.expect("checked"),
        seed: seed.expect("checked"),
        cov_pairs: cov_pairs.expect("checked"),
        presample: presample.expect("checked"),
        engine: engine.expect("checked"),
    };
    // anything the key-level checks above missed
    cfg.validate().map_err(|e| ConfigError {
        issues: vec![Issue {
            path: "$".into(),
            message: e.to_string(),
        }],
    })?;
    Ok(cfg)
}

/// The canonical `v1` document for `cfg`, with every key explicit.
pub fn config_to_value(cfg: &ExperimentConfig) -> Value {
    let innovation = match cfg.innovation {
        InnovationModel::Gaussian => json!({"kind": "gaussian"}),
        InnovationModel::Standardized { base } => json!({"kind": "standardized", "base": base}),
        InnovationModel::TaperedPareto { alpha, gamma } => {
            json!({"kind": "tapered-pareto", "alpha": alpha, "gamma": gamma})
        }
    };
    let mut v = json!({
        "version": SCHEMA_VERSION,
        "case": cfg.case.j(),
        "beta": cfg.beta,
        "gamma1": cfg.gamma1,
        "c": cfg.c,
        "innovation": innovation,
        "n": cfg.n_list,
        "t": cfg.t_grid,
        "reps": cfg.reps,
        "seed": cfg.seed,
        "cov_pairs": cfg.cov_pairs.iter().map(|&(s, t)| json!([s, t])).collect::<Vec<_>>(),
        "presample": cfg.presample,
        "engine": {"fft_threshold": cfg.engine.fft_threshold, "capacity": cfg.engine.capacity},
    });
    if let Some(mode) = cfg.a0_mode {
        v["a0"] = json!(mode);
    }
    v
}

pub fn serialize_config(cfg: &ExperimentConfig) -> String {
    serde_json::to_string_pretty(&config_to_value(cfg)).expect("config values are finite")
}
