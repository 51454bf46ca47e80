//! JSON run configuration.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "scenario": "isotonic",
//!   "methods": [
//!     { "method": "antithetic", "alpha": 0.01, "k": 2 },
//!     { "method": "kfold", "k": [2, 100] }
//!   ],
//!   "replications": 1000,
//!   "seed": 1
//! }
//! ```
//!
//! `alpha` and `k` accept a scalar or a list; each method entry expands to
//! the product of its grids.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::Method;
use crate::harness::{GridOptions, MethodSpec, Scenario, ScenarioSpec};
use crate::ALPHA_FLOOR;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Copy> Grid<T> {
    pub fn values(&self) -> Vec<T> {
        match self {
            Grid::One(v) => vec![*v],
            Grid::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodEntry {
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Grid<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Grid<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub scenario: Scenario,
    /// Overrides the scenario's default sample size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ridge_lambda: Option<f64>,
    pub methods: Vec<MethodEntry>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default = "default_oracle_fits")]
    pub oracle_fits: usize,
    #[serde(default = "default_oracle_test_draws")]
    pub oracle_test_draws: usize,
}

fn default_replications() -> usize {
    GridOptions::default().replications
}

fn default_oracle_fits() -> usize {
    GridOptions::default().oracle_fits
}

fn default_oracle_test_draws() -> usize {
    GridOptions::default().oracle_test_draws
}

fn field_error(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

impl RunConfig {
    /// Parses and validates. Syntax errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("line {} column {}: {e}", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn scenario_spec(&self) -> ScenarioSpec {
        let d = ScenarioSpec::defaults(self.scenario, self.seed);
        ScenarioSpec {
            n: self.n.unwrap_or(d.n),
            sigma2: self.sigma2.unwrap_or(d.sigma2),
            ridge_lambda: self.ridge_lambda.unwrap_or(d.ridge_lambda),
            ..d
        }
    }

    pub fn grid_options(&self) -> GridOptions {
        GridOptions {
            replications: self.replications,
            oracle_fits: self.oracle_fits,
            oracle_test_draws: self.oracle_test_draws,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(field_error(
                "schema",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema),
            ));
        }
        if self.n == Some(0) {
            return Err(field_error("n", "must be at least 1"));
        }
        if let Some(s) = self.sigma2 {
            if !(s.is_finite() && s > 0.0) {
                return Err(field_error("sigma2", format!("must be positive, got {s}")));
            }
        }
        if let Some(l) = self.ridge_lambda {
            if !(l.is_finite() && l >= 0.0) {
                return Err(field_error("ridge_lambda", format!("must be nonnegative, got {l}")));
            }
        }
        if self.replications < 2 {
            return Err(field_error("replications", "must be at least 2"));
        }
        if self.oracle_fits < 2 {
            return Err(field_error("oracle_fits", "must be at least 2"));
        }
        if self.oracle_test_draws == 0 {
            return Err(field_error("oracle_test_draws", "must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(field_error("workers", "must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(field_error("methods", "at least one method is required"));
        }
        let spec = self.scenario_spec();
        for (i, m) in self.methods.iter().enumerate() {
            self.validate_entry(i, m, &spec)?;
        }
        Ok(())
    }

    fn validate_entry(&self, i: usize, m: &MethodEntry, spec: &ScenarioSpec) -> Result<()> {
        let at = |f: &str| format!("methods[{i}].{f}");
        let randomized = matches!(m.method, Method::AntitheticCV | Method::CoupledBootstrap);
        match (&m.alpha, randomized) {
            (None, true) => return Err(field_error(&at("alpha"), "required")),
            (Some(_), false) => return Err(field_error(&at("alpha"), format!("not used by {}", m.method.label()))),
            (Some(grid), true) => {
                let values = grid.values();
                if values.is_empty() {
                    return Err(field_error(&at("alpha"), "empty list"));
                }
                if let Some((j, a)) = values.iter().enumerate().find(|(_, a)| !(a.is_finite() && **a >= ALPHA_FLOOR)) {
                    let name = match grid {
                        Grid::One(_) => at("alpha"),
                        Grid::Many(_) => format!("{}[{j}]", at("alpha")),
                    };
                    return Err(field_error(&name, format!("must be finite and >= {ALPHA_FLOOR:e}, got {a}")));
                }
            }
            (None, false) => {}
        }
        match (&m.k, m.method) {
            (Some(_), Method::Sure) => return Err(field_error(&at("k"), "not used by sure")),
            (None, Method::Sure) => {}
            (None, _) => return Err(field_error(&at("k"), "required")),
            (Some(grid), _) => {
                if grid.values().is_empty() {
                    return Err(field_error(&at("k"), "empty list"));
                }
            }
        }
        for spec_m in expand(m) {
            spec_m
                .validate(spec)
                .map_err(|e| field_error(&format!("methods[{i}]"), e))?;
        }
        Ok(())
    }

    /// Flattens the method grids in file order (alpha outer, k inner).
    pub fn method_specs(&self) -> Vec<MethodSpec> {
        self.methods.iter().flat_map(expand).collect()
    }
}

fn expand(m: &MethodEntry) -> Vec<MethodSpec> {
    match m.method {
        Method::Sure => vec![MethodSpec::sure()],
        Method::KFoldCV => m
            .k
            .as_ref()
            .map(|g| g.values().into_iter().map(MethodSpec::kfold).collect())
            .unwrap_or_default(),
        method => {
            let alphas = m.alpha.as_ref().map(Grid::values).unwrap_or_default();
            let ks = m.k.as_ref().map(Grid::values).unwrap_or_default();
            alphas
                .iter()
                .flat_map(|&alpha| ks.iter().map(move |&k| MethodSpec { method, alpha, k }))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema": 1,
        "scenario": "isotonic",
        "methods": [{ "method": "antithetic", "alpha": 0.01, "k": 2 }],
        "replications": 10
    }"#;

    fn config_error(text: &str) -> String {
        match RunConfig::from_json(text) {
            Err(Error::Config(msg)) => msg,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.method_specs(), vec![MethodSpec::antithetic(0.01, 2)]);
        assert_eq!(cfg.scenario_spec().n, 100);
        assert_eq!(cfg.oracle_fits, 2000);
    }

    #[test]
    fn round_trip() {
        let text = r#"{
            "schema": 1, "scenario": "logistic", "n": 80, "ridge_lambda": 0.5,
            "methods": [
                { "method": "antithetic", "alpha": [0.1, 0.5], "k": [10, 20] },
                { "method": "independent", "alpha": 0.1, "k": 10 },
                { "method": "kfold", "k": 10 }
            ],
            "replications": 50, "seed": 9, "workers": 2, "output": "out.csv"
        }"#;
        let cfg = RunConfig::from_json(text).unwrap();
        let again = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.method_specs().len(), 6);
        assert_eq!(cfg.method_specs()[1], MethodSpec::antithetic(0.1, 20));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = MINIMAL.replace("\"replications\"", "\"replicates\": 3, \"replications\"");
        assert!(config_error(&text).contains("replicates"));
        let text = MINIMAL.replace("\"k\": 2", "\"k\": 2, \"beta\": 1");
        assert!(config_error(&text).contains("beta"));
    }

    #[test]
    fn negative_alpha_names_field() {
        let msg = config_error(&MINIMAL.replace("0.01", "-1"));
        assert!(msg.starts_with("methods[0].alpha"), "{msg}");
        let msg = config_error(&MINIMAL.replace("0.01", "[0.1, -1]"));
        assert!(msg.starts_with("methods[0].alpha[1]"), "{msg}");
    }

    #[test]
    fn other_field_errors() {
        assert!(config_error(&MINIMAL.replace("\"schema\": 1", "\"schema\": 2")).starts_with("schema"));
        assert!(config_error(&MINIMAL.replace("10", "1")).starts_with("replications"));
        let kfold_alpha = MINIMAL.replace("antithetic", "kfold");
        assert!(config_error(&kfold_alpha).starts_with("methods[0].alpha"));
        let too_many = MINIMAL.replace(r#""method": "antithetic", "alpha": 0.01, "k": 2"#, r#""method": "kfold", "k": 500"#);
        assert!(config_error(&too_many).starts_with("methods[0]"));
        let syntax = config_error("{ \"schema\": 1,\n  oops }");
        assert!(syntax.starts_with("line 2"), "{syntax}");
    }
}
