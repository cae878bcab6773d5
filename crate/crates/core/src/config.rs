//! The JSON configuration document that drives every command.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::calibrate::{CalibrationTargets, TuneOptions};
use crate::error::ModelError;
use crate::params::EconomyParams;
use crate::scenario::{PairSpec, PolicyPath};
use crate::sweep::SweepSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputOptions {
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub plot: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    pub targets: CalibrationTargets,
    #[serde(default)]
    pub tune: TuneOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub schema_version: u32,
    pub economy: EconomyParams,
    /// Baseline-versus-cap experiment used by `pair`, `decompose`, `report`
    /// and as the scenario frame for calibration.
    #[serde(default)]
    pub scenario: PairSpec,
    /// Explicit path for `simulate`; defaults to the cap path of `scenario`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicyPath>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationSection>,
    #[serde(default)]
    pub output: OutputOptions,
}

#[derive(Debug)]
pub enum ConfigError {
    Io { path: String, source: std::io::Error },
    Parse { line: usize, column: usize, message: String },
    Schema { path: String, line: usize, column: usize, message: String },
    Version { found: Option<u64> },
    Invalid(ModelError),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, source } => write!(f, "cannot read config `{path}`: {source}"),
            ConfigError::Parse { line, column, message } => {
                write!(f, "config parse error at line {line}, column {column}: {message}")
            }
            ConfigError::Schema { path, line, column, message } => {
                write!(f, "config error at `{path}` (line {line}, column {column}): {message}")
            }
            ConfigError::Version { found: Some(v) } => {
                write!(f, "unsupported schema_version {v}; this build reads version {SCHEMA_VERSION}")
            }
            ConfigError::Version { found: None } => {
                write!(f, "missing integer `schema_version` (expected {SCHEMA_VERSION})")
            }
            ConfigError::Invalid(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ConfigError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            ConfigError::Io { source, .. } => Some(source),
            ConfigError::Invalid(e) => Some(e),
            _ => None,
        }
    }
}

impl From<ModelError> for ConfigError {
    fn from(e: ModelError) -> Self {
        ConfigError::Invalid(e)
    }
}

impl ConfigDocument {
    pub fn new(economy: EconomyParams) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            economy,
            scenario: PairSpec::default(),
            policy: None,
            sweep: None,
            calibration: None,
            output: OutputOptions::default(),
        }
    }

    /// Re-checks every model invariant with document paths.
    pub fn validate(&self) -> Result<(), ModelError> {
        self.economy.validate()?;
        self.scenario.validate()?;
        if let Some(p) = &self.policy {
            p.validate()?;
        }
        if let Some(s) = &self.sweep {
            s.validate(&self.economy)?;
        }
        if let Some(c) = &self.calibration {
            c.targets.validate()?;
        }
        Ok(())
    }

    /// Policy used by `simulate`.
    pub fn simulate_policy(&self) -> PolicyPath {
        self.policy.clone().unwrap_or_else(|| self.scenario.cap_policy())
    }

    /// Key-sorted compact JSON with every default filled in.
    pub fn canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string(&value).expect("value serializes")
    }

    /// Pretty, key-sorted echo suitable for reloading.
    pub fn echo(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let mut s = serde_json::to_string_pretty(&value).expect("value serializes");
        s.push('\n');
        s
    }

    /// SHA-256 of [`canonical_json`](Self::canonical_json), hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ConfigDocument, ConfigError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: strip_position(&e),
    })?;
    match value.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(SCHEMA_VERSION) => {}
        found => return Err(ConfigError::Version { found }),
    }
    let mut de = serde_json::Deserializer::from_str(text);
    let doc: ConfigDocument = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ConfigError::Schema {
            path,
            line: inner.line(),
            column: inner.column(),
            message: strip_position(&inner),
        }
    })?;
    doc.validate()?;
    Ok(doc)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ConfigDocument, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

fn strip_position(e: &serde_json::Error) -> String {
    let s = e.to_string();
    match s.rfind(" at line ") {
        Some(i) => s[..i].to_string(),
        None => s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
  "schema_version": 1,
  "economy": {
    "alpha": 0.33, "omega": 0.8, "sigma_sub": 0.8, "eta_informal": 0.5,
    "h_informal": 40.0, "lambda_dw": 0.3,
    "fatigue": {"kappa": 0.0001, "h_star": 36.0},
    "groups": {
      "S": {"capital": 0.2, "workforce": 0.6, "tau": 1.0, "gamma": 0.5, "informal_linear": 0.0,
            "informal_convex": 0.1, "mixture": [{"hours": 36.0, "weight": 0.4}, {"hours": 44.0, "weight": 0.6}]},
      "L": {"capital": 0.8, "workforce": 0.4, "tau": 0.5, "gamma": 0.5, "informal_linear": 0.0,
            "informal_convex": 1.0, "mixture": [{"hours": 40.0, "weight": 1.0}]}
    }
  }
}"#;

    #[test]
    fn minimal_document_gets_defaults() {
        let doc = parse_config(MINIMAL).unwrap();
        assert_eq!(doc.economy.tfp, 1.0);
        assert_eq!(doc.scenario, PairSpec::default());
        assert_eq!(doc.output.format, OutputFormat::Both);
        let echo = doc.echo();
        assert!(echo.contains("\"tfp\": 1.0"));
        assert!(echo.contains("\"horizon\": 12"));
    }

    #[test]
    fn echo_round_trips() {
        let doc = parse_config(MINIMAL).unwrap();
        let again = parse_config(&doc.echo()).unwrap();
        assert_eq!(doc, again);
        assert_eq!(doc.canonical_json(), again.canonical_json());
        assert_eq!(doc.hash(), again.hash());
    }

    #[test]
    fn hash_ignores_key_order_and_whitespace() {
        let a = parse_config(MINIMAL).unwrap();
        let reordered = MINIMAL.replace(
            r#""alpha": 0.33, "omega": 0.8,"#,
            r#""omega": 0.8,     "alpha": 0.33,"#,
        );
        let b = parse_config(&reordered).unwrap();
        assert_eq!(a.hash(), b.hash());
        let changed = parse_config(&MINIMAL.replace("\"alpha\": 0.33", "\"alpha\": 0.34")).unwrap();
        assert_ne!(a.hash(), changed.hash());
    }

    #[test]
    fn omega_out_of_range_names_the_field() {
        let err = parse_config(&MINIMAL.replace("\"omega\": 0.8", "\"omega\": 1.2")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("economy.omega"), "{msg}");
        assert!(msg.contains("(0, 1)"), "{msg}");
    }

    #[test]
    fn mixture_off_simplex_is_rejected() {
        let err = parse_config(&MINIMAL.replace("\"weight\": 0.6", "\"weight\": 0.59")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("simplex"), "{msg}");
        assert!(msg.contains("economy.groups.S.mixture"), "{msg}");
    }

    #[test]
    fn unknown_key_reports_path_and_position() {
        let err = parse_config(&MINIMAL.replace("\"alpha\": 0.33", "\"alpha\": 0.33, \"beta\": 1")).unwrap_err();
        match err {
            ConfigError::Schema { path, line, message, .. } => {
                assert_eq!(path, "economy.beta");
                assert_eq!(line, 4);
                assert!(message.contains("beta"), "{message}");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_config("{\n  \"schema_version\": 1,\n  oops\n}").unwrap_err();
        match err {
            ConfigError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn version_is_checked() {
        let err = parse_config(&MINIMAL.replace("\"schema_version\": 1", "\"schema_version\": 2")).unwrap_err();
        assert!(matches!(err, ConfigError::Version { found: Some(2) }));
        let err = parse_config(&MINIMAL.replace("\"schema_version\": 1,", "")).unwrap_err();
        assert!(matches!(err, ConfigError::Version { found: None }));
    }
}
