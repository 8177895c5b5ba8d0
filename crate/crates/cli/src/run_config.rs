//! Experiment configuration files.
//!
//! `--spec FILE` accepts either a bare ellipse specification or a run
//! configuration wrapping one:
//!
//! ```json
//! {"spec": {"a": [["5/4", "1/2"], ["1/2", 1]]}, "ks": ["8^2", "16^2"], "r": 10}
//! ```
//!
//! Flags given on the command line take precedence over the file.

use std::fs;
use std::path::{Path, PathBuf};

use ellipse_sandpile::config::SpecJson;
use ellipse_sandpile::exact::parse_exact;
use ellipse_sandpile::EllipseSpec;
use num_rational::BigRational;
use serde::Deserialize;
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub spec: SpecJson,
    #[serde(default)]
    pub ks: Option<Vec<Value>>,
    #[serde(default)]
    pub r: Option<u32>,
    #[serde(default)]
    pub search_radius: Option<i64>,
    #[serde(default)]
    pub windows: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub l: Option<Vec<f64>>,
    #[serde(default)]
    pub cache: Option<PathBuf>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_spec(spec: SpecJson) -> Self {
        RunConfig {
            spec,
            ks: None,
            r: None,
            search_radius: None,
            windows: None,
            seed: None,
            trials: None,
            l: None,
            cache: None,
            out: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: Value = serde_json::from_str(text).map_err(CliError::config)?;
        let wrapped = doc.as_object().is_some_and(|o| o.contains_key("spec"));
        if wrapped {
            serde_json::from_value(doc).map_err(CliError::config)
        } else {
            Ok(RunConfig::from_spec(serde_json::from_value(doc).map_err(CliError::config)?))
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        RunConfig::parse(&text)
    }

    /// The scales to run: `cli_ks` if given, else the file's `ks`, else
    /// the specification's own `k`.
    pub fn scales(&self, cli_ks: Option<&str>) -> Result<Vec<Option<BigRational>>, CliError> {
        if let Some(list) = cli_ks {
            return parse_list(list).map(|ks| ks.into_iter().map(Some).collect());
        }
        match &self.ks {
            Some(values) if !values.is_empty() => values
                .iter()
                .map(|v| {
                    let text = match v {
                        Value::String(s) => s.clone(),
                        Value::Number(n) => n.to_string(),
                        other => return Err(CliError::config(format!("ks: bad entry {other}"))),
                    };
                    parse_exact(&text).map(Some).map_err(CliError::config)
                })
                .collect(),
            _ => Ok(vec![None]),
        }
    }

    /// One specification per scale.
    pub fn specs(&self, cli_ks: Option<&str>) -> Result<Vec<EllipseSpec>, CliError> {
        self.scales(cli_ks)?.iter().map(|k| Ok(self.spec.to_spec(k.as_ref())?)).collect()
    }
}

/// Parses a comma-separated list of exact numbers.
pub fn parse_list(list: &str) -> Result<Vec<BigRational>, CliError> {
    let ks: Vec<BigRational> =
        list.split(',').map(|s| parse_exact(s).map_err(CliError::config)).collect::<Result<_, _>>()?;
    if ks.is_empty() {
        return Err(CliError::config("empty list"));
    }
    Ok(ks)
}
