use std::collections::BTreeMap;

use serde::Deserialize;

use crate::config::{ExperimentConfig, Settings};
use crate::error::{Error, Result};

/// A parameter sweep: shared `[base]` settings plus a `[grid]` of values
/// per key. Every combination of grid values becomes one experiment.
///
/// ```toml
/// [base]
/// problem = "ellipsoid"
/// dim = 10
/// runs = 20
///
/// [grid]
/// alpha = [0.0, 0.5, 1.0]
/// tau = [0, 2, 4]
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    #[serde(default)]
    pub base: Settings,
    #[serde(default)]
    pub grid: BTreeMap<String, Vec<toml::Value>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    /// `key=value` pairs joined by `_`, usable as a directory name.
    pub label: String,
    pub config: ExperimentConfig,
}

fn label_value(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl SweepFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn expand(&self) -> Result<Vec<SweepPoint>> {
        if let Some((k, _)) = self.grid.iter().find(|(_, v)| v.is_empty()) {
            return Err(Error::Config(format!("grid key `{k}` has no values")));
        }
        let keys: Vec<&String> = self.grid.keys().collect();
        let total: usize = self.grid.values().map(Vec::len).product();
        let mut points = Vec::with_capacity(total);
        for mut idx in 0..total {
            let mut table = toml::Table::new();
            let mut label = Vec::with_capacity(keys.len());
            for key in keys.iter().rev() {
                let values = &self.grid[*key];
                let v = &values[idx % values.len()];
                idx /= values.len();
                table.insert((*key).clone(), v.clone());
                label.push(format!("{key}={}", label_value(v)));
            }
            label.reverse();
            let overrides: Settings =
                toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
            let config = self.base.merged(&overrides).to_config()?;
            let label = if label.is_empty() { "base".to_string() } else { label.join("_") };
            points.push(SweepPoint { label, config });
        }
        Ok(points)
    }
}
