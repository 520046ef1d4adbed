//! Flag/file merging. The optional config file is TOML with the same keys as
//! the long flags; a flag given on the command line wins over the file.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

/// Keys accepted in a config file besides the command parameters.
pub const COMMON_KEYS: [&str; 3] = ["out", "seed", "jobs"];

pub fn read_file(path: &Path) -> Result<toml::Table, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    text.parse::<toml::Table>().map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Splits the common keys off a config table.
pub fn split_common(mut table: toml::Table) -> (toml::Table, toml::Table) {
    let mut common = toml::Table::new();
    for k in COMMON_KEYS {
        if let Some(v) = table.remove(k) {
            common.insert(k.to_string(), v);
        }
    }
    (table, common)
}

/// Overlays the non-null fields of `flags` on the parameters from `file`.
pub fn merge<T: Serialize + DeserializeOwned + Default>(flags: &T, file: Option<toml::Table>) -> Result<T, CliError> {
    let Some(table) = file else {
        return to_value(flags).and_then(from_value);
    };
    // every field serializes (as null when unset), so the default value
    // lists the accepted keys
    if let Value::Object(known) = to_value(&T::default())? {
        let mut unknown: Vec<&String> = table.keys().filter(|k| !known.contains_key(*k)).collect();
        if !unknown.is_empty() {
            unknown.sort();
            let names: Vec<&str> = unknown.iter().map(|s| s.as_str()).collect();
            return Err(CliError::Config(format!("unknown config keys: {}", names.join(", "))));
        }
    }
    let from_file: T = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
    let mut base = to_value(&from_file)?;
    if let (Value::Object(base), Value::Object(over)) = (&mut base, to_value(flags)?) {
        for (k, v) in over {
            if !v.is_null() {
                base.insert(k, v);
            }
        }
    }
    from_value(base)
}

fn to_value<T: Serialize>(t: &T) -> Result<Value, CliError> {
    serde_json::to_value(t).map_err(|e| CliError::Config(e.to_string()))
}

fn from_value<T: DeserializeOwned>(v: Value) -> Result<T, CliError> {
    serde_json::from_value(v).map_err(|e| CliError::Config(e.to_string()))
}

/// Renders resolved parameters as a config file that reproduces the run.
pub fn to_toml<T: Serialize>(params: &T, common: &[(&str, toml::Value)]) -> Result<String, CliError> {
    let mut table: toml::Table = toml::Value::try_from(params)
        .map_err(|e| CliError::Config(e.to_string()))?
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    for (k, v) in common {
        table.insert(k.to_string(), v.clone());
    }
    toml::to_string(&table).map_err(|e| CliError::Config(e.to_string()))
}
