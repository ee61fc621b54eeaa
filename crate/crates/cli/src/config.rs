//! `--config` files: a JSON object with an optional top-level `format` and
//! one section per subcommand, keyed by flag name without the dashes.
//!
//! ```json
//! { "format": "json", "audit": { "mech": "a1ball", "n": 6, "d": 2, "beta": 1 } }
//! ```
//!
//! A flag given on the command line always wins over the file.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::error::{usage, CliError, CliResult};

const SUBCOMMANDS: [&str; 5] = ["bounds", "audit", "sample", "gt", "sweep"];

/// Values for one subcommand. Keys are consumed as they are resolved so
/// leftovers can be reported as typos.
#[derive(Debug, Default)]
pub struct Layer {
    section: &'static str,
    values: Map<String, Value>,
}

impl Layer {
    pub fn load(path: Option<&Path>, section: &'static str) -> CliResult<(Layer, Option<Value>)> {
        let Some(path) = path else {
            return Ok((
                Layer {
                    section,
                    values: Map::new(),
                },
                None,
            ));
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        let root: Value =
            serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let Value::Object(mut root) = root else {
            return Err(usage(format!("{}: expected a JSON object", path.display())));
        };
        let format = root.remove("format");
        for key in root.keys() {
            if !SUBCOMMANDS.contains(&key.as_str()) {
                return Err(usage(format!(
                    "{}: unknown top-level key {key:?}",
                    path.display()
                )));
            }
        }
        let values = match root.remove(section) {
            None => Map::new(),
            Some(Value::Object(m)) => m,
            Some(_) => {
                return Err(usage(format!(
                    "config section {section:?} must be an object"
                )))
            }
        };
        Ok((Layer { section, values }, format))
    }

    /// The flag if given, else the config value, else `None`.
    pub fn get<T: DeserializeOwned>(&mut self, key: &str, flag: Option<T>) -> CliResult<Option<T>> {
        let from_file = self.values.remove(key);
        if flag.is_some() {
            return Ok(flag);
        }
        from_file
            .map(|v| {
                serde_json::from_value(v)
                    .map_err(|e| usage(format!("config {}.{key}: {e}", self.section)))
            })
            .transpose()
    }

    pub fn require<T: DeserializeOwned>(&mut self, key: &str, flag: Option<T>) -> CliResult<T> {
        self.get(key, flag)?
            .ok_or_else(|| usage(format!("missing --{key} (flag or config key {key:?})")))
    }

    pub fn or<T: DeserializeOwned>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> CliResult<T> {
        Ok(self.get(key, flag)?.unwrap_or(default))
    }

    pub fn finish(self) -> CliResult<()> {
        match self.values.keys().next() {
            None => Ok(()),
            Some(k) => Err(usage(format!(
                "config section {:?} has unknown key {k:?}",
                self.section
            ))),
        }
    }
}
