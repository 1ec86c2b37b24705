//! `--set dotted.path=value` edits applied to a JSON config before parsing.

use serde_json::{Map, Value};

/// A single `path=value` override. The value is parsed as JSON and falls
/// back to a plain string, so `n=25` is a number and `mode=exact_enumeration`
/// a string.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub path: Vec<String>,
    pub value: Value,
}

impl std::str::FromStr for Override {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (path, raw) = s
            .split_once('=')
            .ok_or_else(|| format!("override `{s}` must look like key.path=value"))?;
        let path: Vec<String> = path.split('.').map(str::to_string).collect();
        if path.iter().any(String::is_empty) {
            return Err(format!("override `{s}` has an empty path segment"));
        }
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        Ok(Override { path, value })
    }
}

impl Override {
    /// Sets the value, creating intermediate objects as needed. Array
    /// elements are addressed by index.
    pub fn apply(&self, doc: &mut Value) -> Result<(), String> {
        let mut node = doc;
        for (depth, key) in self.path.iter().enumerate() {
            let last = depth + 1 == self.path.len();
            node = match node {
                Value::Object(map) => {
                    if last {
                        map.insert(key.clone(), self.value.clone());
                        return Ok(());
                    }
                    map.entry(key.clone()).or_insert_with(|| Value::Object(Map::new()))
                }
                Value::Array(items) => {
                    let i: usize = key
                        .parse()
                        .map_err(|_| format!("`{}`: `{key}` is not an array index", self.dotted()))?;
                    let len = items.len();
                    let slot = items
                        .get_mut(i)
                        .ok_or_else(|| format!("`{}`: index {i} out of range ({len})", self.dotted()))?;
                    if last {
                        *slot = self.value.clone();
                        return Ok(());
                    }
                    slot
                }
                _ => {
                    return Err(format!(
                        "`{}`: `{key}` is inside a non-object value",
                        self.dotted()
                    ))
                }
            };
        }
        Ok(())
    }

    pub fn dotted(&self) -> String {
        self.path.join(".")
    }
}
