//! JSON configuration: defaults, file contents, flag overrides and strict decoding.

use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::Overrides;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub type Error = Box<dyn std::error::Error>;

/// Where a flag lands in the configuration document.
///
/// Paths are `/`-separated keys; `*` maps over an array and a trailing `?`
/// sets the key only where it is already present.
#[derive(Debug, Clone, Copy)]
pub struct Target {
    pub flag: &'static str,
    pub paths: &'static [&'static str],
}

/// Read the config file, or take `default` when there is none.
pub fn load(path: Option<&Path>, default: Value) -> Result<Value, Error> {
    let Some(path) = path else { return Ok(default) };
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    if !value.is_object() {
        return Err(ConfigError(format!("{}: top level must be an object", path.display())).into());
    }
    Ok(value)
}

/// `FDE_SEED` overrides the `seed` key at each of `paths`.
pub fn apply_seed(doc: &mut Value, paths: &[&str]) -> Result<(), Error> {
    let Ok(raw) = std::env::var("FDE_SEED") else { return Ok(()) };
    let seed: u64 = raw.trim().parse().map_err(|_| ConfigError(format!("FDE_SEED must be an unsigned integer (got {raw:?})")))?;
    for p in paths {
        set_path(doc, p, &Value::from(seed));
    }
    Ok(())
}

fn flag_values(o: &Overrides) -> Vec<(&'static str, Option<Value>)> {
    let f = |v: Option<f64>| v.map(Value::from);
    vec![
        ("n", o.n.map(Value::from)),
        ("m", f(o.m)),
        ("beta", f(o.beta)),
        ("eta", f(o.eta)),
        ("lambda0", f(o.lambda0)),
        ("lambda1", f(o.lambda1)),
        ("lambda2", f(o.lambda2)),
        ("lambda3", f(o.lambda3)),
        ("mu", f(o.mu)),
        ("R", f(o.radius)),
        ("N", o.nodes.map(Value::from)),
        ("dt", f(o.dt)),
        ("horizon", f(o.horizon)),
        ("smax", f(o.smax)),
    ]
}

/// Apply flag overrides; a flag without a target for this subcommand is an error.
pub fn apply_overrides(doc: &mut Value, o: &Overrides, command: &str, targets: &[Target]) -> Result<(), Error> {
    for (flag, value) in flag_values(o) {
        let Some(value) = value else { continue };
        let Some(t) = targets.iter().find(|t| t.flag == flag) else {
            return Err(ConfigError(format!("flag --{flag} does not apply to `{command}`")).into());
        };
        for p in t.paths {
            set_path(doc, p, &value);
        }
    }
    Ok(())
}

fn set_path(doc: &mut Value, path: &str, value: &Value) {
    let keys: Vec<&str> = path.trim_start_matches('/').split('/').collect();
    set_keys(doc, &keys, value);
}

fn set_keys(node: &mut Value, keys: &[&str], value: &Value) {
    let (key, rest) = match keys.split_first() {
        Some(x) => x,
        None => return,
    };
    if *key == "*" {
        if let Value::Array(items) = node {
            for item in items {
                set_keys(item, rest, value);
            }
        }
        return;
    }
    let (key, only_existing) = match key.strip_suffix('?') {
        Some(k) => (k, true),
        None => (*key, false),
    };
    if !node.is_object() {
        if only_existing {
            return;
        }
        *node = Value::Object(Map::new());
    }
    let obj = node.as_object_mut().expect("object");
    if rest.is_empty() {
        if !only_existing || obj.contains_key(key) {
            obj.insert(key.to_string(), value.clone());
        }
        return;
    }
    match obj.get_mut(key) {
        Some(child) => set_keys(child, rest, value),
        None if !only_existing => {
            let mut child = Value::Object(Map::new());
            set_keys(&mut child, rest, value);
            obj.insert(key.to_string(), child);
        }
        None => {}
    }
}

/// Decode with unknown keys rejected, reporting the offending key path.
pub fn decode<T: DeserializeOwned>(doc: Value) -> Result<T, Error> {
    serde_path_to_error::deserialize(doc).map_err(|e| {
        let path = e.path().to_string();
        ConfigError(format!("config error at `{path}`: {}", e.inner())).into()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn paths_create_and_respect_presence() {
        let mut v = json!({"initial": {"kind": "profile", "lambda": 1.0}, "weights": [{"mu": 0.1}, {"lambda3": 1.0}]});
        set_path(&mut v, "/grid/N", &json!(11));
        set_path(&mut v, "/initial/lambda?", &json!(2.0));
        set_path(&mut v, "/initial/lambda0?", &json!(3.0));
        set_path(&mut v, "/weights/*/mu?", &json!(0.4));
        assert_eq!(v["grid"]["N"], json!(11));
        assert_eq!(v["initial"]["lambda"], json!(2.0));
        assert!(v["initial"].get("lambda0").is_none());
        assert_eq!(v["weights"][0]["mu"], json!(0.4));
        assert!(v["weights"][1].get("mu").is_none());
    }

    #[test]
    fn stray_flag_is_rejected() {
        let mut v = json!({});
        let o = Overrides { mu: Some(0.1), ..Default::default() };
        let err = apply_overrides(&mut v, &o, "profile", &[Target { flag: "n", paths: &["/params/n"] }]).unwrap_err();
        assert!(err.to_string().contains("--mu"));
    }
}
