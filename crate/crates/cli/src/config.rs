use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::Value;

use crate::args::Command;

/// Path given to `--config`, if any.
pub fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Flag tokens `--key=value` for every entry of a JSON object. Arrays
/// become comma lists, objects are passed through as JSON text, `true`
/// becomes a bare switch and `false`/`null` are dropped. The key
/// `command` names the subcommand and is returned separately.
pub fn config_tokens(value: &Value) -> Result<(Option<String>, Vec<OsString>)> {
    let Value::Object(map) = value else {
        bail!("config must be a JSON object");
    };
    let mut command = None;
    let mut tokens = Vec::new();
    for (key, v) in map {
        if key == "command" {
            let Value::String(c) = v else {
                bail!("config \"command\" must be a string");
            };
            command = Some(c.clone());
            continue;
        }
        if key == "config" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        let text = match v {
            Value::Null | Value::Bool(false) => continue,
            Value::Bool(true) => {
                tokens.push(flag.into());
                continue;
            }
            Value::Array(items) => items.iter().map(scalar).collect::<Result<Vec<_>>>()?.join(","),
            Value::Object(_) => v.to_string(),
            other => scalar(other)?,
        };
        tokens.push(format!("{flag}={text}").into());
    }
    Ok((command, tokens))
}

fn scalar(v: &Value) -> Result<String> {
    Ok(match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        other => bail!("unsupported config value {other}"),
    })
}

/// Inserts the config tokens right after the subcommand so that later,
/// explicit flags override them.
pub fn merge(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(Path::new(&path)).with_context(|| format!("reading {}", path.to_string_lossy()))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.to_string_lossy()))?;
    let (command, tokens) = config_tokens(&value)?;
    let mut argv = argv;
    let pos = argv
        .iter()
        .skip(1)
        .position(|a| Command::NAMES.contains(&a.to_string_lossy().as_ref()))
        .map(|p| p + 1);
    let at = match (pos, command) {
        (Some(p), _) => p + 1,
        (None, Some(c)) => {
            argv.push(c.into());
            argv.len()
        }
        (None, None) => return Ok(argv),
    };
    argv.splice(at..at, tokens);
    Ok(argv)
}
