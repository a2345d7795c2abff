//! Flat TOML configuration files. Each key names a flag of the subcommand
//! (`bond-dim = 30`, `early-stop = true`, `plateau = [200, 600]`). The file's
//! flags are spliced in right after the subcommand, so anything given on the
//! command line overrides them.

use std::path::{Path, PathBuf};

use crate::error::CliError;

const GLOBAL_WITH_VALUE: &[&str] = &["--config", "--threads"];
const NESTED: &[&str] = &["analyze"];

/// Splits `--config FILE` out of `argv`.
pub fn take_config(argv: &[String]) -> Result<(Vec<String>, Option<PathBuf>), CliError> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut config = None;
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            let v = it.next().ok_or_else(|| CliError::Usage("--config needs a file".into()))?;
            config = Some(PathBuf::from(v));
        } else if let Some(v) = a.strip_prefix("--config=") {
            config = Some(PathBuf::from(v));
        } else {
            rest.push(a.clone());
        }
    }
    Ok((rest, config))
}

/// Index just past the subcommand path (`train`, `analyze energy`, ...).
fn command_end(argv: &[String]) -> usize {
    let mut i = 1;
    let mut depth = 0;
    let mut nested = false;
    while i < argv.len() {
        let a = &argv[i];
        if GLOBAL_WITH_VALUE.contains(&a.as_str()) {
            i += 2;
            continue;
        }
        if a.starts_with('-') {
            i += 1;
            continue;
        }
        depth += 1;
        if depth == 1 && NESTED.contains(&a.as_str()) {
            nested = true;
            i += 1;
            continue;
        }
        if depth == 1 && !nested || depth == 2 {
            return i + 1;
        }
        i += 1;
    }
    argv.len()
}

fn scalar(key: &str, v: &toml::Value) -> Result<String, CliError> {
    match v {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(n) => Ok(n.to_string()),
        toml::Value::Float(x) => Ok(format!("{x:?}")),
        toml::Value::Boolean(b) => Ok(b.to_string()),
        _ => Err(CliError::Usage(format!("config key {key}: unsupported value {v}"))),
    }
}

/// Flags equivalent to a parsed config table, in key order.
pub fn table_to_flags(table: &toml::Table) -> Result<Vec<String>, CliError> {
    let mut flags = Vec::new();
    for (key, v) in table {
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            toml::Value::Boolean(b) => flags.push(format!("{flag}={b}")),
            toml::Value::Array(items) => {
                if items.is_empty() {
                    return Err(CliError::Usage(format!("config key {key}: empty list")));
                }
                flags.push(flag);
                for item in items {
                    flags.push(scalar(key, item)?);
                }
            }
            other => {
                flags.push(flag);
                flags.push(scalar(key, other)?);
            }
        }
    }
    Ok(flags)
}

pub fn load_table(path: &Path) -> Result<toml::Table, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    text.parse::<toml::Table>().map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

/// `argv` with the config file's flags spliced in after the subcommand.
pub fn expand(argv: &[String]) -> Result<(Vec<String>, Option<PathBuf>), CliError> {
    let (mut rest, path) = take_config(argv)?;
    if let Some(p) = &path {
        let flags = table_to_flags(&load_table(p)?)?;
        let at = command_end(&rest);
        rest.splice(at..at, flags);
    }
    Ok((rest, path))
}
