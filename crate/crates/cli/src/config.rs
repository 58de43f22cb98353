//! TOML configuration. Keys are the long flag names (`_` and `-` both
//! accepted): top-level keys are global options, `[command]` tables hold
//! options of one subcommand. The file is spliced into the argument list
//! ahead of the user's own flags, which therefore win.

use std::ffi::OsString;
use std::path::Path;

use toml::Value;

pub const SUBCOMMANDS: [&str; 6] = [
    "spectrum",
    "derivative",
    "level-curve",
    "heat-kernel",
    "exponents",
    "rationality-scan",
];

/// The `--config` path, if present, without parsing anything else.
pub fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(path) = s.strip_prefix("--config=") {
            return Some(path.into());
        }
    }
    None
}

fn scalar(key: &str, v: &Value) -> Result<Option<String>, String> {
    Ok(Some(match v {
        Value::String(s) => s.clone(),
        Value::Integer(i) => i.to_string(),
        Value::Float(f) => format!("{f:e}"),
        Value::Boolean(_) => return Ok(None),
        Value::Array(items) => {
            let parts = items
                .iter()
                .map(|x| scalar(key, x)?.ok_or_else(|| format!("config key {key}: booleans not allowed in lists")))
                .collect::<Result<Vec<_>, _>>()?;
            parts.join(",")
        }
        _ => return Err(format!("config key {key}: unsupported value")),
    }))
}

fn flags(table: &toml::Table, skip_tables: bool) -> Result<Vec<OsString>, String> {
    let mut out = Vec::new();
    for (key, v) in table {
        if let Value::Table(_) = v {
            if skip_tables {
                continue;
            }
            return Err(format!("config key {key}: nested tables are not allowed"));
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match (v, scalar(key, v)?) {
            (Value::Boolean(true), _) => out.push(flag.into()),
            (Value::Boolean(false), _) => {}
            (_, Some(value)) => {
                // `=` keeps negative numbers from reading as flags.
                out.push(format!("{flag}={value}").into());
            }
            (_, None) => unreachable!("only booleans have no scalar form"),
        }
    }
    Ok(out)
}

/// Parse `text` and splice its flags into `args`.
pub fn merge(text: &str, args: &[OsString]) -> Result<Vec<OsString>, String> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        format!("invalid config: {}", e.message().lines().next().unwrap_or("parse error"))
    })?;
    for (key, v) in &table {
        if v.is_table() && !SUBCOMMANDS.contains(&key.as_str()) {
            return Err(format!("invalid config: unknown section [{key}]"));
        }
    }
    let global = flags(&table, true)?;
    let position = args
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()));
    let Some(position) = position else {
        // No subcommand: let clap report the usage error.
        return Ok(args.to_vec());
    };
    let command = args[position].to_string_lossy().into_owned();
    let local = match table.get(&command) {
        Some(Value::Table(t)) => flags(t, false)?,
        _ => Vec::new(),
    };
    let mut out = args[..=position].to_vec();
    out.extend(global);
    out.extend(local);
    out.extend_from_slice(&args[position + 1..]);
    Ok(out)
}

pub fn load(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    match config_path(&args) {
        None => Ok(args),
        Some(path) => {
            let text = std::fs::read_to_string(Path::new(&path))
                .map_err(|e| format!("cannot read config {}: {e}", path.to_string_lossy()))?;
            merge(&text, &args)
        }
    }
}
