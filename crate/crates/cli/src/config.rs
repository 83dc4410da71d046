//! Option defaults from a TOML file.
//!
//! Top-level keys apply to every command that has an option of that name;
//! keys under `[stability]`, `[re]`, `[re.train]` and so on apply to that
//! command only and must name one of its options. Keys use the long option
//! name (`exclude-punct` or `exclude_punct`). Options already given on the
//! command line are left alone, so flags always win over the file.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Command;

/// Value of `--config` (or `--config=`) if present.
pub fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut it = argv.iter().skip(1);
    while let Some(arg) = it.next() {
        let s = arg.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}

/// Subcommand names on the command line, outermost first.
fn subcommand_path(root: &Command, argv: &[OsString]) -> Vec<String> {
    let mut path = Vec::new();
    let mut cmd = root;
    let mut skip_value = false;
    for arg in argv.iter().skip(1) {
        let s = arg.to_string_lossy();
        if skip_value {
            skip_value = false;
            continue;
        }
        if s == "--config" {
            skip_value = true;
            continue;
        }
        if s.starts_with('-') {
            continue;
        }
        match cmd.find_subcommand(s.as_ref()) {
            Some(sub) => {
                path.push(sub.get_name().to_owned());
                cmd = sub;
            }
            None => break,
        }
    }
    path
}

fn given_on_command_line(argv: &[OsString], long: &str) -> bool {
    let flag = format!("--{long}");
    let prefix = format!("--{long}=");
    argv.iter().any(|a| {
        let s = a.to_string_lossy();
        s == flag || s.starts_with(&prefix)
    })
}

fn scalar(value: &toml::Value) -> Result<String> {
    Ok(match value {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => f.to_string(),
        toml::Value::Boolean(b) => b.to_string(),
        other => bail!("unsupported value {other}"),
    })
}

/// Extra command-line arguments equivalent to the file's settings for the
/// command being run.
pub fn file_args(root: &Command, path: &Path, argv: &[OsString]) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path).context("cannot read")?;
    let table: toml::Table = toml::from_str(&text).context("invalid TOML")?;

    let names = subcommand_path(root, argv);
    let mut leaf = root;
    for n in &names {
        leaf = leaf.find_subcommand(n).expect("name came from this command tree");
    }

    // (key, value, strict): strict layers must only name known options
    let mut layers: Vec<(String, toml::Value, bool)> = Vec::new();
    let mut scope = Some(&table);
    for depth in 0..=names.len() {
        let Some(t) = scope else { break };
        for (k, v) in t {
            if !v.is_table() {
                layers.push((k.replace('_', "-"), v.clone(), depth > 0));
            }
        }
        scope = names.get(depth).and_then(|n| t.get(n)).and_then(toml::Value::as_table);
    }

    let mut merged: Vec<(String, toml::Value, bool)> = Vec::new();
    for (k, v, strict) in layers {
        merged.retain(|(mk, ..)| *mk != k);
        merged.push((k, v, strict));
    }

    let mut out = Vec::new();
    for (key, value, strict) in merged {
        if key == "config" {
            continue;
        }
        let Some(arg) = leaf.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            if strict {
                bail!("`{}` has no option `{key}`", names.join(" "));
            }
            continue;
        };
        if given_on_command_line(argv, &key) {
            continue;
        }
        let flag = OsString::from(format!("--{key}"));
        if !arg.get_action().takes_values() {
            match value {
                toml::Value::Boolean(true) => out.push(flag),
                toml::Value::Boolean(false) => {}
                other => bail!("`{key}` is a switch and takes true or false, not {other}"),
            }
            continue;
        }
        let values = match &value {
            toml::Value::Array(items) => items.iter().map(scalar).collect::<Result<Vec<_>>>()?,
            v => vec![scalar(v)?],
        };
        for v in values {
            out.push(flag.clone());
            out.push(OsString::from(v));
        }
    }
    Ok(out)
}
