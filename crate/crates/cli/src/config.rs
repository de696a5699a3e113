//! `key = value` config files, spliced into the argument list so that
//! explicit flags (which come later) win.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

pub const SUBCOMMANDS: [&str; 4] = ["eval", "figure", "sweep", "validate"];

/// Parse a config file into `--key=value` tokens. `#` starts a comment;
/// `true`/`false` values toggle switches.
pub fn tokens(text: &str) -> Result<Vec<OsString>, String> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", n + 1))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(format!("config line {}: invalid key '{}'", n + 1, k.trim()));
        }
        match v.trim() {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            v => out.push(format!("--{key}={v}").into()),
        }
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
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

/// Insert the tokens of `--config FILE` (if present) right after the
/// subcommand name.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(Path::new(&path)).map_err(|e| {
        format!(
            "invalid --config: cannot read {}: {e}",
            Path::new(&path).display()
        )
    })?;
    let extra = tokens(&text)?;
    let at = args
        .iter()
        .skip(1)
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
        .map_or(args.len(), |i| i + 2);
    let mut out = args;
    out.splice(at..at, extra);
    Ok(out)
}

/// The effective command line with machine-local settings (output
/// location, worker count, config path) removed.
pub fn canonical(args: &[OsString]) -> String {
    let mut words = vec!["maser-tur".to_string()];
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if ["--out", "--workers", "--config"].contains(&s.as_ref()) {
            it.next();
            continue;
        }
        if ["--out=", "--workers=", "--config="]
            .iter()
            .any(|p| s.starts_with(p))
        {
            continue;
        }
        words.push(s.into_owned());
    }
    words.join(" ")
}
