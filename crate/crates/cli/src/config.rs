//! `--config file.json`: a flat JSON object whose keys are long flag names.
//! Its entries are spliced into the argument list right after the
//! subcommand, so flags given on the command line still win.

use std::ffi::OsString;

use serde_json::Value;

/// Returns the argument list with the config file (if any) expanded.
pub fn expand_args(raw: Vec<OsString>, subcommands: &[String]) -> Result<Vec<OsString>, String> {
    let mut path = None;
    let mut rest: Vec<OsString> = Vec::with_capacity(raw.len());
    let mut it = raw.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy().into_owned();
        if s == "--config" {
            path = Some(
                it.next()
                    .ok_or("--config needs a file path")?
                    .to_string_lossy()
                    .into_owned(),
            );
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text =
        std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let doc: Value =
        serde_json::from_str(&text).map_err(|e| format!("config {path} is not valid JSON: {e}"))?;
    let Value::Object(map) = doc else {
        return Err(format!("config {path} must hold a JSON object"));
    };

    let mut sub: Vec<OsString> = Vec::new();
    let mut flags: Vec<OsString> = Vec::new();
    for (k, v) in map {
        if k == "subcommand" || k == "command" {
            let s = v
                .as_str()
                .ok_or("config key 'subcommand' must be a string")?;
            sub = s.split_whitespace().map(OsString::from).collect();
            continue;
        }
        let flag = format!("--{}", k.replace('_', "-"));
        match v {
            Value::Bool(true) => flags.push(flag.into()),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let parts: Vec<String> = items.iter().map(scalar).collect::<Result<_, _>>()?;
                flags.push(format!("{flag}={}", parts.join(",")).into());
            }
            other => flags.push(format!("{flag}={}", scalar(&other)?).into()),
        }
    }

    // where does the command line's own subcommand end?
    let mut at = 1;
    while at < rest.len() && !subcommands.iter().any(|s| rest[at].to_string_lossy() == *s) {
        at += 1;
    }
    let mut out: Vec<OsString> = Vec::with_capacity(rest.len() + flags.len() + sub.len());
    if at < rest.len() {
        // explicit subcommand (plus an `expansions` action if present)
        let mut end = at + 1;
        if rest[at].to_string_lossy() == "expansions"
            && end < rest.len()
            && !rest[end].to_string_lossy().starts_with('-')
        {
            end += 1;
        }
        out.extend(rest[..end].iter().cloned());
        out.extend(flags);
        out.extend(rest[end..].iter().cloned());
    } else {
        if sub.is_empty() {
            return Err("no subcommand on the command line or in the config".into());
        }
        out.push(rest[0].clone());
        out.extend(sub);
        out.extend(flags);
        out.extend(rest[1..].iter().cloned());
    }
    Ok(out)
}

fn scalar(v: &Value) -> Result<String, String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => Err(format!("config value {v} is not a scalar")),
    }
}
