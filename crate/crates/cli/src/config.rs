//! Merging a flat TOML config file into the command line.
//!
//! Every key is a flag name without the leading dashes. Values from the file
//! are used only for flags that the command line does not set, so explicit
//! flags always win.

use std::ffi::OsString;
use std::fs;

use crate::Failure;

fn flag_name(arg: &str) -> Option<&str> {
    let body = arg.strip_prefix("--")?;
    Some(body.split_once('=').map_or(body, |(name, _)| name))
}

fn value_string(key: &str, value: &toml::Value) -> Result<Option<String>, Failure> {
    Ok(Some(match value {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        // Floats lose the exact decimal a user meant; quote them instead.
        toml::Value::Float(_) => {
            return Err(Failure::Config(format!(
                "config key {key:?}: write decimals as strings, e.g. \"0.05\""
            )))
        }
        toml::Value::Boolean(_) => return Ok(None),
        _ => {
            return Err(Failure::Config(format!(
                "config key {key:?}: only flat scalar values are supported"
            )))
        }
    }))
}

/// Returns `args` with the values of `--config <file>` spliced in after the
/// subcommand, and with `--config` itself removed.
pub fn expand(args: Vec<String>) -> Result<Vec<String>, Failure> {
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        if arg == "--config" {
            path = Some(
                it.next()
                    .ok_or_else(|| Failure::Config("--config needs a path".into()))?,
            );
        } else if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text =
        fs::read_to_string(&path).map_err(|e| Failure::Config(format!("reading {path}: {e}")))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| Failure::Config(format!("parsing {path}: {e}")))?;

    // rest[0] is the program name; the top level takes no options other
    // than --help and --version, so a subcommand can only come next.
    let has_subcommand = rest.get(1).is_some_and(|a| !a.starts_with('-'));
    let mut injected = Vec::new();
    let mut command = None;
    for (key, value) in &table {
        if key == "command" {
            command = Some(value.as_str().ok_or_else(|| {
                Failure::Config("config key \"command\" must be a string".into())
            })?);
            continue;
        }
        if rest.iter().any(|a| flag_name(a) == Some(key.as_str())) {
            continue;
        }
        match (value, value_string(key, value)?) {
            (toml::Value::Boolean(true), _) => injected.push(format!("--{key}")),
            (toml::Value::Boolean(false), _) => {}
            (_, Some(v)) => {
                injected.push(format!("--{key}"));
                injected.push(v);
            }
            (_, None) => unreachable!("only booleans map to no value"),
        }
    }
    match (has_subcommand, command) {
        (true, _) => {}
        (false, Some(cmd)) => rest.insert(1.min(rest.len()), cmd.to_string()),
        (false, None) => {
            return Err(Failure::Config(
                "no subcommand given on the command line or in the config".into(),
            ))
        }
    }
    rest.splice(2..2, injected);
    Ok(rest)
}

pub fn to_strings(args: impl IntoIterator<Item = OsString>) -> Result<Vec<String>, Failure> {
    args.into_iter()
        .map(|a| {
            a.into_string()
                .map_err(|a| Failure::Config(format!("argument {a:?} is not valid UTF-8")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn command_line_wins() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            f,
            "d = 3\ndepth = 7\narrival = \"two:0.05\"\nexact = true\nverbose = false"
        )
        .unwrap();
        let path = f.path().to_str().unwrap();
        let out = expand(argv(&format!("tp qn-table --config {path} --depth 9"))).unwrap();
        assert_eq!(out[..2], argv("tp qn-table")[..]);
        assert!(out.windows(2).any(|w| w == ["--d", "3"]));
        assert!(out.windows(2).any(|w| w == ["--depth", "9"]));
        assert!(!out.windows(2).any(|w| w == ["--depth", "7"]));
        assert!(out.contains(&"--exact".to_string()));
        assert!(!out.iter().any(|a| a.contains("verbose")));
    }

    #[test]
    fn command_from_file_and_bad_values() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "command = \"bound-lower\"\nd = 2").unwrap();
        let path = f.path().to_str().unwrap().to_string();
        let out = expand(vec!["tp".into(), format!("--config={path}")]).unwrap();
        assert_eq!(out, argv("tp bound-lower --d 2"));

        let mut g = tempfile::NamedTempFile::new().unwrap();
        writeln!(g, "command = \"qn-table\"\nalpha-step = 0.005").unwrap();
        let path = g.path().to_str().unwrap().to_string();
        assert!(matches!(
            expand(vec!["tp".into(), "--config".into(), path]),
            Err(Failure::Config(_))
        ));
        assert!(expand(argv("tp qn-table --config")).is_err());
    }
}
