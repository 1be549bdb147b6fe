//! `--config FILE` support: a file of `key=value` lines whose entries stand in
//! for flags of the selected subcommand. Flags given on the command line win.
//! Keys are checked by the argument parser, so unknown keys are rejected the
//! same way unknown flags are.

use std::fs;

/// Flags that take no value; `key=true` enables them, `key=false` omits them.
const SWITCHES: &[&str] = &["star"];

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", n + 1))?;
        let k = k.trim().trim_start_matches("--");
        if k.is_empty() || k == "config" {
            return Err(format!("config line {}: invalid key \"{k}\"", n + 1));
        }
        if out.iter().any(|(seen, _)| seen == k) {
            return Err(format!("config line {}: duplicate key \"{k}\"", n + 1));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Strip `--config FILE` from `argv` and splice the file's assignments in
/// after the subcommand path.
pub fn expand_argv(argv: Vec<String>) -> Result<Vec<String>, String> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or("--config needs a file")?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let assignments = parse_config(&text)?;
    // program name plus up to two subcommand tokens
    let mut at = 1;
    while at < rest.len() && at < 3 && !rest[at].starts_with('-') {
        at += 1;
    }
    let given = |k: &str| {
        let flag = format!("--{k}");
        rest.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
    };
    let mut inserted = Vec::new();
    for (k, v) in assignments {
        if given(&k) {
            continue;
        }
        if SWITCHES.contains(&k.as_str()) {
            match v.as_str() {
                "true" => inserted.push(format!("--{k}")),
                "false" => {}
                _ => return Err(format!("config key {k} must be true or false")),
            }
        } else {
            inserted.push(format!("--{k}={v}"));
        }
    }
    rest.splice(at..at, inserted);
    Ok(rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn parses_lines_and_comments() {
        let c = parse_config("# comment\n\nA = 1\n--B=pi/2\n").unwrap();
        assert_eq!(c, vec![("A".into(), "1".into()), ("B".into(), "pi/2".into())]);
        assert!(parse_config("nonsense").is_err());
        assert!(parse_config("A=1\nA=2").is_err());
    }

    #[test]
    fn command_line_overrides_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "m=0\nn=-1\nstar=true\nmax-len=4\n").unwrap();
        let argv = args(&format!("knotflow template knots --config {} --max-len 6", path.display()));
        let out = expand_argv(argv).unwrap();
        assert_eq!(out, args("knotflow template knots --m=0 --n=-1 --star --max-len 6"));
    }

    #[test]
    fn passthrough_without_config() {
        let a = args("knotflow tight reeb --point 1,0,0,0");
        assert_eq!(expand_argv(a.clone()).unwrap(), a);
    }
}
