//! Plain-text `key = value` files: one pair per line, `#` starts a comment.

use crate::error::{Error, Result};

/// Parses `text` into ordered pairs, rejecting keys not in `allowed` and
/// duplicate keys.
pub fn parse(text: &str, allowed: &[&str]) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !allowed.contains(&k) {
            return Err(Error::Parse(format!("line {}: unknown key `{k}`", n + 1)));
        }
        if out.iter().any(|(seen, _)| seen == k) {
            return Err(Error::Parse(format!("line {}: duplicate key `{k}`", n + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

pub fn number(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("`{key}`: `{value}` is not a number")))
}

/// Comma- or whitespace-separated list of numbers.
pub fn numbers(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| number(key, s))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_blanks() {
        let kv = parse("# header\nkind = nariai\n\nlambda=1 # trailing\n", &["kind", "lambda"]).unwrap();
        assert_eq!(kv, vec![("kind".into(), "nariai".into()), ("lambda".into(), "1".into())]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse("foo = 1", &["kind"]).is_err());
        assert!(parse("kind nariai", &["kind"]).is_err());
        assert!(parse("kind = a\nkind = b", &["kind"]).is_err());
        assert_eq!(numbers("i", "1, 4").unwrap(), vec![1.0, 4.0]);
    }
}
