//! Line-oriented helpers shared by the two text model formats.

use crate::error::{Error, Result};

/// Non-blank lines that are not `#` comments, with 1-based line numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub(crate) fn parse_floats(line: &str, lineno: usize) -> Result<Vec<f64>> {
    line.split_whitespace()
        .map(|tok| {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::Model(format!("line {lineno}: `{tok}` is not a number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Model(format!("line {lineno}: non-finite value `{tok}`")))
            }
        })
        .collect()
}

/// Parses `key v1 v2 ...` and checks the value count.
pub(crate) fn keyed(line: Option<(usize, &str)>, key: &str, count: usize) -> Result<Vec<f64>> {
    let (lineno, line) = line.ok_or_else(|| Error::Model(format!("missing `{key}` line")))?;
    let rest = line
        .strip_prefix(key)
        .filter(|r| r.is_empty() || r.starts_with(char::is_whitespace))
        .ok_or_else(|| Error::Model(format!("line {lineno}: expected `{key}`")))?;
    let values = parse_floats(rest, lineno)?;
    if values.len() != count {
        return Err(Error::Model(format!(
            "line {lineno}: `{key}` takes {count} values, found {}",
            values.len()
        )));
    }
    Ok(values)
}

pub(crate) fn expect_header(line: Option<(usize, &str)>, header: &str) -> Result<()> {
    match line {
        Some((_, l)) if l.split_whitespace().eq(header.split_whitespace()) => Ok(()),
        Some((n, l)) => Err(Error::Model(format!("line {n}: expected `{header}`, found `{l}`"))),
        None => Err(Error::Model(format!("empty model file, expected `{header}`"))),
    }
}

pub(crate) fn join(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}
