//! Flat `key = value` text blocks used for network specs and CLI config files.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Parses `key = value` lines. Blank lines and lines starting with `#` are
/// skipped; `key: value` is accepted as well. Keys are case-sensitive so that
/// `N` and `L` keep their meaning.
pub fn parse_block(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .or_else(|| line.split_once(':'))
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
        }
        if out.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
        }
    }
    Ok(out)
}

pub(crate) fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse `{value}` for key `{key}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_separators() {
        let map = parse_block("# header\nkind = star\nN: 5\n\nL = 4 # trailing\n").unwrap();
        assert_eq!(map["kind"], "star");
        assert_eq!(map["N"], "5");
        assert_eq!(map["L"], "4");
    }

    #[test]
    fn rejects_garbage_and_duplicates() {
        assert!(parse_block("just words").is_err());
        assert!(parse_block("N = 1\nN = 2").is_err());
        assert!(parse_block(" = 3").is_err());
    }
}
