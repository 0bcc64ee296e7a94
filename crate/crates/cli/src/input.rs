//! Series files: one finite number per line, optional `value` header.

use std::fs;
use std::path::Path;

use crate::Failure;

pub fn read_series(path: &Path) -> Result<Vec<f64>, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::runtime(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes)
        .map_err(|_| Failure::runtime(format!("{} is not valid UTF-8", path.display())))?;
    parse_series(&text).map_err(|msg| Failure::runtime(format!("{}: {msg}", path.display())))
}

pub fn parse_series(text: &str) -> Result<Vec<f64>, String> {
    let mut values = Vec::new();
    for (i, line) in text.split('\n').enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line).trim();
        if line.is_empty() || (i == 0 && line == "value") {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ => return Err(format!("line {}: expected a finite number, found {line:?}", i + 1)),
        }
    }
    if values.is_empty() {
        return Err("no observations".into());
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_crlf() {
        assert_eq!(parse_series("value\r\n1.5\r\n-2\r\n").unwrap(), vec![1.5, -2.0]);
        assert_eq!(parse_series("3\n4").unwrap(), vec![3.0, 4.0]);
    }

    #[test]
    fn bad_line_is_reported_by_number() {
        let err = parse_series("1\n2\nabc\n").unwrap_err();
        assert!(err.starts_with("line 3:"), "{err}");
        assert!(parse_series("1\nNaN\n").unwrap_err().starts_with("line 2:"));
        assert!(parse_series("1\nvalue\n").is_err());
    }
}
