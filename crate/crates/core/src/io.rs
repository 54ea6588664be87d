//! Family files.
//!
//! Text form: a header line `n k`, then one member per line as ascending
//! space-separated integers. Blank lines and lines starting with `#` are
//! ignored. JSON form: `{"n": 6, "k": 2, "sets": [[1, 2], [1, 3]]}`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::combinatorics::{KSet, SetFamily};
use crate::error::{Error, Result};

pub fn parse_text(input: &str) -> Result<SetFamily> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        msg: "missing `n k` header".into(),
    })?;
    let dims = parse_numbers(header_line, header)?;
    let [n, k] = dims[..] else {
        return Err(Error::Parse {
            line: header_line,
            msg: format!("header must be `n k`, found `{header}`"),
        });
    };
    check_dims(header_line, n, k)?;

    let mut members = Vec::new();
    for (line, text) in lines {
        let elements = parse_numbers(line, text)?;
        members.push(checked_member(line, n, k, &elements)?);
    }
    SetFamily::new(n, k, members).map_err(|e| Error::Parse {
        line: header_line,
        msg: e.to_string(),
    })
}

pub fn parse_json(input: &str) -> Result<SetFamily> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Raw {
        n: usize,
        k: usize,
        sets: Vec<Vec<usize>>,
    }
    let raw: Raw = serde_json::from_str(input).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    check_dims(1, raw.n, raw.k)?;
    let members = raw
        .sets
        .iter()
        .enumerate()
        .map(|(i, set)| {
            checked_member(1, raw.n, raw.k, set).map_err(|e| match e {
                Error::Parse { msg, .. } => Error::Parse {
                    line: 1,
                    msg: format!("sets[{i}]: {msg}"),
                },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SetFamily::new(raw.n, raw.k, members)
}

/// Picks the JSON parser when the first non-blank character is `{`.
pub fn parse_auto(input: &str) -> Result<SetFamily> {
    if input.trim_start().starts_with('{') {
        parse_json(input)
    } else {
        parse_text(input)
    }
}

pub fn read_family(path: impl AsRef<Path>) -> Result<SetFamily> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_auto(&text).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    })
}

pub fn write_family(path: impl AsRef<Path>, family: &SetFamily) -> Result<()> {
    let path = path.as_ref();
    let body = if path.extension().is_some_and(|e| e == "json") {
        to_json(family)
    } else {
        to_text(family)
    };
    fs::write(path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn to_text(family: &SetFamily) -> String {
    let mut out = format!("{} {}\n", family.n(), family.k());
    for member in family {
        let line: Vec<String> = member.elements().map(|e| e.to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

pub fn to_json(family: &SetFamily) -> String {
    serde_json::to_string(family).expect("families always serialize")
}

fn parse_numbers(line: usize, text: &str) -> Result<Vec<usize>> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>().map_err(|_| Error::Parse {
                line,
                msg: format!("`{tok}` is not a nonnegative integer"),
            })
        })
        .collect()
}

fn check_dims(line: usize, n: usize, k: usize) -> Result<()> {
    if n > crate::combinatorics::MAX_GROUND || k > n {
        return Err(Error::Parse {
            line,
            msg: format!("invalid shape n={n}, k={k}"),
        });
    }
    Ok(())
}

fn checked_member(line: usize, n: usize, k: usize, elements: &[usize]) -> Result<KSet> {
    let fail = |msg: String| Error::Parse { line, msg };
    if elements.len() != k {
        return Err(fail(format!("expected {k} elements, found {}", elements.len())));
    }
    if let Some(&e) = elements.iter().find(|&&e| e == 0 || e > n) {
        return Err(fail(format!("element {e} outside [1, {n}]")));
    }
    if elements.windows(2).any(|w| w[0] >= w[1]) {
        return Err(fail("elements must be strictly ascending".into()));
    }
    KSet::from_elements(elements.iter().copied()).map_err(|e| fail(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let f = SetFamily::from_lists(6, 2, &[vec![1, 2], vec![3, 5], vec![2, 6]]).unwrap();
        assert_eq!(parse_text(&to_text(&f)).unwrap(), f);
        assert_eq!(parse_auto(&to_json(&f)).unwrap(), f);
    }

    #[test]
    fn comments_and_blank_lines() {
        let f = parse_text("# a star\n4 2\n\n1 2\n# skip\n1 3\n").unwrap();
        assert_eq!(f.len(), 2);
        let empty = parse_text("5 3\n").unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn text_rejects_shape_violations_with_line_numbers() {
        let err = parse_text("4 2\n1 2\n1 2 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = parse_text("4 2\n1 5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_text("4 2\n2 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_text("4 2\n1 x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(parse_text("4\n").is_err());
        assert!(parse_text("").is_err());
        assert!(parse_text("2 3\n").is_err());
    }

    #[test]
    fn json_rejects_shape_violations() {
        assert!(parse_json(r#"{"n":4,"k":2,"sets":[[1,2,3]]}"#).is_err());
        assert!(parse_json(r#"{"n":4,"k":2,"sets":[[0,1]]}"#).is_err());
        assert!(parse_json(r#"{"n":4,"k":2}"#).is_err());
        assert!(parse_json(r#"{"n":4,"k":2,"sets":[],"x":1}"#).is_err());
        let f = parse_json(r#"{"n":4,"k":2,"sets":[[1,2],[3,4]]}"#).unwrap();
        assert_eq!(f.len(), 2);
    }
}
