//! Shared pieces of the CSV formats: `# key=value ...` header lines and
//! comma-separated rows of full-precision floats.

use std::collections::HashMap;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub fn write_row<W: Write>(w: &mut W, row: &[f64]) -> std::io::Result<()> {
    let mut first = true;
    for &x in row {
        if !first {
            w.write_all(b",")?;
        }
        first = false;
        w.write_all(fmt_f64(x).as_bytes())?;
    }
    w.write_all(b"\n")
}

pub fn parse_row(line: &str, what: &'static str) -> Result<Vec<f64>> {
    line.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(what, format!("bad number {s:?}")))
        })
        .collect()
}

pub struct Header {
    what: &'static str,
    fields: HashMap<String, String>,
}

impl Header {
    pub fn get(&self, key: &str) -> Result<&str> {
        self.fields
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::parse(self.what, format!("header missing {key}=")))
    }

    pub fn num<T: FromStr>(&self, key: &str) -> Result<T> {
        let v = self.get(key)?;
        v.parse()
            .map_err(|_| Error::parse(self.what, format!("header {key}={v} is not a number")))
    }
}

pub fn parse_header(line: &str, what: &'static str) -> Result<Header> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| Error::parse(what, "first line must start with '#'"))?;
    let mut fields = HashMap::new();
    for tok in body.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::parse(what, format!("header token {tok:?} is not key=value")))?;
        fields.insert(k.to_string(), v.to_string());
    }
    Ok(Header { what, fields })
}
