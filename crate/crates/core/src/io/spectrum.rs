use crate::error::{Error, Result};
use std::io::{BufRead, Write};

/// Reads a two-column `energy_eV value` file; `#` starts a comment.
pub fn read_spectrum<R: BufRead>(r: R) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut it = body.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty());
        let parse = |s: Option<&str>| -> Result<f64> {
            s.and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Parse { line: i + 1, msg: format!("expected two numbers, got '{body}'") })
        };
        let e = parse(it.next())?;
        let v = parse(it.next())?;
        out.push((e, v));
    }
    Ok(out)
}

pub fn write_spectrum<W: Write>(mut w: W, header: &str, data: &[(f64, f64)]) -> Result<()> {
    writeln!(w, "# energy_eV {header}")?;
    for (e, v) in data {
        writeln!(w, "{e:.6} {v:.9e}")?;
    }
    Ok(())
}
