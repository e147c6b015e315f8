//! Raw sample stream: 64-byte ASCII header, then little-endian f64 samples.

use crate::error::{Error, Result};
use std::io::{Read, Write};

pub const HEADER_LEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DumpHeader {
    pub sample_rate: f64,
    pub seed: u64,
    pub duration: f64,
}

pub fn write_dump<W: Write>(mut w: W, h: &DumpHeader, samples: &[f64]) -> Result<()> {
    let text = format!("fs={} seed={} T={}", h.sample_rate, h.seed, h.duration);
    if text.len() > HEADER_LEN - 1 {
        return Err(Error::InvalidParameter("dump header does not fit in 64 bytes".into()));
    }
    let mut hdr = [b' '; HEADER_LEN];
    hdr[..text.len()].copy_from_slice(text.as_bytes());
    hdr[HEADER_LEN - 1] = b'\n';
    w.write_all(&hdr)?;
    for s in samples {
        w.write_all(&s.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_dump<R: Read>(mut r: R) -> Result<(DumpHeader, Vec<f64>)> {
    let mut hdr = [0u8; HEADER_LEN];
    r.read_exact(&mut hdr)?;
    let text = std::str::from_utf8(&hdr).map_err(|_| Error::Parse { line: 1, msg: "header not ASCII".into() })?;
    let mut fs = None;
    let mut seed = None;
    let mut dur = None;
    for tok in text.split_whitespace() {
        match tok.split_once('=') {
            Some(("fs", v)) => fs = v.parse().ok(),
            Some(("seed", v)) => seed = v.parse().ok(),
            Some(("T", v)) => dur = v.parse().ok(),
            _ => {}
        }
    }
    let h = match (fs, seed, dur) {
        (Some(sample_rate), Some(seed), Some(duration)) => DumpHeader { sample_rate, seed, duration },
        _ => return Err(Error::Parse { line: 1, msg: format!("bad dump header '{}'", text.trim()) }),
    };
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Parse { line: 1, msg: "truncated sample stream".into() });
    }
    let samples = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((h, samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let h = DumpHeader { sample_rate: 20000.0, seed: 42, duration: 0.5 };
        let s = vec![1.0, -2.5e-3, f64::MIN_POSITIVE];
        let mut buf = Vec::new();
        write_dump(&mut buf, &h, &s).unwrap();
        assert_eq!(buf.len(), 64 + 24);
        let (h2, s2) = read_dump(buf.as_slice()).unwrap();
        assert_eq!(h, h2);
        assert_eq!(s, s2);
    }
}
